// Dense row-major matrix and vector primitives shared by every module.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dc {

using Vector = std::vector<double>;

// Row-major dense matrix of 64-bit reals. Entries are expected to stay
// finite; operations that can introduce non-finite values check for them.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row_ptr(std::size_t r) { return data.data() + r * cols; }
    const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }

    Vector row(std::size_t r) const {
        return Vector(row_ptr(r), row_ptr(r) + cols);
    }

    static Matrix identity(std::size_t n);

    std::string shape_str() const;
};

Matrix matmul(const Matrix& a, const Matrix& b);

// y = M x
Vector matvec(const Matrix& m, const Vector& x);

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& v);
double norm_inf(const Vector& v);

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

// Throws std::runtime_error naming `what` if a non-finite entry is present.
void require_finite(const Vector& v, const char* what);
void require_finite(const Matrix& m, const char* what);

}  // namespace dc
