#include "matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace dc {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::string Matrix::shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw std::invalid_argument("matmul: dimension mismatch (" + a.shape_str() +
                                    " times " + b.shape_str() + ")");
    }
    Matrix out(a.rows, b.cols, 0.0);
    // i-k-j order keeps the inner loop contiguous over both b and out.
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row_ptr(i);
        double* orow = out.row_ptr(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            const double* brow = b.row_ptr(k);
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    require_finite(out, "matmul result");
    return out;
}

Vector matvec(const Matrix& m, const Vector& x) {
    if (m.cols != x.size()) {
        throw std::invalid_argument("matvec: dimension mismatch (" + m.shape_str() +
                                    " times vector of length " + std::to_string(x.size()) + ")");
    }
    Vector y(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* row = m.row_ptr(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
    return y;
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("dot: length mismatch (" + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(const Vector& v) {
    return std::sqrt(dot(v, v));
}

double norm_inf(const Vector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

bool all_finite(const Vector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

bool all_finite(const Matrix& m) {
    return all_finite(m.data);
}

void require_finite(const Vector& v, const char* what) {
    if (!all_finite(v)) throw std::runtime_error(std::string(what) + ": non-finite entry");
}

void require_finite(const Matrix& m, const char* what) {
    if (!all_finite(m.data)) throw std::runtime_error(std::string(what) + ": non-finite entry");
}

}  // namespace dc
