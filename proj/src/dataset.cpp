#include "dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rng.hpp"

namespace dc {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, std::size_t row, const std::string& col) {
    const std::string s = trim(raw);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw std::invalid_argument("load_csv: non-numeric cell '" + raw + "' at row " +
                                    std::to_string(row) + ", column '" + col + "'");
    }
    return value;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_csv: cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("load_csv: empty file: " + path);
    std::vector<std::string> header = split_line(line);
    for (auto& h : header) h = trim(h);

    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == label_column) label_idx = i;
    if (label_idx == header.size()) {
        throw std::invalid_argument("load_csv: unknown label column '" + label_column +
                                    "' in " + path);
    }

    Dataset ds;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (i != label_idx) ds.feature_names.push_back(header[i]);

    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++rows;
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size()) {
            throw std::invalid_argument("load_csv: row " + std::to_string(rows) + " has " +
                                        std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(header.size()));
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            double v = parse_cell(cells[i], rows, header[i]);
            if (i == label_idx) {
                if (v < 0 || v != std::floor(v)) {
                    throw std::invalid_argument("load_csv: label at row " + std::to_string(rows) +
                                                " must be a non-negative integer, got '" +
                                                cells[i] + "'");
                }
                ds.labels.push_back(static_cast<std::size_t>(v));
            } else {
                values.push_back(v);
            }
        }
    }
    if (rows == 0) throw std::invalid_argument("load_csv: no data rows in " + path);

    ds.features = Matrix(rows, header.size() - 1);
    ds.features.data = std::move(values);
    ds.class_count = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
    require_finite(ds.features, "load_csv features");
    return ds;
}

NormalizationParams fit_normalize(const Dataset& train) {
    if (train.size() == 0) throw std::invalid_argument("fit_normalize: empty dataset");
    const std::size_t d = train.input_dim();
    NormalizationParams p;
    p.min.assign(d, std::numeric_limits<double>::infinity());
    p.max.assign(d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < train.size(); ++i) {
        const double* row = train.features.row_ptr(i);
        for (std::size_t j = 0; j < d; ++j) {
            p.min[j] = std::min(p.min[j], row[j]);
            p.max[j] = std::max(p.max[j], row[j]);
        }
    }
    return p;
}

Dataset apply_normalize(const NormalizationParams& params, const Dataset& data) {
    if (params.dim() != data.input_dim()) {
        throw std::invalid_argument("apply_normalize: params fitted for " +
                                    std::to_string(params.dim()) + " features, data has " +
                                    std::to_string(data.input_dim()));
    }
    Dataset out = data;
    for (std::size_t i = 0; i < out.size(); ++i) {
        double* row = out.features.row_ptr(i);
        for (std::size_t j = 0; j < out.input_dim(); ++j) {
            const double range = params.max[j] - params.min[j];
            row[j] = range > 0.0 ? (row[j] - params.min[j]) / range : 0.0;
        }
    }
    return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction,
                                  std::uint64_t seed) {
    if (data.size() < 2) throw std::invalid_argument("split: need at least 2 samples");
    if (train_fraction < 0.0 || train_fraction > 1.0) {
        throw std::invalid_argument("split: train_fraction must be in [0, 1]");
    }
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);

    const auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(data.size())));

    auto take = [&](std::size_t begin, std::size_t end) {
        Dataset part;
        part.feature_names = data.feature_names;
        part.class_count = data.class_count;
        part.features = Matrix(end - begin, data.input_dim());
        part.labels.reserve(end - begin);
        for (std::size_t r = begin; r < end; ++r) {
            const double* src = data.features.row_ptr(idx[r]);
            std::copy(src, src + data.input_dim(), part.features.row_ptr(r - begin));
            part.labels.push_back(data.labels[idx[r]]);
        }
        return part;
    };
    return {take(0, n_train), take(n_train, data.size())};
}

SyntheticData gen_synthetic(const SyntheticSpec& spec) {
    if (spec.samples < 2) throw std::invalid_argument("gen_synthetic: samples must be >= 2");
    if (spec.input_dim < 2) throw std::invalid_argument("gen_synthetic: input_dim must be >= 2");
    if (spec.class_count < 2) throw std::invalid_argument("gen_synthetic: class_count must be >= 2");

    const std::size_t d = spec.input_dim;
    const std::size_t latent_dim = std::max<std::size_t>(2, d / 10);
    const double jitter = 0.05 * spec.noise;

    Rng rng(spec.seed);

    // Random orthonormal basis of the latent subspace (Gram-Schmidt over
    // Gaussian draws).
    std::vector<Vector> basis;
    while (basis.size() < latent_dim) {
        Vector v(d);
        for (auto& x : v) x = rng.normal();
        for (const auto& b : basis) {
            const double proj = dot(v, b);
            for (std::size_t j = 0; j < d; ++j) v[j] -= proj * b[j];
        }
        const double nrm = norm2(v);
        if (nrm < 1e-8) continue;
        for (auto& x : v) x /= nrm;
        basis.push_back(std::move(v));
    }

    // Class-mean directions live inside the subspace so the discriminative
    // signal shares coordinates with the nuisance noise.
    auto subspace_unit = [&]() {
        Vector u(latent_dim);
        for (auto& x : u) x = rng.normal();
        Vector w(d, 0.0);
        for (std::size_t l = 0; l < latent_dim; ++l)
            for (std::size_t j = 0; j < d; ++j) w[j] += u[l] * basis[l][j];
        const double nrm = norm2(w);
        for (auto& x : w) x /= nrm;
        return w;
    };

    Vector w = subspace_unit();
    std::vector<Vector> class_dirs(spec.class_count);
    for (std::size_t c = 0; c < spec.class_count; ++c) {
        if (c == 0) {
            class_dirs[c] = w;
            for (auto& x : class_dirs[c]) x = -0.5 * spec.separation * x;
        } else if (c == 1) {
            class_dirs[c] = w;
            for (auto& x : class_dirs[c]) x = 0.5 * spec.separation * x;
        } else {
            class_dirs[c] = subspace_unit();
            for (auto& x : class_dirs[c]) x = 0.5 * spec.separation * x;
        }
    }

    Dataset ds;
    ds.class_count = spec.class_count;
    ds.features = Matrix(spec.samples, d);
    ds.labels.resize(spec.samples);
    ds.feature_names.reserve(d);
    for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("f" + std::to_string(j));

    for (std::size_t i = 0; i < spec.samples; ++i) {
        const std::size_t label = rng.bounded(spec.class_count);
        ds.labels[i] = label;
        double* row = ds.features.row_ptr(i);
        for (std::size_t j = 0; j < d; ++j) row[j] = class_dirs[label][j];
        for (std::size_t l = 0; l < latent_dim; ++l) {
            const double z = spec.noise * rng.normal();
            for (std::size_t j = 0; j < d; ++j) row[j] += z * basis[l][j];
        }
        for (std::size_t j = 0; j < d; ++j) row[j] += jitter * rng.normal();
    }

    // Shift/scale each feature into [0, 1].
    NormalizationParams p = fit_normalize(ds);
    ds = apply_normalize(p, ds);

    return SyntheticData{std::move(ds), std::move(w)};
}

Matrix gen_ood(std::size_t count, std::size_t input_dim, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("gen_ood: count must be >= 1");
    Rng rng(seed);
    Matrix m(count, input_dim);
    for (auto& x : m.data) x = rng.uniform01();
    return m;
}

}  // namespace dc
