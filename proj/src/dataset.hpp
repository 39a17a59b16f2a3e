// Dataset ingestion, min-max normalization, splits, and synthetic /
// out-of-distribution sample generation.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "matrix.hpp"

namespace dc {

struct Dataset {
    Matrix features;                         // samples x input_dim
    std::vector<std::size_t> labels;         // class indices < class_count
    std::vector<std::string> feature_names;  // length input_dim
    std::size_t class_count = 0;

    std::size_t size() const { return features.rows; }
    std::size_t input_dim() const { return features.cols; }
    Vector sample(std::size_t i) const { return features.row(i); }
};

struct NormalizationParams {
    Vector min;  // per-feature
    Vector max;  // per-feature, max >= min

    std::size_t dim() const { return min.size(); }
    bool empty() const { return min.empty(); }
};

// CSV: comma-separated, first row header, decimal-point reals. The label
// column must hold non-negative integers; class_count = max label + 1.
Dataset load_csv(const std::string& path, const std::string& label_column);

NormalizationParams fit_normalize(const Dataset& train);

// x' = (x - min) / (max - min); constant features map to 0.0. Values from
// outside the fitted range land outside [0, 1] and are kept as-is (no
// clipping), preserving the linearity of the map.
Dataset apply_normalize(const NormalizationParams& params, const Dataset& data);

// Seeded shuffle then partition. train_fraction 1.0 leaves the test side
// empty (callers may warn).
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction,
                                  std::uint64_t seed);

struct SyntheticSpec {
    std::size_t samples = 1000;
    std::size_t input_dim = 20;
    std::size_t class_count = 2;
    double separation = 3.0;  // class-mean distance in units of `noise`
    double noise = 1.0;
    std::uint64_t seed = 1;
};

struct SyntheticData {
    Dataset dataset;
    Vector ground_truth_direction;  // unit vector from class 0 mean to class 1 mean
};

// Two (or more) Gaussian classes whose means differ along a seeded random
// unit direction w scaled by `separation`. The nuisance noise is drawn in a
// low-dimensional random subspace containing w (latent_dim = max(2, d/10))
// plus a small isotropic jitter (5% of `noise`), so in-distribution samples
// concentrate near a thin slab of the feature cube the way correlated
// tabular data does. Features are then affinely mapped into [0, 1].
// Signs of w survive the per-feature rescaling, so w remains a valid
// ground truth for sign-based interpretability checks.
SyntheticData gen_synthetic(const SyntheticSpec& spec);

// `count` samples uniform on [0,1]^input_dim, one per row.
Matrix gen_ood(std::size_t count, std::size_t input_dim, std::uint64_t seed);

}  // namespace dc
