// Signed feature-importance rankings and the top-n agreement protocol.
#pragma once

#include <string>
#include <vector>

#include "matrix.hpp"

namespace dc {

// Features sorted by signed contribution, descending. Positive values push
// toward the designated positive class (class 1). Ties keep input order.
struct FeatureRanking {
    std::vector<std::pair<std::string, double>> entries;

    std::size_t size() const { return entries.size(); }
    std::vector<std::string> top_positive(std::size_t n) const;
    std::vector<std::string> top_negative(std::size_t n) const;
};

FeatureRanking feature_ranking(const Vector& values,
                               const std::vector<std::string>& feature_names);

// Fraction of shared features between the top n/2 positive and top n/2
// negative slices of two rankings (set intersection, order ignored).
// n must be even and at most the feature count.
double topn_agreement(const FeatureRanking& a, const FeatureRanking& b, std::size_t n);

}  // namespace dc
