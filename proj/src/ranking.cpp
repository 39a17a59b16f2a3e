#include "ranking.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace dc {

std::vector<std::string> FeatureRanking::top_positive(std::size_t n) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n && i < entries.size(); ++i) out.push_back(entries[i].first);
    return out;
}

std::vector<std::string> FeatureRanking::top_negative(std::size_t n) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n && i < entries.size(); ++i)
        out.push_back(entries[entries.size() - 1 - i].first);
    return out;
}

FeatureRanking feature_ranking(const Vector& values,
                               const std::vector<std::string>& feature_names) {
    if (values.size() != feature_names.size()) {
        throw std::invalid_argument("feature_ranking: " + std::to_string(values.size()) +
                                    " values vs " + std::to_string(feature_names.size()) +
                                    " names");
    }
    FeatureRanking r;
    r.entries.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        r.entries.emplace_back(feature_names[i], values[i]);
    std::stable_sort(r.entries.begin(), r.entries.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return r;
}

double topn_agreement(const FeatureRanking& a, const FeatureRanking& b, std::size_t n) {
    if (n < 2 || n % 2 != 0) {
        throw std::invalid_argument("topn_agreement: n must be even and >= 2, got " +
                                    std::to_string(n));
    }
    if (n > a.size() || n > b.size()) {
        throw std::invalid_argument("topn_agreement: n=" + std::to_string(n) +
                                    " exceeds feature count");
    }
    const std::size_t half = n / 2;
    auto as_set = [](const std::vector<std::string>& v) {
        return std::set<std::string>(v.begin(), v.end());
    };
    const auto ap = as_set(a.top_positive(half));
    const auto bp = as_set(b.top_positive(half));
    const auto an = as_set(a.top_negative(half));
    const auto bn = as_set(b.top_negative(half));
    std::size_t shared = 0;
    for (const auto& f : ap) shared += bp.count(f);
    for (const auto& f : an) shared += bn.count(f);
    return static_cast<double>(shared) / static_cast<double>(n);
}

}  // namespace dc
