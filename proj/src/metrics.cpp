#include "metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace dc {

MetricsReport evaluate(const Vector& scores, const std::vector<std::size_t>& labels,
                       double decision_threshold) {
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("evaluate: scores and labels length mismatch");
    }
    if (scores.empty()) throw std::invalid_argument("evaluate: empty input");

    std::size_t n_pos = 0, n_neg = 0;
    for (std::size_t l : labels) {
        if (l > 1) throw std::invalid_argument("evaluate: labels must be binary (0/1)");
        if (l == 1) ++n_pos; else ++n_neg;
    }
    if (n_pos == 0 || n_neg == 0) {
        throw std::invalid_argument("evaluate: ROC AUC undefined for a single-class label set");
    }

    MetricsReport r;

    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] > decision_threshold;
        if (pred && labels[i] == 1) ++tp;
        else if (pred && labels[i] == 0) ++fp;
        else if (!pred && labels[i] == 0) ++tn;
        else ++fn;
    }
    r.accuracy = static_cast<double>(tp + tn) / static_cast<double>(scores.size());
    if (tp + fp == 0) {
        r.no_positive_predictions = true;
        r.precision = 0.0;
    } else {
        r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    r.f_measure = (r.precision + r.recall) > 0.0
                      ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                      : 0.0;

    // AUC by average ranks: (sum of positive ranks - n_pos(n_pos+1)/2) /
    // (n_pos * n_neg); ties share their average rank.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(scores.size(), 0.0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg_rank;
        i = j + 1;
    }
    double pos_rank_sum = 0.0;
    for (std::size_t k = 0; k < scores.size(); ++k)
        if (labels[k] == 1) pos_rank_sum += rank[k];
    r.roc_auc = (pos_rank_sum - 0.5 * static_cast<double>(n_pos) *
                                    static_cast<double>(n_pos + 1)) /
                (static_cast<double>(n_pos) * static_cast<double>(n_neg));
    return r;
}

}  // namespace dc
