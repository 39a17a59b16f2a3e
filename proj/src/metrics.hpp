// Binary classification metrics: accuracy, ROC AUC, precision/recall/F1.
#pragma once

#include <cstdint>
#include <vector>

#include "matrix.hpp"

namespace dc {

struct MetricsReport {
    double accuracy = 0.0;
    double roc_auc = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    // Set when nothing was predicted positive; precision is then reported
    // as 0 by convention.
    bool no_positive_predictions = false;
};

// Scores are interpreted as confidence in the positive class (class 1);
// predictions are score > decision_threshold. ROC AUC uses the rank-based
// (Mann-Whitney) formulation with half credit for ties, so it is invariant
// under strictly monotone score transforms. A single-class label set makes
// the AUC undefined and is reported as an error.
MetricsReport evaluate(const Vector& scores, const std::vector<std::size_t>& labels,
                       double decision_threshold = 0.5);

}  // namespace dc
