// Logistic-regression and linear-SVM baselines with intrinsic feature
// importances.
#pragma once

#include <cstdint>

#include "dataset.hpp"
#include "ranking.hpp"

namespace dc {

enum class LinearKind { logistic, linear_svm };

struct LinearModel {
    Vector weights;
    double bias = 0.0;
    LinearKind kind = LinearKind::logistic;

    // w.x + b
    double decision(const Vector& x) const;
    // probability of class 1 (sigmoid of the margin for the SVM as well,
    // handy for thresholding; AUC only needs monotone scores)
    double score(const Vector& x) const;
};

// Mini-batch gradient descent on the cross-entropy; weights start at zero,
// the seed drives only the shuffle order. Binary labels required.
LinearModel train_logistic(const Dataset& data, double learning_rate, std::size_t epochs,
                           std::uint64_t seed, std::size_t batch_size = 32);

// Subgradient descent on 0.5 |w|^2 + C * mean(hinge); C = 0 degenerates to
// the regularizer alone and shrinks the weights toward zero.
LinearModel train_linear_svm(const Dataset& data, double C, double learning_rate,
                             std::size_t epochs, std::uint64_t seed,
                             std::size_t batch_size = 32);

FeatureRanking linear_feature_ranking(const LinearModel& model,
                                      const std::vector<std::string>& feature_names);

}  // namespace dc
