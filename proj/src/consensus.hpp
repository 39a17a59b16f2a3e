// Deep (n, k) consensus classification with reject option, and the
// coverage/accuracy evaluation curves.
//
// For each class c, P_min[c] is the minimum over the k most confident of
// the n per-model probabilities for c, i.e. the k-th largest entry of the
// class column. The sample is accepted iff max(P_min) exceeds p_t strictly;
// the class is the argmax of P_min with ties broken toward the lowest class
// index. Under this reading (n, n) is the plain entry-wise minimum and
// smaller k weakens the gate.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dataset.hpp"
#include "matrix.hpp"
#include "network.hpp"

namespace dc {

struct ConsensusParams {
    std::size_t n = 5;
    std::size_t k = 5;
    double p_t = 0.5;
};

// n x class_count matrix of per-model class probabilities; rows must sum
// to 1 within 1e-6 with entries in [0, 1].
struct ProbMatrix {
    Matrix probs;

    std::size_t models() const { return probs.rows; }
    std::size_t classes() const { return probs.cols; }
};

void validate_prob_matrix(const ProbMatrix& probs);

struct ConsensusDecision {
    bool accepted = false;
    std::size_t class_index = 0;  // meaningful only when accepted
    double confidence = 0.0;      // max(P_min), recorded for both outcomes
    Vector p_min;                 // per class
};

ConsensusDecision consensus_classify(const ProbMatrix& probs, const ConsensusParams& params);

// Row i holds forward(models[i], x).probabilities. All models must share
// input_dim and class_count.
ProbMatrix ensemble_probs(const std::vector<const DenseNetwork*>& models, const Vector& x);

struct CurvePoint {
    double p_t = 0.0;
    double coverage = 0.0;
    // empty when coverage is zero (written as the "undefined" literal)
    std::optional<double> accuracy;
};

std::vector<CurvePoint> coverage_accuracy_curve(const std::vector<const DenseNetwork*>& models,
                                                const Dataset& test, std::size_t k,
                                                const Vector& p_t_grid);

double ood_rejection_rate(const std::vector<const DenseNetwork*>& models, const Matrix& ood,
                          const ConsensusParams& params);

// CSV with header p_t,coverage,accuracy.
std::string curve_to_csv(const std::vector<CurvePoint>& curve);

}  // namespace dc
