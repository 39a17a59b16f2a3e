#include "consensus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "csv.hpp"
#include "stats.hpp"

namespace dc {

void validate_prob_matrix(const ProbMatrix& probs) {
    if (probs.models() == 0 || probs.classes() == 0) {
        throw std::invalid_argument("prob matrix: empty");
    }
    for (std::size_t i = 0; i < probs.models(); ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < probs.classes(); ++c) {
            const double p = probs.probs(i, c);
            if (!(p >= 0.0 && p <= 1.0)) {
                throw std::invalid_argument("prob matrix: entry out of [0,1] in row " +
                                            std::to_string(i));
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-6) {
            throw std::invalid_argument("prob matrix: row " + std::to_string(i) +
                                        " sums to " + std::to_string(sum));
        }
    }
}

ConsensusDecision consensus_classify(const ProbMatrix& probs, const ConsensusParams& params) {
    if (params.k < 1 || params.k > params.n) {
        throw std::invalid_argument("consensus: need 1 <= k <= n, got k=" +
                                    std::to_string(params.k) + ", n=" +
                                    std::to_string(params.n));
    }
    if (probs.models() != params.n) {
        throw std::invalid_argument("consensus: prob matrix has " +
                                    std::to_string(probs.models()) + " rows, params.n=" +
                                    std::to_string(params.n));
    }
    validate_prob_matrix(probs);

    ConsensusDecision decision;
    decision.p_min.resize(probs.classes());
    Vector column(probs.models());
    for (std::size_t c = 0; c < probs.classes(); ++c) {
        for (std::size_t i = 0; i < probs.models(); ++i) column[i] = probs.probs(i, c);
        decision.p_min[c] = kth_largest(column, params.k);
    }

    std::size_t best = 0;
    for (std::size_t c = 1; c < decision.p_min.size(); ++c) {
        if (decision.p_min[c] > decision.p_min[best]) best = c;  // ties keep lowest index
    }
    decision.confidence = decision.p_min[best];
    if (decision.confidence > params.p_t) {
        decision.accepted = true;
        decision.class_index = best;
    }
    return decision;
}

ProbMatrix ensemble_probs(const std::vector<const DenseNetwork*>& models, const Vector& x) {
    if (models.empty()) throw std::invalid_argument("ensemble_probs: no models");
    const std::size_t d = models[0]->input_dim;
    const std::size_t c = models[0]->class_count;
    for (const DenseNetwork* m : models) {
        if (m->input_dim != d || m->class_count != c) {
            throw std::invalid_argument("ensemble_probs: models disagree on dimensions");
        }
    }
    ProbMatrix out;
    out.probs = Matrix(models.size(), c);
    for (std::size_t i = 0; i < models.size(); ++i) {
        Vector p = forward(*models[i], x).probabilities;
        std::copy(p.begin(), p.end(), out.probs.row_ptr(i));
    }
    return out;
}

std::vector<CurvePoint> coverage_accuracy_curve(const std::vector<const DenseNetwork*>& models,
                                                const Dataset& test, std::size_t k,
                                                const Vector& p_t_grid) {
    if (test.size() == 0) throw std::invalid_argument("coverage_accuracy_curve: empty test set");
    if (p_t_grid.empty()) throw std::invalid_argument("coverage_accuracy_curve: empty grid");

    // evaluate the ensemble once per sample, then sweep thresholds
    std::vector<ProbMatrix> all;
    all.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i)
        all.push_back(ensemble_probs(models, test.sample(i)));

    std::vector<CurvePoint> curve;
    for (double p_t : p_t_grid) {
        ConsensusParams params{models.size(), k, p_t};
        std::size_t accepted = 0, correct = 0;
        for (std::size_t i = 0; i < test.size(); ++i) {
            ConsensusDecision d = consensus_classify(all[i], params);
            if (!d.accepted) continue;
            ++accepted;
            correct += (d.class_index == test.labels[i]);
        }
        CurvePoint pt;
        pt.p_t = p_t;
        pt.coverage = static_cast<double>(accepted) / static_cast<double>(test.size());
        if (accepted > 0) {
            pt.accuracy = static_cast<double>(correct) / static_cast<double>(accepted);
        }
        curve.push_back(pt);
    }
    return curve;
}

double ood_rejection_rate(const std::vector<const DenseNetwork*>& models, const Matrix& ood,
                          const ConsensusParams& params) {
    if (ood.rows == 0) throw std::invalid_argument("ood_rejection_rate: empty sample set");
    std::size_t rejected = 0;
    for (std::size_t i = 0; i < ood.rows; ++i) {
        ProbMatrix probs = ensemble_probs(models, ood.row(i));
        if (!consensus_classify(probs, params).accepted) ++rejected;
    }
    return static_cast<double>(rejected) / static_cast<double>(ood.rows);
}

std::string curve_to_csv(const std::vector<CurvePoint>& curve) {
    std::string out = "p_t,coverage,accuracy\n";
    for (const CurvePoint& pt : curve) {
        out += csv_row({format_double(pt.p_t), format_double(pt.coverage),
                        pt.accuracy ? format_double(*pt.accuracy) : "undefined"});
    }
    return out;
}

}  // namespace dc
