// Parameter-update rules: SGD, Adamax, Adadelta, Adagrad.
//
// Constants: SGD is plain (no momentum); Adagrad eps 1e-8; Adadelta
// rho 0.95, eps 1e-6; Adamax beta1 0.9, beta2 0.999, eps 1e-8.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "network.hpp"

namespace dc {

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::sgd;
    // One accumulator pair per parameter tensor, mirroring its shape:
    // Adamax (m, u), Adadelta (E[g^2], E[dx^2]), Adagrad (sum g^2, unused).
    std::vector<Vector> accum_a;
    std::vector<Vector> accum_b;
    std::uint64_t step_count = 0;
};

OptimizerState make_optimizer_state(OptimizerKind kind,
                                    const std::vector<std::size_t>& tensor_sizes);

// One update over the full parameter set; spans pair up tensor-wise with
// the state accumulators.
void optimizer_step(OptimizerState& state, std::span<std::span<double>> params,
                    std::span<std::span<const double>> grads, double learning_rate);

}  // namespace dc
