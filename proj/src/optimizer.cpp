#include "optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace dc {

namespace {
constexpr double kAdagradEps = 1e-8;
constexpr double kAdadeltaRho = 0.95;
constexpr double kAdadeltaEps = 1e-6;
constexpr double kAdamaxBeta1 = 0.9;
constexpr double kAdamaxBeta2 = 0.999;
constexpr double kAdamaxEps = 1e-8;
}  // namespace

OptimizerState make_optimizer_state(OptimizerKind kind,
                                    const std::vector<std::size_t>& tensor_sizes) {
    OptimizerState state;
    state.kind = kind;
    for (std::size_t n : tensor_sizes) {
        state.accum_a.emplace_back(n, 0.0);
        state.accum_b.emplace_back(n, 0.0);
    }
    return state;
}

void optimizer_step(OptimizerState& state, std::span<std::span<double>> params,
                    std::span<std::span<const double>> grads, double learning_rate) {
    if (params.size() != grads.size() || params.size() != state.accum_a.size()) {
        throw std::invalid_argument("optimizer_step: tensor count mismatch");
    }
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);

    for (std::size_t ti = 0; ti < params.size(); ++ti) {
        std::span<double> p = params[ti];
        std::span<const double> g = grads[ti];
        Vector& a = state.accum_a[ti];
        Vector& b = state.accum_b[ti];
        if (p.size() != g.size() || p.size() != a.size()) {
            throw std::invalid_argument("optimizer_step: shape mismatch in tensor " +
                                        std::to_string(ti));
        }
        switch (state.kind) {
            case OptimizerKind::sgd:
                for (std::size_t i = 0; i < p.size(); ++i) p[i] -= learning_rate * g[i];
                break;
            case OptimizerKind::adagrad:
                for (std::size_t i = 0; i < p.size(); ++i) {
                    a[i] += g[i] * g[i];
                    p[i] -= learning_rate * g[i] / (std::sqrt(a[i]) + kAdagradEps);
                }
                break;
            case OptimizerKind::adadelta:
                for (std::size_t i = 0; i < p.size(); ++i) {
                    a[i] = kAdadeltaRho * a[i] + (1.0 - kAdadeltaRho) * g[i] * g[i];
                    const double dx = -std::sqrt(b[i] + kAdadeltaEps) /
                                      std::sqrt(a[i] + kAdadeltaEps) * g[i];
                    b[i] = kAdadeltaRho * b[i] + (1.0 - kAdadeltaRho) * dx * dx;
                    p[i] += learning_rate * dx;
                }
                break;
            case OptimizerKind::adamax: {
                const double bias_fix = 1.0 - std::pow(kAdamaxBeta1, t);
                for (std::size_t i = 0; i < p.size(); ++i) {
                    a[i] = kAdamaxBeta1 * a[i] + (1.0 - kAdamaxBeta1) * g[i];
                    b[i] = std::max(kAdamaxBeta2 * b[i], std::abs(g[i]));
                    p[i] -= (learning_rate / bias_fix) * a[i] / (b[i] + kAdamaxEps);
                }
                break;
            }
        }
    }
}

}  // namespace dc
