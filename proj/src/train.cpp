#include "train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "optimizer.hpp"
#include "rng.hpp"

namespace dc {

TrainResult train(DenseNetwork net, const Dataset& data, const ModelConfig& config) {
    if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
    if (data.input_dim() != net.input_dim) {
        throw std::invalid_argument("train: dataset has " + std::to_string(data.input_dim()) +
                                    " features, network expects " +
                                    std::to_string(net.input_dim));
    }
    for (std::size_t l : data.labels) {
        if (l >= net.class_count) {
            throw std::invalid_argument("train: label " + std::to_string(l) +
                                        " out of range for " +
                                        std::to_string(net.class_count) + " classes");
        }
    }
    if (config.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");

    std::vector<std::size_t> tensor_sizes;
    std::vector<LayerGrads> grads;
    for (const Layer& layer : net.layers) {
        tensor_sizes.push_back(layer.weights.data.size());
        tensor_sizes.push_back(layer.biases.size());
        grads.push_back(LayerGrads{Matrix(layer.out_dim(), layer.in_dim(), 0.0),
                                   Vector(layer.out_dim(), 0.0)});
    }
    OptimizerState state = make_optimizer_state(config.optimizer, tensor_sizes);

    Rng rng(derive_seed(config.seed, 1));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    result.history.reserve(config.epochs);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t correct = 0;

        for (std::size_t start = 0; start < data.size(); start += config.batch_size) {
            const std::size_t end = std::min(start + config.batch_size, data.size());
            const double inv = 1.0 / static_cast<double>(end - start);

            for (auto& lg : grads) {
                std::fill(lg.weights.data.begin(), lg.weights.data.end(), 0.0);
                std::fill(lg.biases.begin(), lg.biases.end(), 0.0);
            }

            for (std::size_t r = start; r < end; ++r) {
                const std::size_t idx = order[r];
                const Vector x = data.sample(idx);
                const std::size_t label = data.labels[idx];
                ForwardTrace trace = forward(net, x);
                epoch_loss += cross_entropy(trace.penultimate, label);
                const std::size_t pred =
                    std::max_element(trace.probabilities.begin(), trace.probabilities.end()) -
                    trace.probabilities.begin();
                correct += (pred == label);
                Vector g = trace.probabilities;
                g[label] -= 1.0;
                backprop(net, x, trace, g, &grads);
            }

            std::vector<std::span<double>> params;
            std::vector<std::span<const double>> gspans;
            for (std::size_t l = 0; l < net.layers.size(); ++l) {
                for (double& v : grads[l].weights.data) v *= inv;
                for (double& v : grads[l].biases) v *= inv;
                params.emplace_back(net.layers[l].weights.data);
                params.emplace_back(net.layers[l].biases);
                gspans.emplace_back(grads[l].weights.data);
                gspans.emplace_back(grads[l].biases);
            }
            optimizer_step(state, params, gspans, config.learning_rate);
        }

        EpochStats stats;
        stats.loss = epoch_loss / static_cast<double>(data.size());
        stats.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
        if (!std::isfinite(stats.loss)) {
            throw std::runtime_error("train: diverged (non-finite loss) at epoch " +
                                     std::to_string(epoch + 1));
        }
        result.history.push_back(stats);
    }

    result.net = std::move(net);
    return result;
}

}  // namespace dc
