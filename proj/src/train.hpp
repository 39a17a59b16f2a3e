// Mini-batch training loop over a DenseNetwork.
#pragma once

#include "dataset.hpp"
#include "network.hpp"

namespace dc {

struct EpochStats {
    double loss = 0.0;      // mean cross-entropy over the epoch
    double accuracy = 0.0;  // training accuracy measured on the fly
};

struct TrainResult {
    DenseNetwork net;
    std::vector<EpochStats> history;  // length = epochs
};

// Trains a copy of `net` on `data` for config.epochs epochs of mini-batches
// of config.batch_size, shuffled per epoch from config.seed. Throws if the
// dataset is empty, a label is out of range, or the loss stops being finite
// ("diverged", naming the epoch). Identical (net, data, config) inputs give
// bitwise-identical parameters.
TrainResult train(DenseNetwork net, const Dataset& data, const ModelConfig& config);

}  // namespace dc
