// Model persistence: a self-describing JSON document holding the config,
// normalization params, and all layer tensors as decimal reals with 17
// significant digits. Reals round-trip bit-exactly through save/load.
#pragma once

#include <string>

#include "dataset.hpp"
#include "network.hpp"

namespace dc {

struct PersistedModel {
    DenseNetwork net;
    NormalizationParams norm;  // may be empty when not fitted
};

void save_model(const std::string& path, const DenseNetwork& net,
                const NormalizationParams& norm);

PersistedModel load_model(const std::string& path);

}  // namespace dc
