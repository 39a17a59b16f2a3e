// FGSM adversarial example generation and cross-model transfer evaluation.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "consensus.hpp"
#include "dataset.hpp"
#include "network.hpp"

namespace dc {

struct AdversarialBatch {
    Matrix originals;
    Matrix perturbed;
    std::vector<std::size_t> labels;
    double epsilon = 0.0;
    std::size_t source_model = 0;
};

// x' = clip(x + eps * sign(grad_x CE(model, x, label)), 0, 1); sign(0) = 0.
// Inputs live in the normalized cube, so the result stays within it and
// within eps of x in max-norm.
Vector fgsm(const DenseNetwork& model, const Vector& x, std::size_t label, double epsilon);

AdversarialBatch make_fgsm_batch(const DenseNetwork& model, std::size_t source_model,
                                 const Dataset& samples, double epsilon);

struct TransferReport {
    double epsilon = 0.0;
    std::size_t source_model = 0;
    double source_accuracy = 0.0;       // on the perturbed batch
    double source_accuracy_drop = 0.0;  // clean minus perturbed
    std::vector<double> per_model_accuracy;
    // consensus outcome counts; the three partition the batch
    std::size_t accepted_correct = 0;
    std::size_t accepted_wrong = 0;
    std::size_t rejected = 0;
};

TransferReport transfer_eval(const std::vector<const DenseNetwork*>& models,
                             const AdversarialBatch& batch, const ConsensusParams& params);

// CSV (label, orig_*, adv_*) plus a JSON sidecar with epsilon/source/seed.
void save_batch(const std::string& csv_path, const std::string& meta_path,
                const AdversarialBatch& batch, std::uint64_t seed);

}  // namespace dc
