#include "attacks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "csv.hpp"

namespace dc {

Vector fgsm(const DenseNetwork& model, const Vector& x, std::size_t label, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("fgsm: epsilon must be >= 0");
    Vector grad = loss_grad_input(model, x, label);
    Vector out(x);
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double s = grad[j] > 0.0 ? 1.0 : (grad[j] < 0.0 ? -1.0 : 0.0);
        out[j] = std::clamp(x[j] + epsilon * s, 0.0, 1.0);
    }
    return out;
}

AdversarialBatch make_fgsm_batch(const DenseNetwork& model, std::size_t source_model,
                                 const Dataset& samples, double epsilon) {
    AdversarialBatch batch;
    batch.epsilon = epsilon;
    batch.source_model = source_model;
    batch.labels = samples.labels;
    batch.originals = samples.features;
    batch.perturbed = Matrix(samples.size(), samples.input_dim());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        Vector adv = fgsm(model, samples.sample(i), samples.labels[i], epsilon);
        std::copy(adv.begin(), adv.end(), batch.perturbed.row_ptr(i));
    }
    return batch;
}

TransferReport transfer_eval(const std::vector<const DenseNetwork*>& models,
                             const AdversarialBatch& batch, const ConsensusParams& params) {
    if (batch.source_model >= models.size()) {
        throw std::invalid_argument("transfer_eval: source model index out of range");
    }
    const std::size_t n = batch.labels.size();
    if (n == 0) throw std::invalid_argument("transfer_eval: empty batch");

    TransferReport report;
    report.epsilon = batch.epsilon;
    report.source_model = batch.source_model;
    report.per_model_accuracy.assign(models.size(), 0.0);

    double source_clean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vector adv = batch.perturbed.row(i);
        const std::size_t label = batch.labels[i];

        ProbMatrix probs = ensemble_probs(models, adv);
        for (std::size_t m = 0; m < models.size(); ++m) {
            const double* row = probs.probs.row_ptr(m);
            const std::size_t pred =
                std::max_element(row, row + probs.classes()) - row;
            report.per_model_accuracy[m] += (pred == label);
        }

        ConsensusDecision d = consensus_classify(probs, params);
        if (!d.accepted) ++report.rejected;
        else if (d.class_index == label) ++report.accepted_correct;
        else ++report.accepted_wrong;

        Vector clean_probs = forward(*models[batch.source_model], batch.originals.row(i))
                                 .probabilities;
        const std::size_t clean_pred =
            std::max_element(clean_probs.begin(), clean_probs.end()) - clean_probs.begin();
        source_clean += (clean_pred == label);
    }

    for (double& acc : report.per_model_accuracy) acc /= static_cast<double>(n);
    report.source_accuracy = report.per_model_accuracy[batch.source_model];
    report.source_accuracy_drop = source_clean / static_cast<double>(n) - report.source_accuracy;
    return report;
}

void save_batch(const std::string& csv_path, const std::string& meta_path,
                const AdversarialBatch& batch, std::uint64_t seed) {
    const std::size_t d = batch.originals.cols;
    std::string out = "label";
    for (std::size_t j = 0; j < d; ++j) out += ",orig_" + std::to_string(j);
    for (std::size_t j = 0; j < d; ++j) out += ",adv_" + std::to_string(j);
    out += '\n';
    for (std::size_t i = 0; i < batch.labels.size(); ++i) {
        out += std::to_string(batch.labels[i]);
        for (std::size_t j = 0; j < d; ++j) out += ',' + format_double(batch.originals(i, j));
        for (std::size_t j = 0; j < d; ++j) out += ',' + format_double(batch.perturbed(i, j));
        out += '\n';
    }
    write_file_atomic(csv_path, out);

    std::string meta = "{\n  \"epsilon\": " + format_double(batch.epsilon) +
                       ",\n  \"source_model\": " + std::to_string(batch.source_model) +
                       ",\n  \"seed\": " + std::to_string(seed) +
                       ",\n  \"samples\": " + std::to_string(batch.labels.size()) + "\n}\n";
    write_file_atomic(meta_path, meta);
}

}  // namespace dc
