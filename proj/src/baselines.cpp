#include "baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rng.hpp"

namespace dc {

namespace {

void require_binary(const Dataset& data, const char* who) {
    if (data.size() == 0) throw std::invalid_argument(std::string(who) + ": empty dataset");
    for (std::size_t l : data.labels) {
        if (l > 1) {
            throw std::invalid_argument(std::string(who) + ": labels must be binary (0/1)");
        }
    }
}

}  // namespace

double LinearModel::decision(const Vector& x) const {
    return dot(weights, x) + bias;
}

double LinearModel::score(const Vector& x) const {
    return 1.0 / (1.0 + std::exp(-decision(x)));
}

LinearModel train_logistic(const Dataset& data, double learning_rate, std::size_t epochs,
                           std::uint64_t seed, std::size_t batch_size) {
    require_binary(data, "train_logistic");
    if (batch_size < 1) throw std::invalid_argument("train_logistic: batch_size must be >= 1");

    LinearModel model;
    model.kind = LinearKind::logistic;
    model.weights.assign(data.input_dim(), 0.0);

    Rng rng(derive_seed(seed, 1));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    Vector gw(data.input_dim());
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < data.size(); start += batch_size) {
            const std::size_t end = std::min(start + batch_size, data.size());
            std::fill(gw.begin(), gw.end(), 0.0);
            double gb = 0.0;
            for (std::size_t r = start; r < end; ++r) {
                const std::size_t idx = order[r];
                const double* row = data.features.row_ptr(idx);
                double margin = model.bias;
                for (std::size_t j = 0; j < gw.size(); ++j) margin += model.weights[j] * row[j];
                const double p = 1.0 / (1.0 + std::exp(-margin));
                const double err = p - static_cast<double>(data.labels[idx]);
                for (std::size_t j = 0; j < gw.size(); ++j) gw[j] += err * row[j];
                gb += err;
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            for (std::size_t j = 0; j < gw.size(); ++j)
                model.weights[j] -= learning_rate * gw[j] * inv;
            model.bias -= learning_rate * gb * inv;
        }
    }
    return model;
}

LinearModel train_linear_svm(const Dataset& data, double C, double learning_rate,
                             std::size_t epochs, std::uint64_t seed,
                             std::size_t batch_size) {
    require_binary(data, "train_linear_svm");
    if (C < 0.0) throw std::invalid_argument("train_linear_svm: C must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("train_linear_svm: batch_size must be >= 1");

    LinearModel model;
    model.kind = LinearKind::linear_svm;
    model.weights.assign(data.input_dim(), 0.0);

    Rng rng(derive_seed(seed, 1));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    Vector gw(data.input_dim());
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < data.size(); start += batch_size) {
            const std::size_t end = std::min(start + batch_size, data.size());
            std::fill(gw.begin(), gw.end(), 0.0);
            double gb = 0.0;
            for (std::size_t r = start; r < end; ++r) {
                const std::size_t idx = order[r];
                const double* row = data.features.row_ptr(idx);
                const double y = data.labels[idx] == 1 ? 1.0 : -1.0;
                double margin = model.bias;
                for (std::size_t j = 0; j < gw.size(); ++j) margin += model.weights[j] * row[j];
                if (y * margin < 1.0) {
                    for (std::size_t j = 0; j < gw.size(); ++j) gw[j] -= y * row[j];
                    gb -= y;
                }
            }
            const double inv = C / static_cast<double>(end - start);
            // regularizer subgradient (not applied to the bias)
            for (std::size_t j = 0; j < gw.size(); ++j)
                model.weights[j] -= learning_rate * (model.weights[j] + gw[j] * inv);
            model.bias -= learning_rate * gb * inv;
        }
    }
    return model;
}

FeatureRanking linear_feature_ranking(const LinearModel& model,
                                      const std::vector<std::string>& feature_names) {
    return feature_ranking(model.weights, feature_names);
}

}  // namespace dc
