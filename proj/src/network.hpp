// Feed-forward network definition, initialization, forward pass,
// input-space gradients and penultimate-layer Jacobians.
//
// A network is a chain of dense layers followed by an implicit softmax
// head. The "penultimate output" O is the activated output of the last
// dense layer, i.e. the softmax input. The default shape for layer_count L
// is d -> width -> ... -> width -> C with L dense layers in total; hidden
// layers use the configured activation, the final layer is linear.
//
// Trained networks are immutable; forward/jacobian/gradient calls are safe
// from any number of threads concurrently.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "matrix.hpp"

namespace dc {

enum class Activation { relu, tanh, linear };
enum class OptimizerKind { sgd, adamax, adadelta, adagrad };
enum class WeightInit { random_uniform, random_normal };
enum class BiasInit { zeros, ones, constant, random_normal };

std::string to_string(Activation a);
std::string to_string(OptimizerKind k);
std::string to_string(WeightInit w);
std::string to_string(BiasInit b);
Activation activation_from_string(const std::string& s);
OptimizerKind optimizer_from_string(const std::string& s);
WeightInit weight_init_from_string(const std::string& s);
BiasInit bias_init_from_string(const std::string& s);

// Learning-rate defaults, by optimizer: 0.01 for sgd/adagrad, 0.002 for
// adamax, 1.0 for adadelta.
double default_learning_rate(OptimizerKind kind);

struct InitSpec {
    WeightInit weight_init = WeightInit::random_uniform;
    BiasInit bias_init = BiasInit::zeros;
    double constant_value = 0.1;  // used only when bias_init == constant
};

struct ModelConfig {
    std::string name = "model";
    std::size_t hidden_width = 200;
    Activation activation = Activation::relu;
    OptimizerKind optimizer = OptimizerKind::sgd;
    InitSpec init;
    std::size_t layer_count = 3;  // total dense layers, final one included
    std::uint64_t seed = 1;
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double learning_rate = 0.01;
};

struct LayerSpec {
    std::size_t in_dim = 1;
    std::size_t out_dim = 1;
    Activation activation = Activation::linear;
};

struct Layer {
    Matrix weights;  // out_dim x in_dim
    Vector biases;   // out_dim
    Activation activation = Activation::linear;

    std::size_t in_dim() const { return weights.cols; }
    std::size_t out_dim() const { return weights.rows; }
};

struct DenseNetwork {
    std::vector<Layer> layers;
    std::size_t input_dim = 0;
    std::size_t class_count = 0;
    ModelConfig config;
};

struct ForwardTrace {
    std::vector<Vector> pre_activations;  // one per layer
    std::vector<Vector> activations;      // one per layer
    Vector penultimate;                   // activations of the last dense layer
    Vector probabilities;                 // softmax(penultimate)
};

// Weights are drawn per InitSpec from the config seed: random_uniform is
// U(-s, s) with s = sqrt(6/(in+out)), random_normal is N(0, 2/(in+out))
// (variance). Bias random_normal uses stddev 0.05.
DenseNetwork init_network(const ModelConfig& config, std::size_t input_dim,
                          std::size_t class_count);

ForwardTrace forward(const DenseNetwork& net, const Vector& x);

Vector softmax(const Vector& logits);

// Cross-entropy of `label` under the penultimate outputs, via log-sum-exp.
double cross_entropy(const Vector& penultimate, std::size_t label);

// Gradient of the cross-entropy loss w.r.t. the input, by backpropagation.
Vector loss_grad_input(const DenseNetwork& net, const Vector& x, std::size_t label);

// J with J[i][j] = dO_i/dx_j, one backward pass per output row; O is the
// pre-softmax penultimate output.
Matrix penultimate_jacobian(const DenseNetwork& net, const Vector& x);

// Per-layer parameter gradients, shaped like the layer tensors.
struct LayerGrads {
    Matrix weights;
    Vector biases;
};

// Backpropagation from d(loss)/d(final activation) = `grad_out`; fills
// `grads` (accumulating) and returns d(loss)/d(input).
Vector backprop(const DenseNetwork& net, const Vector& x, const ForwardTrace& trace,
                const Vector& grad_out, std::vector<LayerGrads>* grads);

}  // namespace dc
