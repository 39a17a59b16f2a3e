#include "network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rng.hpp"

namespace dc {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::linear: return "linear";
    }
    return "?";
}

std::string to_string(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::sgd: return "sgd";
        case OptimizerKind::adamax: return "adamax";
        case OptimizerKind::adadelta: return "adadelta";
        case OptimizerKind::adagrad: return "adagrad";
    }
    return "?";
}

std::string to_string(WeightInit w) {
    return w == WeightInit::random_uniform ? "random_uniform" : "random_normal";
}

std::string to_string(BiasInit b) {
    switch (b) {
        case BiasInit::zeros: return "zeros";
        case BiasInit::ones: return "ones";
        case BiasInit::constant: return "constant";
        case BiasInit::random_normal: return "random_normal";
    }
    return "?";
}

namespace {
[[noreturn]] void bad_enum(const char* what, const std::string& s) {
    throw std::invalid_argument(std::string("unknown ") + what + ": '" + s + "'");
}
}  // namespace

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    if (s == "linear") return Activation::linear;
    bad_enum("activation", s);
}

OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adamax") return OptimizerKind::adamax;
    if (s == "adadelta") return OptimizerKind::adadelta;
    if (s == "adagrad") return OptimizerKind::adagrad;
    bad_enum("optimizer", s);
}

WeightInit weight_init_from_string(const std::string& s) {
    if (s == "random_uniform") return WeightInit::random_uniform;
    if (s == "random_normal") return WeightInit::random_normal;
    bad_enum("weight_init", s);
}

BiasInit bias_init_from_string(const std::string& s) {
    if (s == "zeros") return BiasInit::zeros;
    if (s == "ones") return BiasInit::ones;
    if (s == "constant") return BiasInit::constant;
    if (s == "random_normal") return BiasInit::random_normal;
    bad_enum("bias_init", s);
}

double default_learning_rate(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::sgd:
        case OptimizerKind::adagrad: return 0.01;
        case OptimizerKind::adamax: return 0.002;
        case OptimizerKind::adadelta: return 1.0;
    }
    return 0.01;
}

namespace {

double activate(Activation a, double x) {
    switch (a) {
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::tanh: return std::tanh(x);
        case Activation::linear: return x;
    }
    return x;
}

// Derivative expressed through the pre-activation value.
double activate_grad(Activation a, double pre) {
    switch (a) {
        case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::tanh: {
            const double t = std::tanh(pre);
            return 1.0 - t * t;
        }
        case Activation::linear: return 1.0;
    }
    return 1.0;
}

}  // namespace

DenseNetwork init_network(const ModelConfig& config, std::size_t input_dim,
                          std::size_t class_count) {
    if (input_dim < 1 || class_count < 1) {
        throw std::invalid_argument("init_network: dims must be >= 1");
    }
    if (config.layer_count < 1) {
        throw std::invalid_argument("init_network: layer_count must be >= 1");
    }
    if (config.hidden_width < 1) {
        throw std::invalid_argument("init_network: hidden_width must be >= 1");
    }

    DenseNetwork net;
    net.input_dim = input_dim;
    net.class_count = class_count;
    net.config = config;

    Rng rng(derive_seed(config.seed, 0));

    std::size_t in = input_dim;
    for (std::size_t l = 0; l < config.layer_count; ++l) {
        const bool last = (l + 1 == config.layer_count);
        const std::size_t out = last ? class_count : config.hidden_width;

        Layer layer;
        layer.activation = last ? Activation::linear : config.activation;
        layer.weights = Matrix(out, in);
        const double fan = static_cast<double>(in + out);
        if (config.init.weight_init == WeightInit::random_uniform) {
            const double s = std::sqrt(6.0 / fan);
            for (auto& w : layer.weights.data) w = rng.uniform(-s, s);
        } else {
            const double stddev = std::sqrt(2.0 / fan);
            for (auto& w : layer.weights.data) w = rng.normal(0.0, stddev);
        }

        layer.biases.assign(out, 0.0);
        switch (config.init.bias_init) {
            case BiasInit::zeros: break;
            case BiasInit::ones: layer.biases.assign(out, 1.0); break;
            case BiasInit::constant:
                layer.biases.assign(out, config.init.constant_value);
                break;
            case BiasInit::random_normal:
                for (auto& b : layer.biases) b = rng.normal(0.0, 0.05);
                break;
        }

        net.layers.push_back(std::move(layer));
        in = out;
    }
    return net;
}

Vector softmax(const Vector& logits) {
    Vector p(logits.size());
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

double cross_entropy(const Vector& penultimate, std::size_t label) {
    if (label >= penultimate.size()) {
        throw std::invalid_argument("cross_entropy: label " + std::to_string(label) +
                                    " out of range for " + std::to_string(penultimate.size()) +
                                    " classes");
    }
    const double mx = *std::max_element(penultimate.begin(), penultimate.end());
    double sum = 0.0;
    for (double o : penultimate) sum += std::exp(o - mx);
    return mx + std::log(sum) - penultimate[label];
}

ForwardTrace forward(const DenseNetwork& net, const Vector& x) {
    if (x.size() != net.input_dim) {
        throw std::invalid_argument("forward: input length " + std::to_string(x.size()) +
                                    " does not match input_dim " +
                                    std::to_string(net.input_dim));
    }
    ForwardTrace trace;
    trace.pre_activations.reserve(net.layers.size());
    trace.activations.reserve(net.layers.size());

    const Vector* a = &x;
    for (const Layer& layer : net.layers) {
        Vector pre(layer.out_dim());
        for (std::size_t i = 0; i < layer.out_dim(); ++i) {
            const double* wrow = layer.weights.row_ptr(i);
            double acc = layer.biases[i];
            for (std::size_t j = 0; j < layer.in_dim(); ++j) acc += wrow[j] * (*a)[j];
            pre[i] = acc;
        }
        Vector act(pre.size());
        for (std::size_t i = 0; i < pre.size(); ++i) act[i] = activate(layer.activation, pre[i]);
        trace.pre_activations.push_back(std::move(pre));
        trace.activations.push_back(std::move(act));
        a = &trace.activations.back();
    }
    trace.penultimate = trace.activations.back();
    trace.probabilities = softmax(trace.penultimate);
    return trace;
}

Vector backprop(const DenseNetwork& net, const Vector& x, const ForwardTrace& trace,
                const Vector& grad_out, std::vector<LayerGrads>* grads) {
    const std::size_t L = net.layers.size();
    if (grad_out.size() != net.layers.back().out_dim()) {
        throw std::invalid_argument("backprop: grad_out length mismatch");
    }
    Vector g = grad_out;  // gradient w.r.t. the current layer's activation
    for (std::size_t l = L; l-- > 0;) {
        const Layer& layer = net.layers[l];
        // through the activation
        Vector delta(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            delta[i] = g[i] * activate_grad(layer.activation, trace.pre_activations[l][i]);
        }
        const Vector& input = (l == 0) ? x : trace.activations[l - 1];
        if (grads) {
            LayerGrads& lg = (*grads)[l];
            for (std::size_t i = 0; i < layer.out_dim(); ++i) {
                const double d = delta[i];
                if (d == 0.0) continue;
                double* grow = lg.weights.row_ptr(i);
                for (std::size_t j = 0; j < layer.in_dim(); ++j) grow[j] += d * input[j];
                lg.biases[i] += d;
            }
        }
        // gradient w.r.t. the layer input, accumulated row-wise
        Vector gin(layer.in_dim(), 0.0);
        for (std::size_t i = 0; i < layer.out_dim(); ++i) {
            const double d = delta[i];
            if (d == 0.0) continue;
            const double* wrow = layer.weights.row_ptr(i);
            for (std::size_t j = 0; j < layer.in_dim(); ++j) gin[j] += d * wrow[j];
        }
        g = std::move(gin);
    }
    return g;
}

Vector loss_grad_input(const DenseNetwork& net, const Vector& x, std::size_t label) {
    if (label >= net.class_count) {
        throw std::invalid_argument("loss_grad_input: label " + std::to_string(label) +
                                    " out of range for " + std::to_string(net.class_count) +
                                    " classes");
    }
    ForwardTrace trace = forward(net, x);
    Vector g = trace.probabilities;
    g[label] -= 1.0;
    return backprop(net, x, trace, g, nullptr);
}

Matrix penultimate_jacobian(const DenseNetwork& net, const Vector& x) {
    ForwardTrace trace = forward(net, x);
    Matrix jac(net.class_count, net.input_dim);
    Vector seed(net.class_count, 0.0);
    for (std::size_t i = 0; i < net.class_count; ++i) {
        seed[i] = 1.0;
        Vector row = backprop(net, x, trace, seed, nullptr);
        std::copy(row.begin(), row.end(), jac.row_ptr(i));
        seed[i] = 0.0;
    }
    return jac;
}

}  // namespace dc
