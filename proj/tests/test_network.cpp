// Unit tests for network init, forward, gradients, Jacobians, optimizers,
// the training loop, and model persistence.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "dataset.hpp"
#include "matrix.hpp"
#include "model_io.hpp"
#include "network.hpp"
#include "optimizer.hpp"
#include "rng.hpp"
#include "train.hpp"
#include "csv.hpp"

using namespace dc;

namespace {

// Central finite differences over the penultimate outputs; column j of the
// Jacobian from O(x +- h e_j).
Matrix fd_jacobian(const DenseNetwork& net, const Vector& x, double h) {
    Matrix jac(net.class_count, net.input_dim);
    for (std::size_t j = 0; j < x.size(); ++j) {
        Vector xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        Vector op = forward(net, xp).penultimate;
        Vector om = forward(net, xm).penultimate;
        for (std::size_t i = 0; i < net.class_count; ++i)
            jac(i, j) = (op[i] - om[i]) / (2.0 * h);
    }
    return jac;
}

Vector fd_loss_grad(const DenseNetwork& net, const Vector& x, std::size_t label, double h) {
    Vector g(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        Vector xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        double lp = cross_entropy(forward(net, xp).penultimate, label);
        double lm = cross_entropy(forward(net, xm).penultimate, label);
        g[j] = (lp - lm) / (2.0 * h);
    }
    return g;
}

// Relative error with a floor so near-zero reference entries are compared
// absolutely at floor * tolerance.
double max_rel_err(const Matrix& got, const Matrix& want, double floor = 1e-3) {
    double worst = 0.0;
    for (std::size_t i = 0; i < got.data.size(); ++i) {
        double err = std::abs(got.data[i] - want.data[i]) /
                     std::max(std::abs(want.data[i]), floor);
        worst = std::max(worst, err);
    }
    return worst;
}

DenseNetwork random_small_net(Activation act, std::size_t d, std::size_t h, std::size_t c,
                              std::uint64_t seed) {
    ModelConfig cfg;
    cfg.hidden_width = h;
    cfg.activation = act;
    cfg.seed = seed;
    cfg.layer_count = 3;
    return init_network(cfg, d, c);
}

Vector random_input(std::size_t d, Rng& rng) {
    Vector x(d);
    for (auto& v : x) v = rng.uniform01();
    return x;
}

DenseNetwork hand_linear_net() {
    // single linear layer: penultimate = W x + b
    DenseNetwork net;
    net.input_dim = 2;
    net.class_count = 2;
    Layer l;
    l.activation = Activation::linear;
    l.weights = Matrix(2, 2);
    l.weights(0, 0) = 0.7; l.weights(0, 1) = -1.2;
    l.weights(1, 0) = 0.4; l.weights(1, 1) = 2.0;
    l.biases = {0.1, -0.3};
    net.layers.push_back(l);
    net.config.layer_count = 1;
    return net;
}

}  // namespace

TEST_CASE("init_network produces Table-1 style shapes") {
    ModelConfig cfg;  // model 1: 200 neurons, relu, sgd, zeros bias, uniform weights
    cfg.hidden_width = 200;
    cfg.activation = Activation::relu;
    cfg.optimizer = OptimizerKind::sgd;
    cfg.init = {WeightInit::random_uniform, BiasInit::zeros};
    cfg.seed = 3;
    DenseNetwork net = init_network(cfg, 20, 2);
    REQUIRE(net.layers.size() == 3);
    CHECK(net.layers[0].weights.rows == 200);
    CHECK(net.layers[0].weights.cols == 20);
    CHECK(net.layers[1].weights.rows == 200);
    CHECK(net.layers[1].weights.cols == 200);
    CHECK(net.layers[2].weights.rows == 2);
    CHECK(net.layers[2].weights.cols == 200);
    CHECK(net.layers[0].activation == Activation::relu);
    CHECK(net.layers[2].activation == Activation::linear);

    // uniform init bound s = sqrt(6/(in+out))
    double s0 = std::sqrt(6.0 / (20 + 200));
    for (double w : net.layers[0].weights.data) {
        CHECK(std::abs(w) <= s0);
    }
    for (double b : net.layers[0].biases) CHECK(b == 0.0);

    // determinism: same config + seed twice is bitwise identical
    DenseNetwork net2 = init_network(cfg, 20, 2);
    for (std::size_t l = 0; l < 3; ++l) {
        CHECK(net.layers[l].weights.data == net2.layers[l].weights.data);
        CHECK(net.layers[l].biases == net2.layers[l].biases);
    }

    cfg.init.bias_init = BiasInit::ones;
    DenseNetwork net3 = init_network(cfg, 20, 2);
    for (const auto& layer : net3.layers)
        for (double b : layer.biases) CHECK(b == 1.0);
}

TEST_CASE("forward on an identity linear layer") {
    DenseNetwork net;
    net.input_dim = 2;
    net.class_count = 2;
    Layer l;
    l.activation = Activation::linear;
    l.weights = Matrix::identity(2);
    l.biases = {0.0, 0.0};
    net.layers.push_back(l);

    ForwardTrace t = forward(net, {0.2, 0.8});
    CHECK(t.penultimate[0] == doctest::Approx(0.2));
    CHECK(t.penultimate[1] == doctest::Approx(0.8));
    CHECK(t.probabilities[0] + t.probabilities[1] == doctest::Approx(1.0).epsilon(1e-9));

    CHECK_THROWS_AS(forward(net, {0.1, 0.2, 0.3}), std::invalid_argument);
}

TEST_CASE("forward matches a pencil-and-paper relu computation") {
    DenseNetwork net;
    net.input_dim = 2;
    net.class_count = 2;
    Layer l1;
    l1.activation = Activation::relu;
    l1.weights = Matrix(2, 2);
    l1.weights(0, 0) = 1.0; l1.weights(0, 1) = -2.0;
    l1.weights(1, 0) = 0.5; l1.weights(1, 1) = 1.0;
    l1.biases = {0.5, -0.25};
    Layer l2;
    l2.activation = Activation::linear;
    l2.weights = Matrix(2, 2);
    l2.weights(0, 0) = 1.0; l2.weights(0, 1) = 1.0;
    l2.weights(1, 0) = 2.0; l2.weights(1, 1) = -1.0;
    l2.biases = {0.0, 0.5};
    net.layers = {l1, l2};

    // pre1 = [0.5, 0.75], relu keeps both; penultimate = [1.25, 0.75]
    ForwardTrace t = forward(net, {1.0, 0.5});
    CHECK(t.penultimate[0] == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(t.penultimate[1] == doctest::Approx(0.75).epsilon(1e-12));
    double p0 = 1.0 / (1.0 + std::exp(-0.5));
    CHECK(t.probabilities[0] == doctest::Approx(p0).epsilon(1e-12));
}

TEST_CASE("softmax properties") {
    Rng rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        Vector o(2 + rng.bounded(6));
        for (auto& v : o) v = rng.uniform(-30.0, 30.0);
        Vector p = softmax(o);
        double sum = 0.0;
        for (double v : p) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

        double shift = rng.uniform(-50.0, 50.0);
        Vector o2(o);
        for (auto& v : o2) v += shift;
        Vector p2 = softmax(o2);
        for (std::size_t i = 0; i < p.size(); ++i)
            CHECK(p2[i] == doctest::Approx(p[i]).epsilon(1e-9));
    }
}

TEST_CASE("loss_grad_input closed form on a linear softmax model") {
    DenseNetwork net = hand_linear_net();
    Vector x{0.3, 0.6};
    std::size_t label = 1;

    ForwardTrace t = forward(net, x);
    // gradient = W^T (p - onehot)
    Vector diff = t.probabilities;
    diff[label] -= 1.0;
    Vector want(2, 0.0);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) want[j] += net.layers[0].weights(i, j) * diff[i];

    Vector got = loss_grad_input(net, x, label);
    CHECK(got[0] == doctest::Approx(want[0]).epsilon(1e-12));
    CHECK(got[1] == doctest::Approx(want[1]).epsilon(1e-12));

    CHECK_THROWS_AS(loss_grad_input(net, x, 5), std::invalid_argument);
}

TEST_CASE("loss_grad_input agrees with central differences") {
    Rng rng(8);
    for (auto act : {Activation::tanh, Activation::relu}) {
        DenseNetwork net = random_small_net(act, 5, 7, 3, 41);
        Vector x = random_input(5, rng);
        Vector got = loss_grad_input(net, x, 2);
        Vector want = fd_loss_grad(net, x, 2, 1e-4);
        for (std::size_t j = 0; j < got.size(); ++j) {
            CHECK(std::abs(got[j] - want[j]) / std::max(std::abs(want[j]), 1e-3) < 1e-4);
        }
    }
}

TEST_CASE("loss gradient vanishes deep inside the label region") {
    // A linear model with a large margin puts p ~ onehot, so the input
    // gradient of the loss is ~0 at this (near-)minimum.
    DenseNetwork net;
    net.input_dim = 2;
    net.class_count = 2;
    Layer l;
    l.activation = Activation::linear;
    l.weights = Matrix(2, 2);
    l.weights(0, 0) = -10.0; l.weights(0, 1) = 0.0;
    l.weights(1, 0) = 10.0; l.weights(1, 1) = 0.0;
    l.biases = {0.0, 0.0};
    net.layers.push_back(l);

    Vector g = loss_grad_input(net, {5.0, 0.3}, 1);
    CHECK(norm_inf(g) < 1e-6);
}

TEST_CASE("penultimate_jacobian of a purely linear network is the weight product") {
    Rng rng(12);
    ModelConfig cfg;
    cfg.hidden_width = 6;
    cfg.activation = Activation::linear;
    cfg.seed = 77;
    DenseNetwork net = init_network(cfg, 4, 3);
    Vector x = random_input(4, rng);

    Matrix want = matmul(net.layers[2].weights,
                         matmul(net.layers[1].weights, net.layers[0].weights));
    Matrix got = penultimate_jacobian(net, x);
    REQUIRE(got.rows == want.rows);
    REQUIRE(got.cols == want.cols);
    for (std::size_t i = 0; i < got.data.size(); ++i)
        CHECK(std::abs(got.data[i] - want.data[i]) < 1e-10);
}

TEST_CASE("penultimate_jacobian matches finite differences for every activation") {
    Rng rng(99);
    int done = 0;
    for (auto act : {Activation::tanh, Activation::relu, Activation::linear}) {
        for (int trial = 0; trial < 100; ++trial) {
            DenseNetwork net = random_small_net(act, 4, 6, 2, 1000 + trial);
            Vector x = random_input(4, rng);
            if (act == Activation::relu) {
                // resample points too close to a relu kink
                bool ok = false;
                for (int attempt = 0; attempt < 50 && !ok; ++attempt) {
                    ForwardTrace t = forward(net, x);
                    ok = true;
                    for (std::size_t l = 0; l + 1 < t.pre_activations.size() && ok; ++l)
                        for (double pre : t.pre_activations[l])
                            if (std::abs(pre) < 1e-3) { ok = false; break; }
                    if (!ok) x = random_input(4, rng);
                }
                if (!ok) continue;
            }
            Matrix got = penultimate_jacobian(net, x);
            Matrix want = fd_jacobian(net, x, 1e-4);
            CHECK(max_rel_err(got, want) < 1e-4);
            ++done;
        }
    }
    CHECK(done >= 295);
}

TEST_CASE("relu Jacobian is locally constant inside its activation cell") {
    Rng rng(55);
    DenseNetwork net = random_small_net(Activation::relu, 4, 8, 2, 777);
    Vector x = random_input(4, rng);
    ForwardTrace t = forward(net, x);

    // margin: no pre-activation can flip while the input moves less than
    // min |pre| / prod of max-abs-row-sum operator norms
    double margin = std::numeric_limits<double>::infinity();
    double lip = 1.0;
    for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) {
        const Layer& layer = net.layers[l];
        double row_norm = 0.0;
        for (std::size_t i = 0; i < layer.out_dim(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < layer.in_dim(); ++j)
                s += std::abs(layer.weights(i, j));
            row_norm = std::max(row_norm, s);
        }
        lip *= row_norm;
        for (double pre : t.pre_activations[l])
            margin = std::min(margin, std::abs(pre) / lip);
    }
    REQUIRE(margin > 0.0);

    Matrix j0 = penultimate_jacobian(net, x);
    for (int trial = 0; trial < 10; ++trial) {
        Vector dx(4);
        for (auto& v : dx) v = rng.uniform(-1.0, 1.0);
        double scale = 0.9 * margin / norm_inf(dx);
        Vector xp(x);
        for (std::size_t j = 0; j < 4; ++j) xp[j] += scale * dx[j];
        Matrix j1 = penultimate_jacobian(net, xp);
        for (std::size_t i = 0; i < j0.data.size(); ++i)
            CHECK(j1.data[i] == doctest::Approx(j0.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("first-order Taylor expansion of the penultimate outputs") {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        DenseNetwork net = random_small_net(Activation::tanh, 5, 9, 3, 500 + trial);
        Vector x = random_input(5, rng);
        Matrix jac = penultimate_jacobian(net, x);
        Vector o0 = forward(net, x).penultimate;
        Vector u(5);
        for (auto& v : u) v = rng.normal();
        double n = norm2(u);
        for (auto& v : u) v /= n;

        auto ratio = [&](double h) {
            Vector xp(x);
            for (std::size_t j = 0; j < 5; ++j) xp[j] += h * u[j];
            Vector o1 = forward(net, xp).penultimate;
            Vector lin = matvec(jac, u);
            double err = 0.0;
            for (std::size_t i = 0; i < o1.size(); ++i) {
                double e = o1[i] - o0[i] - h * lin[i];
                err += e * e;
            }
            return std::sqrt(err) / h;
        };
        double r2 = ratio(1e-2);
        double r3 = ratio(1e-3);
        CHECK(r3 <= 10.0 * r2);         // as stated
        CHECK(r3 <= 0.3 * r2 + 1e-12);  // and genuinely first-order
    }
}

TEST_CASE("optimizer closed forms") {
    auto run_step = [](OptimizerKind kind, Vector p, const Vector& g, double lr,
                       int steps = 1) {
        OptimizerState st = make_optimizer_state(kind, {p.size()});
        for (int s = 0; s < steps; ++s) {
            std::vector<std::span<double>> ps{std::span<double>(p)};
            std::vector<std::span<const double>> gs{std::span<const double>(g)};
            optimizer_step(st, ps, gs, lr);
        }
        return p;
    };

    Vector p{1.0, -2.0, 0.5};
    Vector g{0.3, -0.1, 2.0};

    SUBCASE("sgd is exactly p - lr g") {
        Vector got = run_step(OptimizerKind::sgd, p, g, 0.1);
        for (std::size_t i = 0; i < p.size(); ++i)
            CHECK(got[i] == p[i] - 0.1 * g[i]);
    }
    SUBCASE("adagrad first step") {
        Vector got = run_step(OptimizerKind::adagrad, p, g, 0.1);
        for (std::size_t i = 0; i < p.size(); ++i) {
            double want = p[i] - 0.1 * g[i] / (std::sqrt(g[i] * g[i]) + 1e-8);
            CHECK(got[i] == doctest::Approx(want).epsilon(1e-15));
        }
    }
    SUBCASE("adamax first step, hand-derived") {
        // t=1: m = 0.1 g, u = |g|, bias fix 0.1, so p' = p - lr g/(|g|+eps)
        Vector got = run_step(OptimizerKind::adamax, p, g, 0.002);
        for (std::size_t i = 0; i < p.size(); ++i) {
            double m = 0.1 * g[i];
            double u = std::abs(g[i]);
            double want = p[i] - (0.002 / 0.1) * m / (u + 1e-8);
            CHECK(got[i] == doctest::Approx(want).epsilon(1e-15));
        }
    }
    SUBCASE("adadelta first step, hand formula") {
        Vector got = run_step(OptimizerKind::adadelta, p, g, 1.0);
        for (std::size_t i = 0; i < p.size(); ++i) {
            double eg = 0.05 * g[i] * g[i];
            double dx = -std::sqrt(1e-6) / std::sqrt(eg + 1e-6) * g[i];
            CHECK(got[i] == doctest::Approx(p[i] + dx).epsilon(1e-15));
        }
    }
    SUBCASE("shape mismatch is rejected") {
        OptimizerState st = make_optimizer_state(OptimizerKind::sgd, {2});
        Vector pp{1.0, 2.0, 3.0};
        std::vector<std::span<double>> ps{std::span<double>(pp)};
        std::vector<std::span<const double>> gs{std::span<const double>(g)};
        CHECK_THROWS_AS(optimizer_step(st, ps, gs, 0.1), std::invalid_argument);
    }
}

TEST_CASE("training fits separable blobs with Table-1 configs") {
    SyntheticData syn = gen_synthetic(
        {.samples = 300, .input_dim = 8, .separation = 8.0, .noise = 1.0, .seed = 44});

    ModelConfig m1;
    m1.name = "model1";
    m1.hidden_width = 200;
    m1.activation = Activation::relu;
    m1.optimizer = OptimizerKind::sgd;
    m1.init = {WeightInit::random_uniform, BiasInit::zeros};
    m1.seed = 11;
    m1.epochs = 20;
    m1.learning_rate = 0.05;

    ModelConfig m2 = m1;
    m2.name = "model2";
    m2.activation = Activation::tanh;
    m2.optimizer = OptimizerKind::adamax;
    m2.init = {WeightInit::random_uniform, BiasInit::ones};
    m2.learning_rate = 0.002;

    for (const ModelConfig& cfg : {m1, m2}) {
        DenseNetwork net = init_network(cfg, syn.dataset.input_dim(), 2);
        TrainResult res = train(std::move(net), syn.dataset, cfg);
        REQUIRE(res.history.size() == cfg.epochs);
        for (const auto& s : res.history) CHECK(std::isfinite(s.loss));
        CHECK(res.history.back().accuracy >= 0.95);
    }
}

TEST_CASE("training is a no-op for zero epochs and deterministic otherwise") {
    SyntheticData syn = gen_synthetic({.samples = 60, .input_dim = 5, .seed = 2});
    ModelConfig cfg;
    cfg.hidden_width = 8;
    cfg.seed = 5;
    cfg.epochs = 0;
    DenseNetwork net = init_network(cfg, 5, 2);
    Vector w0 = net.layers[0].weights.data;
    TrainResult res = train(net, syn.dataset, cfg);
    CHECK(res.history.empty());
    CHECK(res.net.layers[0].weights.data == w0);

    cfg.epochs = 4;
    TrainResult a = train(init_network(cfg, 5, 2), syn.dataset, cfg);
    TrainResult b = train(init_network(cfg, 5, 2), syn.dataset, cfg);
    for (std::size_t l = 0; l < a.net.layers.size(); ++l) {
        CHECK(a.net.layers[l].weights.data == b.net.layers[l].weights.data);
        CHECK(a.net.layers[l].biases == b.net.layers[l].biases);
    }
}

TEST_CASE("divergent training reports the epoch") {
    SyntheticData syn = gen_synthetic({.samples = 60, .input_dim = 5, .seed = 2});
    ModelConfig cfg;
    cfg.hidden_width = 8;
    cfg.seed = 5;
    cfg.epochs = 10;
    cfg.learning_rate = 1e300;
    DenseNetwork net = init_network(cfg, 5, 2);
    CHECK_THROWS_WITH_AS(train(std::move(net), syn.dataset, cfg),
                         doctest::Contains("diverged (non-finite loss) at epoch 1"),
                         std::runtime_error);
}

TEST_CASE("model persistence round-trips bit-exactly") {
    SyntheticData syn = gen_synthetic({.samples = 50, .input_dim = 4, .seed = 13});
    NormalizationParams norm = fit_normalize(syn.dataset);

    ModelConfig cfg;
    cfg.name = "persist";
    cfg.hidden_width = 6;
    cfg.activation = Activation::tanh;
    cfg.optimizer = OptimizerKind::adamax;
    cfg.seed = 31;
    cfg.epochs = 2;
    cfg.learning_rate = 0.002;
    TrainResult res = train(init_network(cfg, 4, 2), syn.dataset, cfg);

    const std::string path = "test_model_roundtrip.json";
    save_model(path, res.net, norm);
    PersistedModel loaded = load_model(path);

    CHECK(loaded.net.input_dim == 4);
    CHECK(loaded.net.class_count == 2);
    CHECK(loaded.net.config.name == "persist");
    CHECK(loaded.net.config.optimizer == OptimizerKind::adamax);
    REQUIRE(loaded.net.layers.size() == res.net.layers.size());
    for (std::size_t l = 0; l < res.net.layers.size(); ++l) {
        CHECK(loaded.net.layers[l].weights.data == res.net.layers[l].weights.data);
        CHECK(loaded.net.layers[l].biases == res.net.layers[l].biases);
        CHECK(loaded.net.layers[l].activation == res.net.layers[l].activation);
    }
    CHECK(loaded.norm.min == norm.min);
    CHECK(loaded.norm.max == norm.max);

    // saving the loaded model reproduces the file byte-for-byte
    const std::string path2 = "test_model_roundtrip2.json";
    save_model(path2, loaded.net, loaded.norm);
    CHECK(read_file(path) == read_file(path2));

    std::remove(path.c_str());
    std::remove(path2.c_str());
}
