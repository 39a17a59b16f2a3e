// Unit tests for diff vectors, greedy clustering, grouping, gated
// interpretation, and penultimate-output walks.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "interpret.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "train.hpp"

using namespace dc;

namespace {

std::vector<JacobianDiffVector> wrap(const std::vector<Vector>& vs) {
    std::vector<JacobianDiffVector> out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        JacobianDiffVector d;
        d.values = vs[i];
        d.sample_id = i;
        out.push_back(d);
    }
    return out;
}

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

}  // namespace

TEST_CASE("diff_vector closed form on a linear network") {
    DenseNetwork net;
    net.input_dim = 3;
    net.class_count = 2;
    Layer l;
    l.activation = Activation::linear;
    l.weights = Matrix(2, 3);
    double w0[3] = {0.2, -0.5, 1.0};
    double w1[3] = {-0.1, 0.8, 0.3};
    for (int j = 0; j < 3; ++j) {
        l.weights(0, j) = w0[j];
        l.weights(1, j) = w1[j];
    }
    l.biases = {0.0, 0.0};
    net.layers.push_back(l);

    JacobianDiffVector d = diff_vector(net, {0.3, 0.1, 0.9});
    CHECK(d.class_low == 0);
    CHECK(d.class_high == 1);
    for (int j = 0; j < 3; ++j)
        CHECK(d.values[j] == doctest::Approx(w1[j] - w0[j]).epsilon(1e-12));

    // duplicating the positive-class row zeroes the difference
    for (int j = 0; j < 3; ++j) net.layers[0].weights(0, j) = w1[j];
    JacobianDiffVector z = diff_vector(net, {0.3, 0.1, 0.9});
    for (int j = 0; j < 3; ++j) CHECK(z.values[j] == doctest::Approx(0.0));
}

TEST_CASE("diff_vector agrees with finite differences on a tanh net") {
    ModelConfig cfg;
    cfg.hidden_width = 7;
    cfg.activation = Activation::tanh;
    cfg.seed = 61;
    DenseNetwork net = init_network(cfg, 5, 2);
    Rng rng(4);
    Vector x(5);
    for (auto& v : x) v = rng.uniform01();

    Matrix jac = fd_jacobian(net, x, 1e-4);
    JacobianDiffVector d = diff_vector(net, x);
    for (std::size_t j = 0; j < 5; ++j) {
        double want = jac(1, j) - jac(0, j);
        CHECK(std::abs(d.values[j] - want) / std::max(std::abs(want), 1e-3) < 1e-4);
    }
}

TEST_CASE("greedy_cluster keeps perfectly correlated copies and drops the flip") {
    Vector v{1.0, 2.0, -0.5, 0.25};
    Vector nv(v);
    for (auto& x : nv) x = -x;
    auto clusters = greedy_cluster(wrap({v, v, v, nv}), 0.9, 2, 8);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].member_ids == std::vector<std::size_t>{0, 1, 2});
    for (std::size_t j = 0; j < v.size(); ++j)
        CHECK(clusters[0].mean[j] == doctest::Approx(v[j]));
    CHECK(clusters[0].corr_threshold_used == 0.9);
}

TEST_CASE("greedy_cluster returns empty when nothing correlates") {
    // near-orthogonal one-hot-ish profiles
    std::vector<Vector> vs;
    for (int i = 0; i < 4; ++i) {
        Vector v(8, 0.0);
        v[2 * i] = 1.0;
        v[2 * i + 1] = -1.0;
        vs.push_back(v);
    }
    CHECK(greedy_cluster(wrap(vs), 0.9, 2, 8).empty());
    CHECK_THROWS_AS(greedy_cluster(wrap(vs), 1.5, 2, 8), std::invalid_argument);
    CHECK_THROWS_AS(greedy_cluster(wrap(vs), 0.0, 2, 8), std::invalid_argument);
}

TEST_CASE("greedy_cluster recovers three planted prototypes") {
    const std::size_t dim = 30, per = 20;
    Rng rng(1234);

    // three prototype directions, re-drawn until pairwise corr < 0.2
    std::vector<Vector> protos;
    while (protos.size() < 3) {
        Vector p(dim);
        for (auto& x : p) x = rng.normal();
        bool ok = true;
        for (const auto& q : protos)
            if (std::abs(pearson_correlation(p, q)) >= 0.2) ok = false;
        if (ok) protos.push_back(p);
    }

    std::vector<Vector> vs;
    std::vector<std::size_t> planted;
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < per; ++i) {
            Vector v(protos[c]);
            for (auto& x : v) x += 0.05 * rng.normal();
            vs.push_back(v);
            planted.push_back(c);
        }
    }

    // construction oracle: exhaustive pairwise correlations
    for (std::size_t a = 0; a < vs.size(); ++a) {
        for (std::size_t b = a + 1; b < vs.size(); ++b) {
            double c = pearson_correlation(vs[a], vs[b]);
            if (planted[a] == planted[b]) {
                CHECK(c > 0.95);
            } else {
                CHECK(std::abs(c) < 0.5);
            }
        }
    }

    auto clusters = greedy_cluster(wrap(vs), 0.9, 5, 8);
    REQUIRE(clusters.size() == 3);
    std::set<std::size_t> all_members;
    for (const auto& cl : clusters) {
        std::set<std::size_t> planted_ids;
        for (std::size_t id : cl.member_ids) {
            planted_ids.insert(planted[id]);
            all_members.insert(id);
        }
        CHECK(planted_ids.size() == 1);  // no mixing
        CHECK(cl.member_ids.size() == per);
    }
    CHECK(all_members.size() == 3 * per);

    // admission-invariant replay: every member's min correlation to the
    // members added before it met the threshold
    for (const auto& cl : clusters) {
        for (std::size_t m = 1; m < cl.member_ids.size(); ++m) {
            double min_corr = 2.0;
            for (std::size_t p = 0; p < m; ++p) {
                min_corr = std::min(min_corr, pearson_correlation(vs[cl.member_ids[m]],
                                                                  vs[cl.member_ids[p]]));
            }
            CHECK(min_corr >= cl.corr_threshold_used);
        }
    }

    // determinism and termination
    auto again = greedy_cluster(wrap(vs), 0.9, 5, 8);
    REQUIRE(again.size() == clusters.size());
    std::size_t total = 0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        CHECK(again[c].member_ids == clusters[c].member_ids);
        total += clusters[c].member_ids.size();
    }
    CHECK(total <= vs.size());
}

TEST_CASE("greedy_cluster respects max_clusters and skips constant vectors") {
    Rng rng(5);
    std::vector<Vector> vs;
    for (int c = 0; c < 4; ++c) {
        Vector p(10);
        for (auto& x : p) x = rng.normal();
        for (int i = 0; i < 6; ++i) {
            Vector v(p);
            for (auto& x : v) x += 0.01 * rng.normal();
            vs.push_back(v);
        }
    }
    vs.push_back(Vector(10, 3.0));  // constant vector: correlation undefined
    auto clusters = greedy_cluster(wrap(vs), 0.9, 2, 2);
    CHECK(clusters.size() == 2);
    for (const auto& cl : clusters)
        for (std::size_t id : cl.member_ids) CHECK(id != vs.size() - 1);
}

TEST_CASE("group_clusters pairs identical clusters across models") {
    Cluster a;
    a.model_id = 0;
    a.member_ids = {0, 1};
    a.mean = {1.0, 0.5, -0.5, 0.1};
    Cluster b = a;
    b.model_id = 1;
    auto groups = group_clusters({{a}, {b}}, 0.8);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].members.size() == 2);
    for (std::size_t j = 0; j < a.mean.size(); ++j)
        CHECK(groups[0].group_mean[j] == doctest::Approx(a.mean[j]));
    CHECK(groups[0].pairwise_corr(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("group_clusters leaves uncorrelated means as singletons") {
    std::vector<std::vector<Cluster>> per_model(2);
    for (int i = 0; i < 4; ++i) {
        Cluster c;
        c.model_id = i % 2;
        c.member_ids = {0, 1};
        c.mean = Vector(8, 0.0);
        c.mean[2 * i] = 1.0;
        c.mean[2 * i + 1] = -1.0;
        per_model[i % 2].push_back(c);
    }
    auto groups = group_clusters(per_model, 0.8);
    CHECK(groups.size() == 4);
    for (const auto& g : groups) CHECK(g.members.size() == 1);
}

TEST_CASE("interpret_sample gates on the consensus decision") {
    SyntheticData syn = gen_synthetic(
        {.samples = 400, .input_dim = 6, .separation = 4.0, .noise = 1.0, .seed = 19});
    std::vector<DenseNetwork> nets;
    for (std::uint64_t s : {1, 2, 3}) {
        ModelConfig cfg;
        cfg.hidden_width = 12;
        cfg.activation = s % 2 ? Activation::tanh : Activation::relu;
        cfg.seed = s;
        cfg.epochs = 12;
        cfg.learning_rate = 0.05;
        nets.push_back(train(init_network(cfg, 6, 2), syn.dataset, cfg).net);
    }
    std::vector<const DenseNetwork*> models;
    for (auto& n : nets) models.push_back(&n);

    std::vector<std::vector<Cluster>> per_model;
    for (std::size_t m = 0; m < nets.size(); ++m)
        per_model.push_back(cluster_model(nets[m], m, syn.dataset, 0.9, 5, 8));
    auto groups = group_clusters(per_model, 0.8);
    REQUIRE_FALSE(groups.empty());

    // accepted training samples get rankings; a nearly-closed gate rejects
    // and produces none
    ConsensusParams open{3, 3, 0.5};
    ConsensusParams closed{3, 3, 0.999999999};
    std::size_t accepted = 0;
    for (std::size_t i = 0; i < 40; ++i) {
        Vector x = syn.dataset.sample(i);
        InterpretationReport r = interpret_sample(models, open, groups, x, 0.5,
                                                  syn.dataset.feature_names);
        if (r.decision.accepted) {
            ++accepted;
            CHECK(r.ranking.has_value());
            CHECK(r.supported == (r.best_group.has_value()));
        } else {
            CHECK_FALSE(r.ranking.has_value());
        }
        InterpretationReport rc = interpret_sample(models, closed, groups, x, 0.5,
                                                   syn.dataset.feature_names);
        CHECK_FALSE(rc.decision.accepted);
        CHECK_FALSE(rc.ranking.has_value());
        CHECK_FALSE(rc.best_group.has_value());
    }
    CHECK(accepted > 0);
}

TEST_CASE("interpret_sample reports perfect support for a matching group") {
    SyntheticData syn = gen_synthetic({.samples = 50, .input_dim = 5, .seed = 8});
    ModelConfig cfg;
    cfg.hidden_width = 8;
    cfg.seed = 21;
    DenseNetwork net = init_network(cfg, 5, 2);
    std::vector<const DenseNetwork*> models{&net};

    Vector x = syn.dataset.sample(0);
    JacobianDiffVector d = diff_vector(net, x);

    ClusterGroup g;
    g.members = {{0, 0}};
    g.group_mean = d.values;
    g.pairwise_corr = Matrix(1, 1, 1.0);

    InterpretationReport r =
        interpret_sample(models, {1, 1, 0.0}, {g}, x, 0.5, syn.dataset.feature_names);
    REQUIRE(r.decision.accepted);
    CHECK(r.support_correlation == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.best_group == 0);
    REQUIRE(r.ranking.has_value());
    CHECK(r.ranking->size() == 5);
}

TEST_CASE("walk_path centers at the sample and serializes") {
    ModelConfig cfg;
    cfg.hidden_width = 6;
    cfg.seed = 2;
    DenseNetwork net = init_network(cfg, 4, 2);
    Vector x0{0.2, 0.4, 0.6, 0.8};
    Vector dir{1.0, 0.0, -1.0, 0.0};

    auto rows = walk_path(net, x0, dir, {-0.1, 0.0, 0.1});
    REQUIRE(rows.size() == 3);
    Vector o0 = forward(net, x0).penultimate;
    CHECK(rows[1].epsilon == 0.0);
    for (std::size_t i = 0; i < o0.size(); ++i)
        CHECK(rows[1].penultimate[i] == doctest::Approx(o0[i]));

    std::string csv = walk_to_csv(rows);
    CHECK(csv.rfind("epsilon,o_0,o_1,p_0,p_1\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

    CHECK_THROWS_AS(walk_path(net, x0, Vector(4, 0.0), {0.0}), std::invalid_argument);
}
