#include "interpret.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "csv.hpp"
#include "stats.hpp"

namespace dc {

namespace {

// Centered unit-norm copy; empty when the vector is (numerically) constant.
Vector zscore(const Vector& v) {
    const double m = mean(v);
    Vector z(v.size());
    double ss = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        z[i] = v[i] - m;
        ss += z[i] * z[i];
    }
    const double nrm = std::sqrt(ss);
    if (nrm < 1e-300) return {};
    for (auto& x : z) x /= nrm;
    return z;
}

Vector mean_of(const std::vector<const Vector*>& vs) {
    Vector m(vs[0]->size(), 0.0);
    for (const Vector* v : vs)
        for (std::size_t j = 0; j < m.size(); ++j) m[j] += (*v)[j];
    for (auto& x : m) x /= static_cast<double>(vs.size());
    return m;
}

// Shared greedy engine over arbitrary item vectors. Returns kept clusters
// as lists of item indices (addition order). Discarded undersized sets are
// recorded so callers can keep them out of the pool.
std::vector<std::vector<std::size_t>> greedy_engine(const std::vector<Vector>& items,
                                                    double threshold, std::size_t min_size,
                                                    std::size_t max_clusters) {
    const std::size_t n = items.size();
    std::vector<Vector> z(n);
    std::vector<char> in_pool(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = zscore(items[i]);
        in_pool[i] = !z[i].empty();
    }
    auto corr = [&](std::size_t a, std::size_t b) { return dot(z[a], z[b]); };

    std::vector<std::vector<std::size_t>> kept;
    while (kept.size() < max_clusters) {
        // best remaining pair, lexicographically lowest on ties
        double best = -2.0;
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!in_pool[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!in_pool[j]) continue;
                const double c = corr(i, j);
                if (c > best) {
                    best = c;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (best < threshold) break;

        std::vector<std::size_t> members{bi, bj};
        in_pool[bi] = in_pool[bj] = 0;
        std::vector<double> min_corr(n, 2.0);
        for (std::size_t s = 0; s < n; ++s) {
            if (!in_pool[s]) continue;
            min_corr[s] = std::min(corr(s, bi), corr(s, bj));
        }

        for (;;) {
            double best_min = -2.0;
            std::size_t pick = n;
            for (std::size_t s = 0; s < n; ++s) {
                if (!in_pool[s]) continue;
                if (min_corr[s] > best_min) {
                    best_min = min_corr[s];
                    pick = s;
                }
            }
            if (pick == n || best_min < threshold) break;
            members.push_back(pick);
            in_pool[pick] = 0;
            for (std::size_t s = 0; s < n; ++s) {
                if (!in_pool[s]) continue;
                min_corr[s] = std::min(min_corr[s], corr(s, pick));
            }
        }

        if (members.size() >= min_size) kept.push_back(std::move(members));
        // undersized sets stay out of the pool
    }
    return kept;
}

}  // namespace

double correlation_or_zero(const Vector& a, const Vector& b) {
    Vector za = zscore(a), zb = zscore(b);
    if (za.empty() || zb.empty()) return 0.0;
    return dot(za, zb);
}

JacobianDiffVector diff_vector(const DenseNetwork& model, const Vector& x,
                               std::size_t sample_id, std::size_t model_id) {
    if (model.class_count < 2) {
        throw std::invalid_argument("diff_vector: need at least 2 classes");
    }
    ForwardTrace trace = forward(model, x);
    Matrix jac = penultimate_jacobian(model, x);

    JacobianDiffVector d;
    d.sample_id = sample_id;
    d.model_id = model_id;
    if (model.class_count == 2) {
        d.class_low = 0;
        d.class_high = 1;
    } else {
        // top-2 classes by probability; orientation by class index so
        // vectors within one (low, high) bucket are comparable
        std::size_t top1 = 0, top2 = 1;
        if (trace.probabilities[1] > trace.probabilities[0]) std::swap(top1, top2);
        for (std::size_t c = 2; c < model.class_count; ++c) {
            if (trace.probabilities[c] > trace.probabilities[top1]) {
                top2 = top1;
                top1 = c;
            } else if (trace.probabilities[c] > trace.probabilities[top2]) {
                top2 = c;
            }
        }
        d.class_low = std::min(top1, top2);
        d.class_high = std::max(top1, top2);
    }
    d.values.resize(model.input_dim);
    for (std::size_t j = 0; j < model.input_dim; ++j) {
        d.values[j] = jac(d.class_high, j) - jac(d.class_low, j);
    }
    return d;
}

std::vector<JacobianDiffVector> diff_vectors(const DenseNetwork& model, std::size_t model_id,
                                             const Dataset& data) {
    std::vector<JacobianDiffVector> out;
    out.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        out.push_back(diff_vector(model, data.sample(i), i, model_id));
    return out;
}

std::vector<Cluster> greedy_cluster(const std::vector<JacobianDiffVector>& vectors,
                                    double corr_threshold, std::size_t min_size,
                                    std::size_t max_clusters) {
    if (corr_threshold <= 0.0 || corr_threshold >= 1.0) {
        throw std::invalid_argument("greedy_cluster: corr_threshold must be in (0,1)");
    }
    if (min_size < 1) throw std::invalid_argument("greedy_cluster: min_size must be >= 1");
    if (vectors.size() < 2 || max_clusters == 0) return {};

    std::vector<Vector> items;
    items.reserve(vectors.size());
    for (const auto& v : vectors) items.push_back(v.values);

    auto raw = greedy_engine(items, corr_threshold, min_size, max_clusters);

    std::vector<Cluster> clusters;
    clusters.reserve(raw.size());
    for (std::size_t ci = 0; ci < raw.size(); ++ci) {
        Cluster c;
        c.model_id = vectors[raw[ci][0]].model_id;
        c.corr_threshold_used = corr_threshold;
        c.formation_order = ci;
        std::vector<const Vector*> member_vecs;
        for (std::size_t idx : raw[ci]) {
            c.member_ids.push_back(vectors[idx].sample_id);
            member_vecs.push_back(&vectors[idx].values);
        }
        c.mean = mean_of(member_vecs);
        clusters.push_back(std::move(c));
    }
    return clusters;
}

std::vector<Cluster> cluster_model(const DenseNetwork& model, std::size_t model_id,
                                   const Dataset& train, double corr_threshold,
                                   std::size_t min_size, std::size_t max_clusters) {
    std::vector<JacobianDiffVector> all = diff_vectors(model, model_id, train);
    // cluster within identical class-pair buckets; binary tasks have one
    std::map<std::pair<std::size_t, std::size_t>, std::vector<JacobianDiffVector>> buckets;
    for (auto& d : all) buckets[{d.class_low, d.class_high}].push_back(std::move(d));

    std::vector<Cluster> clusters;
    for (auto& [pair, bucket] : buckets) {
        if (clusters.size() >= max_clusters) break;
        auto found =
            greedy_cluster(bucket, corr_threshold, min_size, max_clusters - clusters.size());
        for (auto& c : found) {
            c.formation_order = clusters.size();
            clusters.push_back(std::move(c));
        }
    }
    return clusters;
}

std::vector<ClusterGroup> group_clusters(const std::vector<std::vector<Cluster>>& per_model,
                                         double group_threshold) {
    std::vector<std::pair<std::size_t, std::size_t>> refs;
    std::vector<Vector> means;
    for (std::size_t m = 0; m < per_model.size(); ++m) {
        for (std::size_t c = 0; c < per_model[m].size(); ++c) {
            refs.emplace_back(per_model[m][c].model_id, c);
            means.push_back(per_model[m][c].mean);
        }
    }
    if (refs.empty()) throw std::invalid_argument("group_clusters: no clusters");

    auto raw = greedy_engine(means, group_threshold, 2, refs.size());

    std::vector<char> grouped(refs.size(), 0);
    std::vector<ClusterGroup> groups;
    auto build_group = [&](const std::vector<std::size_t>& idxs) {
        ClusterGroup g;
        std::vector<const Vector*> member_means;
        for (std::size_t i : idxs) {
            g.members.push_back(refs[i]);
            member_means.push_back(&means[i]);
            grouped[i] = 1;
        }
        g.group_mean = mean_of(member_means);
        g.pairwise_corr = Matrix(idxs.size(), idxs.size());
        for (std::size_t a = 0; a < idxs.size(); ++a)
            for (std::size_t b = 0; b < idxs.size(); ++b)
                g.pairwise_corr(a, b) =
                    a == b ? 1.0 : correlation_or_zero(means[idxs[a]], means[idxs[b]]);
        groups.push_back(std::move(g));
    };
    for (const auto& idxs : raw) build_group(idxs);
    // singleton groups for everything the greedy pass left behind
    for (std::size_t i = 0; i < refs.size(); ++i) {
        if (!grouped[i]) build_group({i});
    }
    return groups;
}

InterpretationReport interpret_sample(const std::vector<const DenseNetwork*>& models,
                                      const ConsensusParams& consensus_params,
                                      const std::vector<ClusterGroup>& groups,
                                      const Vector& x, double match_threshold,
                                      const std::vector<std::string>& feature_names) {
    if (groups.empty()) throw std::invalid_argument("interpret_sample: no groups");

    InterpretationReport report;
    report.decision = consensus_classify(ensemble_probs(models, x), consensus_params);
    if (!report.decision.accepted) return report;

    Vector avg(x.size(), 0.0);
    for (std::size_t m = 0; m < models.size(); ++m) {
        JacobianDiffVector d = diff_vector(*models[m], x, 0, m);
        for (std::size_t j = 0; j < avg.size(); ++j) avg[j] += d.values[j];
    }
    for (auto& v : avg) v /= static_cast<double>(models.size());

    std::size_t best = 0;
    double best_corr = -2.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double c = correlation_or_zero(avg, groups[g].group_mean);
        if (c > best_corr) {
            best_corr = c;
            best = g;
        }
    }
    report.support_correlation = best_corr;
    report.supported = best_corr >= match_threshold;
    if (report.supported) {
        report.best_group = best;
        report.ranking = feature_ranking(groups[best].group_mean, feature_names);
    } else {
        // classified but unsupported: fall back to the sample's own profile
        report.ranking = feature_ranking(avg, feature_names);
    }
    return report;
}

std::vector<WalkRow> walk_path(const DenseNetwork& model, const Vector& x0,
                               const Vector& direction, const Vector& epsilon_grid) {
    const double nrm = norm2(direction);
    if (nrm == 0.0) throw std::invalid_argument("walk_path: zero direction");
    std::vector<WalkRow> rows;
    rows.reserve(epsilon_grid.size());
    for (double eps : epsilon_grid) {
        Vector x(x0);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] += eps * direction[j] / nrm;
        ForwardTrace t = forward(model, x);
        rows.push_back(WalkRow{eps, t.penultimate, t.probabilities});
    }
    return rows;
}

std::string walk_to_csv(const std::vector<WalkRow>& rows) {
    if (rows.empty()) return "epsilon\n";
    const std::size_t c = rows[0].penultimate.size();
    std::string out = "epsilon";
    for (std::size_t i = 0; i < c; ++i) out += ",o_" + std::to_string(i);
    for (std::size_t i = 0; i < c; ++i) out += ",p_" + std::to_string(i);
    out += '\n';
    for (const WalkRow& r : rows) {
        out += format_double(r.epsilon);
        for (double v : r.penultimate) out += ',' + format_double(v);
        for (double v : r.probabilities) out += ',' + format_double(v);
        out += '\n';
    }
    return out;
}

}  // namespace dc
