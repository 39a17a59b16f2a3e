// Consensus-based interpretability: Jacobian difference vectors, greedy
// correlation clustering per model, cross-model cluster grouping,
// rejection-gated interpretation of new samples, and penultimate-output
// walks along inter-sample directions.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "consensus.hpp"
#include "dataset.hpp"
#include "matrix.hpp"
#include "network.hpp"
#include "ranking.hpp"

namespace dc {

// The local feature-importance atom: the difference between the two locally
// dominant rows of the penultimate Jacobian. For binary tasks the
// orientation is fixed to row(class 1) - row(class 0) regardless of the
// predicted class, so vectors are comparable across samples; positive
// entries push toward class 1.
struct JacobianDiffVector {
    Vector values;  // length input_dim
    std::size_t sample_id = 0;
    std::size_t model_id = 0;
    std::size_t class_low = 0;
    std::size_t class_high = 1;
};

JacobianDiffVector diff_vector(const DenseNetwork& model, const Vector& x,
                               std::size_t sample_id = 0, std::size_t model_id = 0);

// Diff vectors for every sample of `data` under one model.
std::vector<JacobianDiffVector> diff_vectors(const DenseNetwork& model, std::size_t model_id,
                                             const Dataset& data);

struct Cluster {
    std::size_t model_id = 0;
    std::vector<std::size_t> member_ids;  // sample ids in addition order
    Vector mean;                          // unweighted mean of member vectors
    double corr_threshold_used = 0.0;
    std::size_t formation_order = 0;
};

// Greedy correlation clustering: seed with the highest-correlated remaining
// pair (requires corr >= threshold), then repeatedly add the sample whose
// minimum correlation to all current members is largest, while that value
// stays >= threshold. Grown sets smaller than min_size are discarded and
// their members leave the pool. Stops after max_clusters kept clusters or
// when no seed pair reaches the threshold. All ties break toward the lowest
// sample index, so the result is deterministic. Constant (zero-variance)
// vectors have no defined correlation and never join a cluster.
std::vector<Cluster> greedy_cluster(const std::vector<JacobianDiffVector>& vectors,
                                    double corr_threshold, std::size_t min_size,
                                    std::size_t max_clusters);

// diff_vectors + greedy_cluster over a training set, bucketed by class
// pair for multi-class tasks (max_clusters caps the per-model total).
std::vector<Cluster> cluster_model(const DenseNetwork& model, std::size_t model_id,
                                   const Dataset& train, double corr_threshold,
                                   std::size_t min_size, std::size_t max_clusters);

struct ClusterGroup {
    // (model_id, index into that model's cluster list)
    std::vector<std::pair<std::size_t, std::size_t>> members;
    Vector group_mean;     // unweighted mean of member-cluster means
    Matrix pairwise_corr;  // correlations among member-cluster means
};

// Greedy grouping over cluster means with the same max-of-min-correlation
// expansion; clusters left over once no seed pair reaches the threshold
// become singleton groups.
std::vector<ClusterGroup> group_clusters(const std::vector<std::vector<Cluster>>& per_model,
                                         double group_threshold);

struct InterpretationReport {
    ConsensusDecision decision;
    std::optional<std::size_t> best_group;  // present iff accepted and supported
    double support_correlation = 0.0;       // meaningful only when accepted
    bool supported = false;
    // Absent for rejected samples: no interpretation is produced when the
    // models are not confident.
    std::optional<FeatureRanking> ranking;
};

// Gate through the consensus first; on acceptance, average the per-model
// diff vectors and match against the group means. A match below
// match_threshold flags the sample as classified but unsupported, and the
// ranking then comes from the sample's own averaged diff vector instead of
// a group mean.
InterpretationReport interpret_sample(const std::vector<const DenseNetwork*>& models,
                                      const ConsensusParams& consensus_params,
                                      const std::vector<ClusterGroup>& groups,
                                      const Vector& x, double match_threshold,
                                      const std::vector<std::string>& feature_names);

struct WalkRow {
    double epsilon = 0.0;
    Vector penultimate;
    Vector probabilities;
};

// forward(model, x0 + eps * dir_hat) for each grid epsilon, with dir_hat the
// normalized direction.
std::vector<WalkRow> walk_path(const DenseNetwork& model, const Vector& x0,
                               const Vector& direction, const Vector& epsilon_grid);

// CSV with header epsilon,o_0..o_{C-1},p_0..p_{C-1}.
std::string walk_to_csv(const std::vector<WalkRow>& rows);

// Pearson correlation that reports degenerate (zero-variance) inputs as no
// correlation instead of throwing; clustering and matching use it to skip
// such vectors deterministically.
double correlation_or_zero(const Vector& a, const Vector& b);

}  // namespace dc
