// Experiment orchestration: configuration, run manifests, and the command
// implementations behind the CLI verbs (train, consensus, attack,
// interpret, walk, report).
//
// Every command is deterministic given the same config: reruns produce
// byte-identical CSV artifacts. Commands never overwrite earlier runs;
// each invocation writes a fresh versioned directory <out>/<cmd>[-N].
// Commands after `train` rebuild the dataset and split from the config
// seeds and load the persisted models from the train run.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "network.hpp"

namespace dc {

inline constexpr const char* kToolVersion = "0.1.0";

struct DatasetSpec {
    enum class Kind { synthetic, csv };
    Kind kind = Kind::synthetic;
    SyntheticSpec synthetic;
    std::string path;          // csv only
    std::string label_column;  // csv only
};

struct SplitSpec {
    double train_fraction = 0.9;
    std::uint64_t seed = 7;
};

struct ConsensusSpec {
    std::vector<std::size_t> k{3, 4, 5};
    Vector p_t_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::size_t ood_count = 1000;
    std::uint64_t ood_seed = 13;
};

struct AttackSpec {
    Vector epsilon_grid{0.0, 0.05, 0.1, 0.2, 0.3, 0.5};
    std::size_t source_model = 2;
    std::size_t sample_count = 500;  // capped by the test split size
};

struct InterpretSpec {
    double corr_threshold = 0.9;
    std::size_t min_cluster_size = 5;
    std::size_t max_clusters = 8;
    double group_threshold = 0.8;
    double match_threshold = 0.5;
    std::size_t top_n = 10;        // features per sign in reports
    std::size_t sample_limit = 0;  // 0: cluster every training sample
    std::size_t ood_report_count = 100;
};

struct WalkSpec {
    std::size_t model_index = 0;
    // explicit train-sample index pairs; empty = auto-pick one same-class
    // and one cross-class pair
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    double grid_lo = -0.25;  // in units of the pair distance
    double grid_hi = 1.25;
    std::size_t grid_steps = 61;
};

struct ExperimentConfig {
    DatasetSpec dataset;
    SplitSpec split;
    std::vector<ModelConfig> models;  // default: the five canonical configs
    ConsensusSpec consensus;
    AttackSpec attack;
    InterpretSpec interpret;
    WalkSpec walk;
    std::string output_dir = "out";
};

// The five canonical model configurations (widths 200/200/250/250/300,
// relu/tanh mix, sgd/adamax/adadelta/adamax/adagrad, matching bias and
// weight initializers).
std::vector<ModelConfig> canonical_models();

// Parse + validate; errors carry field-level paths like "consensus.k[1]".
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
void validate_config(const ExperimentConfig& config);

std::string config_canonical_json(const ExperimentConfig& config);
std::uint64_t config_hash(const ExperimentConfig& config);

// Replaces every component seed with a stream derived from `master`.
void apply_master_seed(ExperimentConfig& config, std::uint64_t master);

struct RunResult {
    std::string run_dir;
    std::vector<std::string> artifacts;  // paths of every emitted file
};

struct CommandOptions {
    std::string out_dir;     // overrides config.output_dir when non-empty
    std::string models_dir;  // default: <out>/train/models
    std::optional<std::uint64_t> master_seed;
};

RunResult run_train(const ExperimentConfig& config, const CommandOptions& opts);
RunResult run_consensus(const ExperimentConfig& config, const CommandOptions& opts);
RunResult run_attack(const ExperimentConfig& config, const CommandOptions& opts);
RunResult run_interpret(const ExperimentConfig& config, const CommandOptions& opts);
RunResult run_walk(const ExperimentConfig& config, const CommandOptions& opts);
RunResult run_report(const std::string& out_dir);

// Dispatch by verb; config_path may be empty for `report`.
RunResult run_command(const std::string& command, const std::string& config_path,
                      const CommandOptions& opts);

}  // namespace dc
