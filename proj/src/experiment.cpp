#include "experiment.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "attacks.hpp"
#include "baselines.hpp"
#include "consensus.hpp"
#include "csv.hpp"
#include "interpret.hpp"
#include "metrics.hpp"
#include "model_io.hpp"
#include "ranking.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dc {

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

std::vector<ModelConfig> canonical_models() {
    auto make = [](const char* name, std::size_t width, Activation act, OptimizerKind opt,
                   BiasInit bias, WeightInit weights, std::uint64_t seed) {
        ModelConfig c;
        c.name = name;
        c.hidden_width = width;
        c.activation = act;
        c.optimizer = opt;
        c.init.bias_init = bias;
        c.init.weight_init = weights;
        c.seed = seed;
        c.learning_rate = default_learning_rate(opt);
        return c;
    };
    return {
        make("model1", 200, Activation::relu, OptimizerKind::sgd, BiasInit::zeros,
             WeightInit::random_uniform, 101),
        make("model2", 200, Activation::tanh, OptimizerKind::adamax, BiasInit::ones,
             WeightInit::random_uniform, 102),
        make("model3", 250, Activation::relu, OptimizerKind::adadelta, BiasInit::constant,
             WeightInit::random_normal, 103),
        make("model4", 250, Activation::tanh, OptimizerKind::adamax, BiasInit::ones,
             WeightInit::random_uniform, 104),
        make("model5", 300, Activation::tanh, OptimizerKind::adagrad, BiasInit::random_normal,
             WeightInit::random_normal, 105),
    };
}

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& message) {
    throw std::invalid_argument("config: " + field + ": " + message);
}

template <typename T>
T get_or(const json& j, const char* field, const std::string& path, T fallback) {
    if (!j.contains(field)) return fallback;
    try {
        return j.at(field).get<T>();
    } catch (const json::exception&) {
        config_error(path + field, "has the wrong type");
    }
}

ModelConfig parse_model(const json& j, std::size_t index) {
    const std::string path = "models[" + std::to_string(index) + "].";
    ModelConfig c;
    c.name = get_or<std::string>(j, "name", path, "model" + std::to_string(index + 1));
    c.hidden_width = get_or<std::size_t>(j, "hidden_width", path, 200);
    try {
        c.activation = activation_from_string(get_or<std::string>(j, "activation", path, "relu"));
        c.optimizer = optimizer_from_string(get_or<std::string>(j, "optimizer", path, "sgd"));
        c.init.weight_init =
            weight_init_from_string(get_or<std::string>(j, "weight_init", path, "random_uniform"));
        c.init.bias_init =
            bias_init_from_string(get_or<std::string>(j, "bias_init", path, "zeros"));
    } catch (const std::invalid_argument& e) {
        config_error(path + "activation/optimizer/init", e.what());
    }
    c.init.constant_value = get_or<double>(j, "bias_constant", path, 0.1);
    c.layer_count = get_or<std::size_t>(j, "layer_count", path, 3);
    c.seed = get_or<std::uint64_t>(j, "seed", path, 1 + index);
    c.epochs = get_or<std::size_t>(j, "epochs", path, 100);
    c.batch_size = get_or<std::size_t>(j, "batch_size", path, 32);
    c.learning_rate =
        get_or<double>(j, "learning_rate", path, default_learning_rate(c.optimizer));
    return c;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
    }

    ExperimentConfig c;

    if (j.contains("dataset")) {
        const json& jd = j.at("dataset");
        const std::string kind = get_or<std::string>(jd, "kind", "dataset.", "synthetic");
        if (kind == "synthetic") {
            c.dataset.kind = DatasetSpec::Kind::synthetic;
        } else if (kind == "csv") {
            c.dataset.kind = DatasetSpec::Kind::csv;
        } else {
            config_error("dataset.kind", "must be 'synthetic' or 'csv', got '" + kind + "'");
        }
        c.dataset.synthetic.samples = get_or<std::size_t>(jd, "samples", "dataset.", 5000);
        c.dataset.synthetic.input_dim = get_or<std::size_t>(jd, "features", "dataset.", 50);
        c.dataset.synthetic.class_count = get_or<std::size_t>(jd, "classes", "dataset.", 2);
        c.dataset.synthetic.separation = get_or<double>(jd, "separation", "dataset.", 3.0);
        c.dataset.synthetic.noise = get_or<double>(jd, "noise", "dataset.", 1.0);
        c.dataset.synthetic.seed = get_or<std::uint64_t>(jd, "seed", "dataset.", 1);
        c.dataset.path = get_or<std::string>(jd, "path", "dataset.", "");
        c.dataset.label_column = get_or<std::string>(jd, "label_column", "dataset.", "label");
    }

    if (j.contains("split")) {
        const json& js = j.at("split");
        c.split.train_fraction = get_or<double>(js, "train_fraction", "split.", 0.9);
        c.split.seed = get_or<std::uint64_t>(js, "seed", "split.", 7);
    }

    if (j.contains("models")) {
        const json& jm = j.at("models");
        if (!jm.is_array()) config_error("models", "must be an array");
        for (std::size_t i = 0; i < jm.size(); ++i) c.models.push_back(parse_model(jm[i], i));
    } else {
        c.models = canonical_models();
    }

    if (j.contains("consensus")) {
        const json& jc = j.at("consensus");
        c.consensus.k = get_or<std::vector<std::size_t>>(jc, "k", "consensus.", c.consensus.k);
        c.consensus.p_t_grid = get_or<Vector>(jc, "p_t_grid", "consensus.", c.consensus.p_t_grid);
        c.consensus.ood_count = get_or<std::size_t>(jc, "ood_count", "consensus.", 1000);
        c.consensus.ood_seed = get_or<std::uint64_t>(jc, "ood_seed", "consensus.", 13);
    }

    if (j.contains("attack")) {
        const json& ja = j.at("attack");
        c.attack.epsilon_grid =
            get_or<Vector>(ja, "epsilon_grid", "attack.", c.attack.epsilon_grid);
        c.attack.source_model = get_or<std::size_t>(ja, "source_model", "attack.", 2);
        c.attack.sample_count = get_or<std::size_t>(ja, "sample_count", "attack.", 500);
    }

    if (j.contains("interpret")) {
        const json& ji = j.at("interpret");
        c.interpret.corr_threshold = get_or<double>(ji, "corr_threshold", "interpret.", 0.9);
        c.interpret.min_cluster_size =
            get_or<std::size_t>(ji, "min_cluster_size", "interpret.", 5);
        c.interpret.max_clusters = get_or<std::size_t>(ji, "max_clusters", "interpret.", 8);
        c.interpret.group_threshold = get_or<double>(ji, "group_threshold", "interpret.", 0.8);
        c.interpret.match_threshold = get_or<double>(ji, "match_threshold", "interpret.", 0.5);
        c.interpret.top_n = get_or<std::size_t>(ji, "top_n", "interpret.", 10);
        c.interpret.sample_limit = get_or<std::size_t>(ji, "sample_limit", "interpret.", 0);
        c.interpret.ood_report_count =
            get_or<std::size_t>(ji, "ood_report_count", "interpret.", 100);
    }

    if (j.contains("walk")) {
        const json& jw = j.at("walk");
        c.walk.model_index = get_or<std::size_t>(jw, "model_index", "walk.", 0);
        if (jw.contains("pairs")) {
            for (std::size_t i = 0; i < jw.at("pairs").size(); ++i) {
                const json& jp = jw.at("pairs")[i];
                if (!jp.is_array() || jp.size() != 2) {
                    config_error("walk.pairs[" + std::to_string(i) + "]",
                                 "must be a [from, to] pair");
                }
                c.walk.pairs.emplace_back(jp[0].get<std::size_t>(), jp[1].get<std::size_t>());
            }
        }
        c.walk.grid_lo = get_or<double>(jw, "grid_lo", "walk.", -0.25);
        c.walk.grid_hi = get_or<double>(jw, "grid_hi", "walk.", 1.25);
        c.walk.grid_steps = get_or<std::size_t>(jw, "grid_steps", "walk.", 61);
    }

    c.output_dir = get_or<std::string>(j, "output_dir", "", "out");
    validate_config(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    return parse_config(read_file(path));
}

void validate_config(const ExperimentConfig& c) {
    if (c.dataset.kind == DatasetSpec::Kind::synthetic) {
        if (c.dataset.synthetic.samples < 2) config_error("dataset.samples", "must be >= 2");
        if (c.dataset.synthetic.input_dim < 2) config_error("dataset.features", "must be >= 2");
        if (c.dataset.synthetic.class_count < 2) config_error("dataset.classes", "must be >= 2");
        if (c.dataset.synthetic.separation < 0) config_error("dataset.separation", "must be >= 0");
        if (c.dataset.synthetic.noise <= 0) config_error("dataset.noise", "must be > 0");
    } else if (c.dataset.path.empty()) {
        config_error("dataset.path", "required for csv datasets");
    }

    if (c.split.train_fraction <= 0.0 || c.split.train_fraction > 1.0) {
        config_error("split.train_fraction", "must be in (0, 1]");
    }

    if (c.models.empty()) config_error("models", "need at least one model");
    std::set<std::string> names;
    for (std::size_t i = 0; i < c.models.size(); ++i) {
        const std::string path = "models[" + std::to_string(i) + "].";
        const ModelConfig& m = c.models[i];
        if (m.name.empty()) config_error(path + "name", "must not be empty");
        if (!names.insert(m.name).second) config_error(path + "name", "duplicate '" + m.name + "'");
        if (m.hidden_width < 1) config_error(path + "hidden_width", "must be >= 1");
        if (m.layer_count < 1) config_error(path + "layer_count", "must be >= 1");
        if (m.batch_size < 1) config_error(path + "batch_size", "must be >= 1");
        if (m.learning_rate <= 0) config_error(path + "learning_rate", "must be > 0");
    }

    for (std::size_t i = 0; i < c.consensus.k.size(); ++i) {
        const std::size_t k = c.consensus.k[i];
        if (k < 1 || k > c.models.size()) {
            config_error("consensus.k[" + std::to_string(i) + "]",
                         "must satisfy 1 <= k <= n (k=" + std::to_string(k) +
                             ", n=" + std::to_string(c.models.size()) + ")");
        }
    }
    if (c.consensus.k.empty()) config_error("consensus.k", "must not be empty");
    if (c.consensus.p_t_grid.empty()) config_error("consensus.p_t_grid", "must not be empty");
    for (std::size_t i = 0; i < c.consensus.p_t_grid.size(); ++i) {
        const double p = c.consensus.p_t_grid[i];
        if (p < 0.0 || p >= 1.0) {
            config_error("consensus.p_t_grid[" + std::to_string(i) + "]", "must be in [0, 1)");
        }
    }

    if (c.attack.epsilon_grid.empty()) config_error("attack.epsilon_grid", "must not be empty");
    for (std::size_t i = 0; i < c.attack.epsilon_grid.size(); ++i) {
        if (c.attack.epsilon_grid[i] < 0) {
            config_error("attack.epsilon_grid[" + std::to_string(i) + "]", "must be >= 0");
        }
    }
    if (c.attack.source_model >= c.models.size()) {
        config_error("attack.source_model", "index " + std::to_string(c.attack.source_model) +
                                                " out of range for " +
                                                std::to_string(c.models.size()) + " models");
    }
    if (c.attack.sample_count < 1) config_error("attack.sample_count", "must be >= 1");

    auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in_unit(c.interpret.corr_threshold)) {
        config_error("interpret.corr_threshold", "must be in (0, 1)");
    }
    if (!in_unit(c.interpret.group_threshold)) {
        config_error("interpret.group_threshold", "must be in (0, 1)");
    }
    if (c.interpret.match_threshold < 0.0 || c.interpret.match_threshold > 1.0) {
        config_error("interpret.match_threshold", "must be in [0, 1]");
    }
    if (c.interpret.min_cluster_size < 1) config_error("interpret.min_cluster_size", "must be >= 1");
    if (c.interpret.max_clusters < 1) config_error("interpret.max_clusters", "must be >= 1");
    if (c.interpret.top_n < 1) config_error("interpret.top_n", "must be >= 1");

    if (c.walk.model_index >= c.models.size()) {
        config_error("walk.model_index", "out of range");
    }
    if (c.walk.grid_steps < 2) config_error("walk.grid_steps", "must be >= 2");
    if (c.walk.grid_hi <= c.walk.grid_lo) config_error("walk.grid_hi", "must exceed grid_lo");
}

std::string config_canonical_json(const ExperimentConfig& c) {
    json j;
    j["dataset"]["kind"] = c.dataset.kind == DatasetSpec::Kind::synthetic ? "synthetic" : "csv";
    j["dataset"]["samples"] = c.dataset.synthetic.samples;
    j["dataset"]["features"] = c.dataset.synthetic.input_dim;
    j["dataset"]["classes"] = c.dataset.synthetic.class_count;
    j["dataset"]["separation"] = c.dataset.synthetic.separation;
    j["dataset"]["noise"] = c.dataset.synthetic.noise;
    j["dataset"]["seed"] = c.dataset.synthetic.seed;
    j["dataset"]["path"] = c.dataset.path;
    j["dataset"]["label_column"] = c.dataset.label_column;
    j["split"]["train_fraction"] = c.split.train_fraction;
    j["split"]["seed"] = c.split.seed;
    for (const ModelConfig& m : c.models) {
        json jm;
        jm["name"] = m.name;
        jm["hidden_width"] = m.hidden_width;
        jm["activation"] = to_string(m.activation);
        jm["optimizer"] = to_string(m.optimizer);
        jm["weight_init"] = to_string(m.init.weight_init);
        jm["bias_init"] = to_string(m.init.bias_init);
        jm["bias_constant"] = m.init.constant_value;
        jm["layer_count"] = m.layer_count;
        jm["seed"] = m.seed;
        jm["epochs"] = m.epochs;
        jm["batch_size"] = m.batch_size;
        jm["learning_rate"] = m.learning_rate;
        j["models"].push_back(jm);
    }
    j["consensus"]["k"] = c.consensus.k;
    j["consensus"]["p_t_grid"] = c.consensus.p_t_grid;
    j["consensus"]["ood_count"] = c.consensus.ood_count;
    j["consensus"]["ood_seed"] = c.consensus.ood_seed;
    j["attack"]["epsilon_grid"] = c.attack.epsilon_grid;
    j["attack"]["source_model"] = c.attack.source_model;
    j["attack"]["sample_count"] = c.attack.sample_count;
    j["interpret"]["corr_threshold"] = c.interpret.corr_threshold;
    j["interpret"]["min_cluster_size"] = c.interpret.min_cluster_size;
    j["interpret"]["max_clusters"] = c.interpret.max_clusters;
    j["interpret"]["group_threshold"] = c.interpret.group_threshold;
    j["interpret"]["match_threshold"] = c.interpret.match_threshold;
    j["interpret"]["top_n"] = c.interpret.top_n;
    j["interpret"]["sample_limit"] = c.interpret.sample_limit;
    j["interpret"]["ood_report_count"] = c.interpret.ood_report_count;
    j["walk"]["model_index"] = c.walk.model_index;
    j["walk"]["pairs"] = json::array();
    for (const auto& [a, b] : c.walk.pairs) j["walk"]["pairs"].push_back({a, b});
    j["walk"]["grid_lo"] = c.walk.grid_lo;
    j["walk"]["grid_hi"] = c.walk.grid_hi;
    j["walk"]["grid_steps"] = c.walk.grid_steps;
    return j.dump();
}

std::uint64_t config_hash(const ExperimentConfig& c) {
    const std::string s = config_canonical_json(c);
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

void apply_master_seed(ExperimentConfig& c, std::uint64_t master) {
    c.dataset.synthetic.seed = derive_seed(master, 0);
    c.split.seed = derive_seed(master, 1);
    c.consensus.ood_seed = derive_seed(master, 2);
    for (std::size_t i = 0; i < c.models.size(); ++i) {
        c.models[i].seed = derive_seed(master, 10 + i);
    }
}

// ---------------------------------------------------------------------------
// shared pipeline pieces
// ---------------------------------------------------------------------------

namespace {

struct PreparedData {
    Dataset train_raw;  // pre-normalization units (summary stats)
    Dataset train;
    Dataset test;
    NormalizationParams norm;
    Vector ground_truth;  // empty for csv datasets
};

PreparedData prepare_data(const ExperimentConfig& config) {
    Dataset raw;
    Vector ground_truth;
    if (config.dataset.kind == DatasetSpec::Kind::synthetic) {
        SyntheticData syn = gen_synthetic(config.dataset.synthetic);
        raw = std::move(syn.dataset);
        ground_truth = std::move(syn.ground_truth_direction);
    } else {
        raw = load_csv(config.dataset.path, config.dataset.label_column);
    }

    PreparedData prep;
    auto [train_part, test_part] = split(raw, config.split.train_fraction, config.split.seed);
    if (test_part.size() == 0) {
        std::cerr << "warning: train_fraction leaves the test split empty\n";
    }
    prep.norm = fit_normalize(train_part);
    prep.train = apply_normalize(prep.norm, train_part);
    prep.test = apply_normalize(prep.norm, test_part);
    prep.train_raw = std::move(train_part);
    prep.ground_truth = std::move(ground_truth);
    return prep;
}

std::string resolve_new_run_dir(const std::string& out_dir, const std::string& command) {
    fs::create_directories(out_dir);
    fs::path base = fs::path(out_dir) / command;
    if (!fs::exists(base)) return base.string();
    for (int v = 2;; ++v) {
        fs::path candidate = fs::path(out_dir) / (command + "-" + std::to_string(v));
        if (!fs::exists(candidate)) return candidate.string();
    }
}

std::string find_latest_run_dir(const std::string& out_dir, const std::string& command) {
    fs::path best;
    fs::path base = fs::path(out_dir) / command;
    if (fs::exists(base)) best = base;
    for (int v = 2;; ++v) {
        fs::path candidate = fs::path(out_dir) / (command + "-" + std::to_string(v));
        if (!fs::exists(candidate)) break;
        best = candidate;
    }
    return best.string();
}

std::string out_dir_of(const ExperimentConfig& config, const CommandOptions& opts) {
    return opts.out_dir.empty() ? config.output_dir : opts.out_dir;
}

std::string models_dir_of(const CommandOptions& opts, const std::string& out_dir) {
    if (!opts.models_dir.empty()) return opts.models_dir;
    const std::string train_dir = find_latest_run_dir(out_dir, "train");
    if (train_dir.empty()) {
        throw std::invalid_argument("no train run found under '" + out_dir +
                                    "'; run the train command first or pass --models");
    }
    return (fs::path(train_dir) / "models").string();
}

std::vector<PersistedModel> load_ensemble(const ExperimentConfig& config,
                                          const std::string& models_dir) {
    std::vector<PersistedModel> models;
    for (const ModelConfig& m : config.models) {
        const fs::path path = fs::path(models_dir) / (m.name + ".json");
        if (!fs::exists(path)) {
            throw std::invalid_argument("missing model file '" + path.string() +
                                        "'; run the train command first");
        }
        models.push_back(load_model(path.string()));
    }
    return models;
}

std::vector<const DenseNetwork*> net_ptrs(const std::vector<PersistedModel>& models) {
    std::vector<const DenseNetwork*> ptrs;
    ptrs.reserve(models.size());
    for (const auto& m : models) ptrs.push_back(&m.net);
    return ptrs;
}

class RunWriter {
public:
    RunWriter(std::string run_dir, std::string command, const ExperimentConfig* config,
              const CommandOptions& opts)
        : run_dir_(std::move(run_dir)),
          command_(std::move(command)),
          started_(std::chrono::steady_clock::now()) {
        fs::create_directories(run_dir_);
        if (config) config_hash_ = config_hash(*config);
        master_seed_ = opts.master_seed;
    }

    std::string path(const std::string& name) const {
        return (fs::path(run_dir_) / name).string();
    }

    void write(const std::string& name, const std::string& contents) {
        fs::path p = fs::path(run_dir_) / name;
        fs::create_directories(p.parent_path());
        write_file_atomic(p.string(), contents);
        artifacts_.push_back(name);
    }

    void note_artifact(const std::string& name) { artifacts_.push_back(name); }

    RunResult finish() {
        const auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - started_)
                              .count();
        json manifest;
        manifest["tool"] = "deepconsensus";
        manifest["version"] = kToolVersion;
        manifest["command"] = command_;
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(config_hash_));
        manifest["config_hash"] = std::string(hex);
        if (master_seed_) manifest["master_seed"] = *master_seed_;
        manifest["wall_ms"] = wall;
        manifest["artifacts"] = artifacts_;
        write_file_atomic(path("manifest.json"), manifest.dump(2) + "\n");

        RunResult result;
        result.run_dir = run_dir_;
        for (const std::string& a : artifacts_) result.artifacts.push_back(path(a));
        result.artifacts.push_back(path("manifest.json"));
        return result;
    }

private:
    std::string run_dir_;
    std::string command_;
    std::chrono::steady_clock::time_point started_;
    std::uint64_t config_hash_ = 0;
    std::optional<std::uint64_t> master_seed_;
    std::vector<std::string> artifacts_;
};

ExperimentConfig effective_config(const ExperimentConfig& input, const CommandOptions& opts) {
    ExperimentConfig config = input;
    if (opts.master_seed) apply_master_seed(config, *opts.master_seed);
    return config;
}

void require_binary_protocol(const Dataset& data, const char* command) {
    if (data.class_count != 2) {
        throw std::invalid_argument(std::string(command) +
                                    ": the experiment protocol needs binary labels, dataset has " +
                                    std::to_string(data.class_count) + " classes");
    }
}

Dataset head_of(const Dataset& data, std::size_t count) {
    Dataset out;
    out.feature_names = data.feature_names;
    out.class_count = data.class_count;
    const std::size_t n = std::min(count, data.size());
    out.features = Matrix(n, data.input_dim());
    for (std::size_t i = 0; i < n; ++i) {
        const double* src = data.features.row_ptr(i);
        std::copy(src, src + data.input_dim(), out.features.row_ptr(i));
        out.labels.push_back(data.labels[i]);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

RunResult run_train(const ExperimentConfig& input, const CommandOptions& opts) {
    ExperimentConfig config = effective_config(input, opts);
    const std::string out_dir = out_dir_of(config, opts);
    RunWriter run(resolve_new_run_dir(out_dir, "train"), "train", &config, opts);

    PreparedData prep = prepare_data(config);
    require_binary_protocol(prep.train, "train");

    // independent seeds make per-model threads deterministic
    std::vector<TrainResult> results(config.models.size());
    std::vector<std::string> failures(config.models.size());
    {
        std::vector<std::thread> workers;
        for (std::size_t i = 0; i < config.models.size(); ++i) {
            workers.emplace_back([&, i] {
                try {
                    const ModelConfig& mc = config.models[i];
                    DenseNetwork net =
                        init_network(mc, prep.train.input_dim(), prep.train.class_count);
                    results[i] = train(std::move(net), prep.train, mc);
                } catch (const std::exception& e) {
                    failures[i] = e.what();
                }
            });
        }
        for (auto& w : workers) w.join();
    }
    for (std::size_t i = 0; i < failures.size(); ++i) {
        if (!failures[i].empty()) {
            throw std::runtime_error("train: model '" + config.models[i].name +
                                     "' failed: " + failures[i]);
        }
    }

    for (std::size_t i = 0; i < results.size(); ++i) {
        const std::string rel = "models/" + config.models[i].name + ".json";
        fs::create_directories(fs::path(run.path(rel)).parent_path());
        save_model(run.path(rel), results[i].net, prep.norm);
        run.note_artifact(rel);
    }

    std::string metrics_csv = "model,accuracy,roc_auc,precision,recall,f_measure\n";
    if (prep.test.size() > 0) {
        for (std::size_t i = 0; i < results.size(); ++i) {
            Vector scores;
            scores.reserve(prep.test.size());
            for (std::size_t s = 0; s < prep.test.size(); ++s) {
                scores.push_back(forward(results[i].net, prep.test.sample(s)).probabilities[1]);
            }
            MetricsReport m = evaluate(scores, prep.test.labels);
            metrics_csv += csv_row({config.models[i].name, format_double(m.accuracy),
                                    format_double(m.roc_auc), format_double(m.precision),
                                    format_double(m.recall), format_double(m.f_measure)});
        }
    }
    run.write("metrics.csv", metrics_csv);

    std::string history_csv = "model,epoch,loss,accuracy\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        for (std::size_t e = 0; e < results[i].history.size(); ++e) {
            history_csv += csv_row({config.models[i].name, std::to_string(e + 1),
                                    format_double(results[i].history[e].loss),
                                    format_double(results[i].history[e].accuracy)});
        }
    }
    run.write("history.csv", history_csv);

    return run.finish();
}

// ---------------------------------------------------------------------------
// consensus
// ---------------------------------------------------------------------------

RunResult run_consensus(const ExperimentConfig& input, const CommandOptions& opts) {
    ExperimentConfig config = effective_config(input, opts);
    const std::string out_dir = out_dir_of(config, opts);
    std::vector<PersistedModel> models =
        load_ensemble(config, models_dir_of(opts, out_dir));
    std::vector<const DenseNetwork*> nets = net_ptrs(models);

    RunWriter run(resolve_new_run_dir(out_dir, "consensus"), "consensus", &config, opts);
    PreparedData prep = prepare_data(config);
    if (prep.test.size() == 0) {
        throw std::invalid_argument("consensus: test split is empty; lower train_fraction");
    }

    for (std::size_t k : config.consensus.k) {
        auto curve = coverage_accuracy_curve(nets, prep.test, k, config.consensus.p_t_grid);
        run.write("curve_k" + std::to_string(k) + ".csv", curve_to_csv(curve));
    }

    Matrix ood = gen_ood(config.consensus.ood_count, prep.test.input_dim(),
                         config.consensus.ood_seed);
    std::string ood_csv = "k,p_t,rejection_rate\n";
    for (std::size_t k : config.consensus.k) {
        for (double p_t : config.consensus.p_t_grid) {
            const double rate = ood_rejection_rate(nets, ood, {nets.size(), k, p_t});
            ood_csv += csv_row({std::to_string(k), format_double(p_t), format_double(rate)});
        }
    }
    run.write("ood_rejection.csv", ood_csv);

    return run.finish();
}

// ---------------------------------------------------------------------------
// attack
// ---------------------------------------------------------------------------

RunResult run_attack(const ExperimentConfig& input, const CommandOptions& opts) {
    ExperimentConfig config = effective_config(input, opts);
    const std::string out_dir = out_dir_of(config, opts);
    std::vector<PersistedModel> models =
        load_ensemble(config, models_dir_of(opts, out_dir));
    std::vector<const DenseNetwork*> nets = net_ptrs(models);

    RunWriter run(resolve_new_run_dir(out_dir, "attack"), "attack", &config, opts);
    PreparedData prep = prepare_data(config);
    if (prep.test.size() == 0) {
        throw std::invalid_argument("attack: test split is empty; lower train_fraction");
    }
    require_binary_protocol(prep.test, "attack");

    Dataset victims = head_of(prep.test, config.attack.sample_count);
    const DenseNetwork& source = *nets[config.attack.source_model];

    const std::size_t k_full = nets.size();
    std::string transfer_csv =
        "epsilon,source_model,source_accuracy,source_accuracy_drop,"
        "accepted_correct,accepted_wrong,rejected";
    for (std::size_t m = 0; m < nets.size(); ++m)
        transfer_csv += ",model_" + std::to_string(m) + "_accuracy";
    transfer_csv += '\n';

    for (double eps : config.attack.epsilon_grid) {
        AdversarialBatch batch =
            make_fgsm_batch(source, config.attack.source_model, victims, eps);
        const std::string tag = "eps_" + format_double(eps);
        save_batch(run.path("batch_" + tag + ".csv"), run.path("batch_" + tag + ".meta.json"),
                   batch, config.dataset.synthetic.seed);
        run.note_artifact("batch_" + tag + ".csv");
        run.note_artifact("batch_" + tag + ".meta.json");

        TransferReport rep = transfer_eval(nets, batch, {k_full, k_full, 0.5});
        std::vector<std::string> cells{
            format_double(eps),
            std::to_string(config.attack.source_model),
            format_double(rep.source_accuracy),
            format_double(rep.source_accuracy_drop),
            std::to_string(rep.accepted_correct),
            std::to_string(rep.accepted_wrong),
            std::to_string(rep.rejected)};
        for (double acc : rep.per_model_accuracy) cells.push_back(format_double(acc));
        transfer_csv += csv_row(cells);
    }
    run.write("transfer.csv", transfer_csv);

    return run.finish();
}

// ---------------------------------------------------------------------------
// interpret
// ---------------------------------------------------------------------------

namespace {

std::string clusters_to_json(const std::vector<std::vector<Cluster>>& per_model,
                             const std::vector<std::string>& model_names) {
    json out = json::array();
    for (std::size_t m = 0; m < per_model.size(); ++m) {
        for (const Cluster& c : per_model[m]) {
            json jc;
            jc["model"] = m;
            jc["model_name"] = model_names[m];
            jc["formation_order"] = c.formation_order;
            jc["size"] = c.member_ids.size();
            jc["member_ids"] = c.member_ids;
            jc["corr_threshold"] = c.corr_threshold_used;
            jc["mean"] = c.mean;
            out.push_back(jc);
        }
    }
    return out.dump(1) + "\n";
}

std::string groups_to_json(const std::vector<ClusterGroup>& groups) {
    json out = json::array();
    for (const ClusterGroup& g : groups) {
        json jg;
        jg["members"] = json::array();
        for (const auto& [model, cluster] : g.members) {
            jg["members"].push_back({{"model", model}, {"cluster", cluster}});
        }
        jg["group_mean"] = g.group_mean;
        json corr = json::array();
        for (std::size_t a = 0; a < g.pairwise_corr.rows; ++a) {
            corr.push_back(g.pairwise_corr.row(a));
        }
        jg["pairwise_mean_correlation"] = corr;
        out.push_back(jg);
    }
    return out.dump(1) + "\n";
}

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += '|';
        out += names[i];
    }
    return out;
}

}  // namespace

RunResult run_interpret(const ExperimentConfig& input, const CommandOptions& opts) {
    ExperimentConfig config = effective_config(input, opts);
    const std::string out_dir = out_dir_of(config, opts);
    std::vector<PersistedModel> models =
        load_ensemble(config, models_dir_of(opts, out_dir));
    std::vector<const DenseNetwork*> nets = net_ptrs(models);

    RunWriter run(resolve_new_run_dir(out_dir, "interpret"), "interpret", &config, opts);
    PreparedData prep = prepare_data(config);
    require_binary_protocol(prep.train, "interpret");

    // clustering corpus: the training samples (optionally capped)
    Dataset corpus = config.interpret.sample_limit > 0
                         ? head_of(prep.train, config.interpret.sample_limit)
                         : prep.train;

    std::vector<std::string> model_names;
    for (const auto& m : config.models) model_names.push_back(m.name);

    std::vector<std::vector<Cluster>> per_model(nets.size());
    {
        std::vector<std::thread> workers;
        for (std::size_t m = 0; m < nets.size(); ++m) {
            workers.emplace_back([&, m] {
                per_model[m] = cluster_model(*nets[m], m, corpus,
                                             config.interpret.corr_threshold,
                                             config.interpret.min_cluster_size,
                                             config.interpret.max_clusters);
            });
        }
        for (auto& w : workers) w.join();
    }
    run.write("clusters.json", clusters_to_json(per_model, model_names));

    std::size_t total_clusters = 0;
    for (const auto& cs : per_model) total_clusters += cs.size();
    if (total_clusters == 0) {
        throw std::runtime_error(
            "interpret: no clusters formed; lower interpret.corr_threshold");
    }
    std::vector<ClusterGroup> groups =
        group_clusters(per_model, config.interpret.group_threshold);
    run.write("groups.json", groups_to_json(groups));

    // feature importance from the largest group (ties: first formed)
    std::size_t largest = 0;
    for (std::size_t g = 1; g < groups.size(); ++g) {
        if (groups[g].members.size() > groups[largest].members.size()) largest = g;
    }
    FeatureRanking consensus_ranking =
        feature_ranking(groups[largest].group_mean, prep.train.feature_names);

    std::map<std::string, SummaryStats> raw_stats;
    for (std::size_t j = 0; j < prep.train_raw.input_dim(); ++j) {
        Vector column(prep.train_raw.size());
        for (std::size_t i = 0; i < prep.train_raw.size(); ++i) {
            column[i] = prep.train_raw.features(i, j);
        }
        raw_stats[prep.train_raw.feature_names[j]] = summary_stats(column);
    }
    std::string importance_csv = "rank,feature,contribution,mean,stddev,median,min,max\n";
    for (std::size_t r = 0; r < consensus_ranking.entries.size(); ++r) {
        const auto& [name, value] = consensus_ranking.entries[r];
        const SummaryStats& st = raw_stats.at(name);
        importance_csv += csv_row({std::to_string(r + 1), name, format_double(value),
                                   format_double(st.mean), format_double(st.stddev),
                                   format_double(st.median), format_double(st.min),
                                   format_double(st.max)});
    }
    run.write("feature_importance.csv", importance_csv);

    // Table-5-style agreement against the intrinsically interpretable
    // baselines, over n = 10,20,... up to min(100, feature count)
    LinearModel lr = train_logistic(prep.train, 0.5, 40, derive_seed(config.split.seed, 5));
    LinearModel svm =
        train_linear_svm(prep.train, 10.0, 0.05, 60, derive_seed(config.split.seed, 6));
    std::vector<std::size_t> n_grid;
    for (std::size_t n = 10; n <= std::min<std::size_t>(100, prep.train.input_dim()); n += 10) {
        n_grid.push_back(n);
    }
    if (n_grid.empty() && prep.train.input_dim() >= 2) {
        n_grid.push_back(prep.train.input_dim() - prep.train.input_dim() % 2);
    }
    std::string agreement_csv = "baseline";
    for (std::size_t n : n_grid) agreement_csv += ",n_" + std::to_string(n);
    agreement_csv += ",average\n";
    auto agreement_row = [&](const std::string& label, const FeatureRanking& ranking) {
        std::vector<std::string> cells{label};
        double sum = 0.0;
        for (std::size_t n : n_grid) {
            const double a = topn_agreement(consensus_ranking, ranking, n);
            sum += a;
            cells.push_back(format_double(a));
        }
        cells.push_back(format_double(sum / static_cast<double>(n_grid.size())));
        agreement_csv += csv_row(cells);
    };
    agreement_row("lr", linear_feature_ranking(lr, prep.train.feature_names));
    agreement_row("svm", linear_feature_ranking(svm, prep.train.feature_names));
    run.write("agreement.csv", agreement_csv);

    // per-sample gated interpretations over the test split plus OOD draws
    ConsensusParams params{nets.size(), nets.size(), 0.5};
    std::string interp_csv =
        "sample,kind,verdict,predicted_class,confidence,support_correlation,supported,"
        "best_group,top_positive,top_negative\n";
    auto interpret_row = [&](const std::string& id, const std::string& kind, const Vector& x) {
        InterpretationReport rep = interpret_sample(nets, params, groups, x,
                                                    config.interpret.match_threshold,
                                                    prep.train.feature_names);
        std::vector<std::string> cells{id, kind};
        if (!rep.decision.accepted) {
            cells.insert(cells.end(),
                         {"rejected", "", format_double(rep.decision.confidence), "", "", "", "",
                          ""});
        } else {
            const std::size_t half = config.interpret.top_n;
            cells.insert(cells.end(),
                         {"accepted", std::to_string(rep.decision.class_index),
                          format_double(rep.decision.confidence),
                          format_double(rep.support_correlation),
                          rep.supported ? "true" : "false",
                          rep.best_group ? std::to_string(*rep.best_group) : "",
                          join_names(rep.ranking->top_positive(half)),
                          join_names(rep.ranking->top_negative(half))});
        }
        interp_csv += csv_row(cells);
    };
    for (std::size_t i = 0; i < prep.test.size(); ++i) {
        interpret_row(std::to_string(i), "test", prep.test.sample(i));
    }
    if (config.interpret.ood_report_count > 0) {
        Matrix ood = gen_ood(config.interpret.ood_report_count, prep.train.input_dim(),
                             derive_seed(config.consensus.ood_seed, 1));
        for (std::size_t i = 0; i < ood.rows; ++i) {
            interpret_row(std::to_string(i), "ood", ood.row(i));
        }
    }
    run.write("interpretations.csv", interp_csv);

    return run.finish();
}

// ---------------------------------------------------------------------------
// walk
// ---------------------------------------------------------------------------

RunResult run_walk(const ExperimentConfig& input, const CommandOptions& opts) {
    ExperimentConfig config = effective_config(input, opts);
    const std::string out_dir = out_dir_of(config, opts);
    std::vector<PersistedModel> models =
        load_ensemble(config, models_dir_of(opts, out_dir));

    RunWriter run(resolve_new_run_dir(out_dir, "walk"), "walk", &config, opts);
    PreparedData prep = prepare_data(config);
    const DenseNetwork& net = models[config.walk.model_index].net;

    auto emit_walk = [&](const std::string& name, std::size_t from, std::size_t to) {
        if (from >= prep.train.size() || to >= prep.train.size() || from == to) {
            throw std::invalid_argument("walk: invalid sample pair (" + std::to_string(from) +
                                        ", " + std::to_string(to) + ")");
        }
        Vector x0 = prep.train.sample(from);
        Vector x1 = prep.train.sample(to);
        Vector direction(x0.size());
        for (std::size_t j = 0; j < x0.size(); ++j) direction[j] = x1[j] - x0[j];
        const double dist = norm2(direction);
        if (dist == 0.0) {
            throw std::invalid_argument("walk: samples " + std::to_string(from) + " and " +
                                        std::to_string(to) + " coincide");
        }
        Vector grid(config.walk.grid_steps);
        for (std::size_t s = 0; s < grid.size(); ++s) {
            const double t = config.walk.grid_lo +
                             (config.walk.grid_hi - config.walk.grid_lo) *
                                 static_cast<double>(s) /
                                 static_cast<double>(grid.size() - 1);
            grid[s] = t * dist;
        }
        run.write(name, walk_to_csv(walk_path(net, x0, direction, grid)));
    };

    if (!config.walk.pairs.empty()) {
        for (const auto& [from, to] : config.walk.pairs) {
            emit_walk("walk_pair_" + std::to_string(from) + "_" + std::to_string(to) + ".csv",
                      from, to);
        }
    } else {
        // auto-pick: two class-0 samples, then a class-0 -> class-1 pair
        std::size_t first0 = prep.train.size(), second0 = prep.train.size(),
                    first1 = prep.train.size();
        for (std::size_t i = 0; i < prep.train.size(); ++i) {
            if (prep.train.labels[i] == 0) {
                if (first0 == prep.train.size()) first0 = i;
                else if (second0 == prep.train.size()) second0 = i;
            } else if (prep.train.labels[i] == 1 && first1 == prep.train.size()) {
                first1 = i;
            }
        }
        if (second0 == prep.train.size() || first1 == prep.train.size()) {
            throw std::invalid_argument("walk: need at least two class-0 samples and one class-1 sample");
        }
        emit_walk("walk_same_class.csv", first0, second0);
        emit_walk("walk_cross_class.csv", first0, first1);
    }

    return run.finish();
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<std::string>> parse_csv_text(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::stringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

RunResult run_report(const std::string& out_dir) {
    CommandOptions opts;
    RunWriter run(resolve_new_run_dir(out_dir, "report"), "report", nullptr, opts);

    std::ostringstream rep;
    rep << "deepconsensus run report\n";
    rep << "========================\n\n";

    const std::string train_dir = find_latest_run_dir(out_dir, "train");
    if (!train_dir.empty() && fs::exists(fs::path(train_dir) / "metrics.csv")) {
        rep << "individual models (" << train_dir << ")\n";
        auto rows = parse_csv_text(read_file((fs::path(train_dir) / "metrics.csv").string()));
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) rep << (i ? "  " : "  ") << row[i];
            rep << '\n';
        }
        rep << '\n';
    } else {
        rep << "train: not run\n\n";
    }

    const std::string cons_dir = find_latest_run_dir(out_dir, "consensus");
    if (!cons_dir.empty()) {
        rep << "consensus (" << cons_dir << ")\n";
        for (const auto& entry : fs::directory_iterator(cons_dir)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("curve_k", 0) != 0) continue;
            auto rows = parse_csv_text(read_file(entry.path().string()));
            for (std::size_t r = 1; r < rows.size(); ++r) {
                if (rows[r].size() >= 3 && rows[r][0] == "0.5") {
                    rep << "  " << name << " @ p_t=0.5: coverage=" << rows[r][1]
                        << " accuracy=" << rows[r][2] << '\n';
                }
            }
        }
        const fs::path ood = fs::path(cons_dir) / "ood_rejection.csv";
        if (fs::exists(ood)) {
            auto rows = parse_csv_text(read_file(ood.string()));
            for (std::size_t r = 1; r < rows.size(); ++r) {
                if (rows[r].size() >= 3 && rows[r][1] == "0.5") {
                    rep << "  ood rejection @ k=" << rows[r][0] << ", p_t=0.5: " << rows[r][2]
                        << '\n';
                }
            }
        }
        rep << '\n';
    } else {
        rep << "consensus: not run\n\n";
    }

    const std::string attack_dir = find_latest_run_dir(out_dir, "attack");
    if (!attack_dir.empty() && fs::exists(fs::path(attack_dir) / "transfer.csv")) {
        rep << "adversarial transfer (" << attack_dir << ")\n";
        auto rows = parse_csv_text(read_file((fs::path(attack_dir) / "transfer.csv").string()));
        for (std::size_t r = 1; r < rows.size(); ++r) {
            if (rows[r].size() >= 7) {
                rep << "  eps=" << rows[r][0] << ": source_acc=" << rows[r][2]
                    << " accepted_correct=" << rows[r][4] << " accepted_wrong=" << rows[r][5]
                    << " rejected=" << rows[r][6] << '\n';
            }
        }
        rep << '\n';
    } else {
        rep << "attack: not run\n\n";
    }

    const std::string interp_dir = find_latest_run_dir(out_dir, "interpret");
    if (!interp_dir.empty() && fs::exists(fs::path(interp_dir) / "feature_importance.csv")) {
        rep << "interpretability (" << interp_dir << ")\n";
        auto rows =
            parse_csv_text(read_file((fs::path(interp_dir) / "feature_importance.csv").string()));
        const std::size_t show = std::min<std::size_t>(rows.size(), 6);
        rep << "  strongest positive features:\n";
        for (std::size_t r = 1; r < show; ++r) {
            rep << "    " << rows[r][1] << " (" << rows[r][2] << ")\n";
        }
        if (rows.size() > 6) {
            rep << "  strongest negative features:\n";
            for (std::size_t r = std::max<std::size_t>(rows.size() - 5, 6); r < rows.size(); ++r) {
                rep << "    " << rows[r][1] << " (" << rows[r][2] << ")\n";
            }
        }
        const fs::path agree = fs::path(interp_dir) / "agreement.csv";
        if (fs::exists(agree)) {
            auto arows = parse_csv_text(read_file(agree.string()));
            for (std::size_t r = 1; r < arows.size(); ++r) {
                if (!arows[r].empty()) {
                    rep << "  agreement vs " << arows[r][0] << " (average): "
                        << arows[r].back() << '\n';
                }
            }
        }
        rep << '\n';
    } else {
        rep << "interpret: not run\n\n";
    }

    run.write("report.txt", rep.str());
    RunResult result = run.finish();
    std::cout << rep.str();
    return result;
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

RunResult run_command(const std::string& command, const std::string& config_path,
                      const CommandOptions& opts) {
    if (command == "report") {
        std::string out = opts.out_dir;
        if (out.empty() && !config_path.empty()) {
            out = load_config(config_path).output_dir;
        }
        if (out.empty()) {
            throw std::invalid_argument("report: pass --out or a config with output_dir");
        }
        return run_report(out);
    }

    if (config_path.empty()) {
        throw std::invalid_argument(command + ": a config file is required");
    }
    ExperimentConfig config = load_config(config_path);

    if (command == "train") return run_train(config, opts);
    if (command == "consensus") return run_consensus(config, opts);
    if (command == "attack") return run_attack(config, opts);
    if (command == "interpret") return run_interpret(config, opts);
    if (command == "walk") return run_walk(config, opts);
    throw std::invalid_argument("unknown command '" + command + "'");
}

}  // namespace dc
