#pragma once

#include <filesystem>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "coin/augment.hpp"
#include "coin/dataset.hpp"
#include "coin/eval.hpp"
#include "coin/graph.hpp"
#include "coin/model.hpp"
#include "coin/svm.hpp"

namespace coin {

namespace fs = std::filesystem;

/// Configuration problems that are the caller's fault (bad fields, missing
/// files named in the config). Mapped to exit code 1 by the CLI.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct DatasetSection {
    std::string generator = "two_moons";  // "two_moons" or "csv"
    std::string path;                     // source file when generator == "csv"
    std::size_t n_per_class = 150;
    double noise_sigma = 0.25;
    double rotation = 0.0;
    double test_fraction = 1.0 / 3.0;
    std::uint64_t seed = 0;
    std::uint64_t split_seed = 0;
};

struct GraphSection {
    std::size_t n_pos = 1;
    std::size_t n_neg = 4;
};

struct TrainSection {
    TrainConfig opt;
    std::vector<std::size_t> hidden = {32, 32};
    std::size_t latent = 16;
    std::uint64_t net_seed = 0;
};

struct SweepSection {
    std::vector<std::size_t> n_pos = {0, 1, 3, 5};
    std::vector<std::size_t> n_neg = {0, 1, 4, 8};
    std::vector<double> lambda = {0.0, 0.1, 1.0, 10.0};
    std::size_t seeds = 3;
};

/// One config drives the whole pipeline. Sub-seeds default to deterministic
/// derivations from the global seed; derive_seeds() materializes them, and
/// the fully resolved config is echoed into every run directory.
struct PipelineConfig {
    std::uint64_t seed = 1;
    std::string out_dir = "run";
    DatasetSection dataset;
    AugmentConfig augment;
    GraphSection graph;
    TrainSection train;
    SweepSection sweep;

    void derive_seeds() {
        dataset.seed = derive_seed(seed, 1);
        dataset.split_seed = derive_seed(seed, 2);
        augment.seed = derive_seed(seed, 3);
        augment.svm.seed = derive_seed(seed, 4);
        train.opt.seed = derive_seed(seed, 5);
        train.net_seed = derive_seed(seed, 6);
    }
};

inline nlohmann::json config_to_json(const PipelineConfig& cfg) {
    return nlohmann::json{
        {"seed", cfg.seed},
        {"out", cfg.out_dir},
        {"dataset",
         {{"generator", cfg.dataset.generator},
          {"path", cfg.dataset.path},
          {"n_per_class", cfg.dataset.n_per_class},
          {"noise_sigma", cfg.dataset.noise_sigma},
          {"rotation", cfg.dataset.rotation},
          {"test_fraction", cfg.dataset.test_fraction},
          {"seed", cfg.dataset.seed},
          {"split_seed", cfg.dataset.split_seed}}},
        {"augment",
         {{"batch_candidates", cfg.augment.batch_candidates},
          {"gamma", cfg.augment.gamma},
          {"noise_sigma", cfg.augment.noise_sigma},
          {"n_pos", cfg.augment.n_pos_total},
          {"n_neg", cfg.augment.n_neg_total},
          {"seed", cfg.augment.seed},
          {"svm",
           {{"epochs", cfg.augment.svm.epochs},
            {"eta0", cfg.augment.svm.eta0},
            {"decay", cfg.augment.svm.decay},
            {"reg", cfg.augment.svm.reg},
            {"seed", cfg.augment.svm.seed}}}}},
        {"graph", {{"n_pos", cfg.graph.n_pos}, {"n_neg", cfg.graph.n_neg}}},
        {"train",
         {{"lambda", cfg.train.opt.lambda},
          {"margin", cfg.train.opt.margin},
          {"epochs", cfg.train.opt.epochs},
          {"batch_size", cfg.train.opt.batch_size},
          {"eta0", cfg.train.opt.eta0},
          {"momentum", cfg.train.opt.momentum},
          {"lr_halving_period", cfg.train.opt.lr_halving_period},
          {"seed", cfg.train.opt.seed},
          {"hidden", cfg.train.hidden},
          {"latent", cfg.train.latent},
          {"net_seed", cfg.train.net_seed}}},
        {"sweep",
         {{"n_pos", cfg.sweep.n_pos},
          {"n_neg", cfg.sweep.n_neg},
          {"lambda", cfg.sweep.lambda},
          {"seeds", cfg.sweep.seeds}}}};
}

/// Snapshot embedded in metrics and sweep outputs: the resolved config minus
/// the output location, which does not affect any result.
inline nlohmann::json experiment_snapshot(const PipelineConfig& cfg) {
    nlohmann::json j = config_to_json(cfg);
    j.erase("out");
    return j;
}

namespace detail {

template <typename T>
void read_field(const nlohmann::json& j, const char* section, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config field ") + section + "." + key +
                          " has the wrong type");
    }
}

} // namespace detail

/// Parses a config JSON. Absent fields keep their defaults; absent sub-seeds
/// are derived from the (possibly overridden) global seed, while sub-seeds
/// given explicitly in the file win over the derivation.
inline PipelineConfig config_from_json(const nlohmann::json& j,
                                       std::optional<std::uint64_t> seed_override = std::nullopt,
                                       std::optional<std::string> out_override = std::nullopt) {
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    PipelineConfig cfg;
    detail::read_field(j, "", "seed", cfg.seed);
    detail::read_field(j, "", "out", cfg.out_dir);
    if (seed_override) cfg.seed = *seed_override;
    if (out_override) cfg.out_dir = *out_override;
    cfg.derive_seeds();

    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        detail::read_field(d, "dataset", "generator", cfg.dataset.generator);
        detail::read_field(d, "dataset", "path", cfg.dataset.path);
        detail::read_field(d, "dataset", "n_per_class", cfg.dataset.n_per_class);
        detail::read_field(d, "dataset", "noise_sigma", cfg.dataset.noise_sigma);
        detail::read_field(d, "dataset", "rotation", cfg.dataset.rotation);
        detail::read_field(d, "dataset", "test_fraction", cfg.dataset.test_fraction);
        detail::read_field(d, "dataset", "seed", cfg.dataset.seed);
        detail::read_field(d, "dataset", "split_seed", cfg.dataset.split_seed);
    }
    if (j.contains("augment")) {
        const auto& a = j.at("augment");
        detail::read_field(a, "augment", "batch_candidates", cfg.augment.batch_candidates);
        detail::read_field(a, "augment", "gamma", cfg.augment.gamma);
        detail::read_field(a, "augment", "noise_sigma", cfg.augment.noise_sigma);
        detail::read_field(a, "augment", "n_pos", cfg.augment.n_pos_total);
        detail::read_field(a, "augment", "n_neg", cfg.augment.n_neg_total);
        detail::read_field(a, "augment", "seed", cfg.augment.seed);
        if (a.contains("svm")) {
            const auto& s = a.at("svm");
            detail::read_field(s, "augment.svm", "epochs", cfg.augment.svm.epochs);
            detail::read_field(s, "augment.svm", "eta0", cfg.augment.svm.eta0);
            detail::read_field(s, "augment.svm", "decay", cfg.augment.svm.decay);
            detail::read_field(s, "augment.svm", "reg", cfg.augment.svm.reg);
            detail::read_field(s, "augment.svm", "seed", cfg.augment.svm.seed);
        }
    }
    if (j.contains("graph")) {
        const auto& g = j.at("graph");
        detail::read_field(g, "graph", "n_pos", cfg.graph.n_pos);
        detail::read_field(g, "graph", "n_neg", cfg.graph.n_neg);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        detail::read_field(t, "train", "lambda", cfg.train.opt.lambda);
        detail::read_field(t, "train", "margin", cfg.train.opt.margin);
        detail::read_field(t, "train", "epochs", cfg.train.opt.epochs);
        detail::read_field(t, "train", "batch_size", cfg.train.opt.batch_size);
        detail::read_field(t, "train", "eta0", cfg.train.opt.eta0);
        detail::read_field(t, "train", "momentum", cfg.train.opt.momentum);
        detail::read_field(t, "train", "lr_halving_period", cfg.train.opt.lr_halving_period);
        detail::read_field(t, "train", "seed", cfg.train.opt.seed);
        detail::read_field(t, "train", "hidden", cfg.train.hidden);
        detail::read_field(t, "train", "latent", cfg.train.latent);
        detail::read_field(t, "train", "net_seed", cfg.train.net_seed);
    }
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        detail::read_field(s, "sweep", "n_pos", cfg.sweep.n_pos);
        detail::read_field(s, "sweep", "n_neg", cfg.sweep.n_neg);
        detail::read_field(s, "sweep", "lambda", cfg.sweep.lambda);
        detail::read_field(s, "sweep", "seeds", cfg.sweep.seeds);
    }

    if (!(cfg.dataset.test_fraction > 0.0 && cfg.dataset.test_fraction < 1.0)) {
        throw ConfigError("config field dataset.test_fraction must lie in (0,1)");
    }
    if (cfg.dataset.n_per_class == 0) {
        throw ConfigError("config field dataset.n_per_class must be >= 1");
    }
    if (cfg.dataset.noise_sigma < 0.0) {
        throw ConfigError("config field dataset.noise_sigma must be >= 0");
    }
    if (cfg.augment.batch_candidates < 2) {
        throw ConfigError("config field augment.batch_candidates must be >= 2");
    }
    if (cfg.augment.gamma < 0.0) throw ConfigError("config field augment.gamma must be >= 0");
    if (cfg.augment.svm.epochs < 1) throw ConfigError("config field augment.svm.epochs must be >= 1");
    if (!(cfg.augment.svm.eta0 > 0.0)) throw ConfigError("config field augment.svm.eta0 must be > 0");
    if (cfg.train.opt.lambda < 0.0) throw ConfigError("config field train.lambda must be >= 0");
    if (!(cfg.train.opt.margin > 0.0)) throw ConfigError("config field train.margin must be > 0");
    if (cfg.train.opt.batch_size == 0) throw ConfigError("config field train.batch_size must be >= 1");
    if (cfg.train.latent == 0) throw ConfigError("config field train.latent must be >= 1");
    for (std::size_t w : cfg.train.hidden) {
        if (w == 0) throw ConfigError("config field train.hidden must contain positive widths");
    }
    if (cfg.dataset.generator != "two_moons" && cfg.dataset.generator != "csv") {
        throw ConfigError("config field dataset.generator must be 'two_moons' or 'csv'");
    }
    if (cfg.dataset.generator == "csv" && cfg.dataset.path.empty()) {
        throw ConfigError("config field dataset.path is required when dataset.generator is 'csv'");
    }
    return cfg;
}

inline PipelineConfig load_pipeline_config(const fs::path& path,
                                           std::optional<std::uint64_t> seed_override = std::nullopt,
                                           std::optional<std::string> out_override = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    return config_from_json(j, seed_override, out_override);
}

/// Conventional artifact names inside a run directory.
struct RunPaths {
    fs::path dir;
    fs::path resolved_config, train_csv, test_csv, dataset_meta, scaler, augmented, graph,
        checkpoint, history, metrics, projection, sweep_raw, sweep_summary;

    explicit RunPaths(const fs::path& d)
        : dir(d),
          resolved_config(d / "resolved_config.json"),
          train_csv(d / "train.csv"),
          test_csv(d / "test.csv"),
          dataset_meta(d / "dataset_meta.json"),
          scaler(d / "scaler.json"),
          augmented(d / "augmented.csv"),
          graph(d / "graph.csv"),
          checkpoint(d / "checkpoint.json"),
          history(d / "history.csv"),
          metrics(d / "metrics.json"),
          projection(d / "projection.csv"),
          sweep_raw(d / "sweep_raw.csv"),
          sweep_summary(d / "sweep_summary.csv") {}
};

inline void write_resolved_config(const PipelineConfig& cfg) {
    const RunPaths paths{cfg.out_dir};
    fs::create_directories(paths.dir);
    std::ofstream out(paths.resolved_config, std::ios::binary);
    if (!out) throw DataError("cannot write " + paths.resolved_config.string());
    out << config_to_json(cfg).dump(2) << '\n';
}

// ---- pure steps shared by the staged commands and the in-memory runner ----

inline std::pair<LabeledDataset, LabeledDataset> make_dataset(const DatasetSection& ds) {
    LabeledDataset full;
    if (ds.generator == "two_moons") {
        full = generate_entangled_manifolds(ds.n_per_class, ds.noise_sigma, ds.rotation, ds.seed);
    } else {
        if (!fs::exists(ds.path)) throw ConfigError("dataset.path does not exist: " + ds.path);
        full = load_dataset(ds.path);
    }
    return split(full, ds.test_fraction, ds.split_seed);
}

struct RunOutcome {
    MetricsReport metrics;
    std::vector<EpochLosses> history;
};

inline MetricsReport compute_metrics(const EmbeddingNetwork& net, const LabeledDataset& test_std,
                                     const nlohmann::json& config_snapshot) {
    if (test_std.num_classes() != 2) {
        throw DataError("evaluation expects a binary problem, got " +
                        std::to_string(test_std.num_classes()) + " classes");
    }
    std::vector<int> preds;
    std::vector<double> class1_scores;
    std::vector<FeatureVector> latents;
    for (const auto& x : test_std.samples) {
        auto out = net.forward(x);
        std::size_t best = 0;
        for (std::size_t c = 1; c < out.probs.size(); ++c) {
            if (out.probs[c] > out.probs[best]) best = c;
        }
        preds.push_back(static_cast<int>(best));
        class1_scores.push_back(out.probs[1]);
        latents.push_back(std::move(out.latent));
    }

    MetricsReport report;
    report.accuracy = accuracy(preds, test_std.labels);
    report.auc = auc(class1_scores, test_std.labels);
    const MarginStats margins = margin_stats(latents, test_std.labels);
    report.intra_mean = margins.intra_mean;
    report.inter_mean = margins.inter_mean;
    report.margin_ratio = margins.margin_ratio;
    report.margin_degenerate = margins.degenerate;
    report.n_test = test_std.size();
    report.config_snapshot = config_snapshot;
    return report;
}

/// End-to-end run without touching the filesystem; the staged commands below
/// produce identical results through full-precision artifacts.
inline RunOutcome run_in_memory(const PipelineConfig& cfg) {
    auto [train_raw, test_raw] = make_dataset(cfg.dataset);
    const Standardizer scaler = Standardizer::fit(train_raw);
    const LabeledDataset train_std = scaler.apply(train_raw);
    const LabeledDataset test_std = scaler.apply(test_raw);

    const AugmentedDataset aug = expand_dataset(train_std, cfg.augment);
    const SignedGraph graph = SignedGraph::build(aug, cfg.graph.n_pos, cfg.graph.n_neg);

    EmbeddingNetwork net(aug.dim(), cfg.train.hidden, cfg.train.latent,
                         static_cast<std::size_t>(aug.num_classes()), cfg.train.net_seed);
    TrainedModel model = train(std::move(net), aug, graph, cfg.train.opt);

    RunOutcome outcome;
    outcome.metrics = compute_metrics(model.net, test_std, experiment_snapshot(cfg));
    outcome.history = std::move(model.history);
    return outcome;
}

// ---- staged commands; each reads its inputs from the run directory ----

inline void stage_gen_data(const PipelineConfig& cfg) {
    const RunPaths paths{cfg.out_dir};
    fs::create_directories(paths.dir);
    auto [train_raw, test_raw] = make_dataset(cfg.dataset);
    save_dataset(train_raw, paths.train_csv);
    save_dataset(test_raw, paths.test_csv);
    std::ofstream meta(paths.dataset_meta, std::ios::binary);
    if (!meta) throw DataError("cannot write " + paths.dataset_meta.string());
    meta << config_to_json(cfg)["dataset"].dump(2) << '\n';
}

inline void stage_augment(const PipelineConfig& cfg) {
    const RunPaths paths{cfg.out_dir};
    const LabeledDataset train_raw = load_dataset(paths.train_csv);
    const Standardizer scaler = Standardizer::fit(train_raw);
    {
        std::ofstream out(paths.scaler, std::ios::binary);
        if (!out) throw DataError("cannot write " + paths.scaler.string());
        out << nlohmann::json{{"means", scaler.means()}, {"stds", scaler.stds()}}.dump(2) << '\n';
    }
    const AugmentedDataset aug = expand_dataset(scaler.apply(train_raw), cfg.augment);
    save_augmented(aug, paths.augmented);
}

inline Standardizer load_scaler(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
        return Standardizer(j.at("means").get<FeatureVector>(), j.at("stds").get<FeatureVector>());
    } catch (const nlohmann::json::exception& e) {
        throw DataError("scaler file " + path.string() + ": " + e.what());
    }
}

inline void stage_graph(const PipelineConfig& cfg) {
    const RunPaths paths{cfg.out_dir};
    const AugmentedDataset aug = load_augmented(paths.augmented);
    save_graph(SignedGraph::build(aug, cfg.graph.n_pos, cfg.graph.n_neg), paths.graph);
}

inline void stage_train(const PipelineConfig& cfg) {
    const RunPaths paths{cfg.out_dir};
    const AugmentedDataset aug = load_augmented(paths.augmented);
    const SignedGraph graph = load_graph(paths.graph, aug, cfg.graph.n_pos, cfg.graph.n_neg);
    EmbeddingNetwork net(aug.dim(), cfg.train.hidden, cfg.train.latent,
                         static_cast<std::size_t>(aug.num_classes()), cfg.train.net_seed);
    const TrainedModel model = train(std::move(net), aug, graph, cfg.train.opt);
    save_checkpoint(model.net, paths.checkpoint);
    save_history(model.history, paths.history);
}

inline void stage_eval(const PipelineConfig& cfg) {
    const RunPaths paths{cfg.out_dir};
    const EmbeddingNetwork net = load_checkpoint(paths.checkpoint);
    const Standardizer scaler = load_scaler(paths.scaler);
    const LabeledDataset test_std = scaler.apply(load_dataset(paths.test_csv));
    const MetricsReport report = compute_metrics(net, test_std, experiment_snapshot(cfg));
    save_metrics(report, paths.metrics);

    // projection: expanded training nodes plus held-out points, one PCA basis
    const AugmentedDataset aug = load_augmented(paths.augmented);
    std::vector<FeatureVector> latents;
    std::vector<int> labels;
    std::vector<std::string> kinds;
    for (std::size_t i = 0; i < aug.node_count(); ++i) {
        latents.push_back(net.forward(aug.point(i)).latent);
        labels.push_back(aug.node(i).class_id);
        kinds.emplace_back(point_kind_name(aug.node(i).kind));
    }
    for (std::size_t i = 0; i < test_std.size(); ++i) {
        latents.push_back(net.forward(test_std.samples[i]).latent);
        labels.push_back(test_std.labels[i]);
        kinds.emplace_back("test");
    }
    const PcaProjection proj = pca_project(latents, 2);
    save_projection(proj.coords, labels, kinds, paths.projection);
}

inline void run_all(const PipelineConfig& cfg) {
    write_resolved_config(cfg);
    stage_gen_data(cfg);
    stage_augment(cfg);
    stage_graph(cfg);
    stage_train(cfg);
    stage_eval(cfg);
}

// ---- hyperparameter sweep over (n_pos, n_neg, lambda) x seeds ----

struct SweepRow {
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    double lambda = 0.0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double accuracy = 0.0;
    double auc = 0.0;
    double margin_ratio = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

/// Grid rows run in sorted (n_pos, n_neg, lambda) order, each aggregated over
/// cfg.sweep.seeds consecutive global seeds. A failing configuration is
/// recorded and the sweep continues. The (0,0) graph configuration drops the
/// augmentation too, so that row is the plain unaugmented baseline.
inline SweepResult run_sweep(const PipelineConfig& cfg) {
    if (cfg.sweep.n_pos.empty() || cfg.sweep.n_neg.empty() || cfg.sweep.lambda.empty() ||
        cfg.sweep.seeds == 0) {
        throw ConfigError("sweep grid must be non-empty and sweep.seeds >= 1");
    }
    auto n_pos_grid = cfg.sweep.n_pos;
    auto n_neg_grid = cfg.sweep.n_neg;
    auto lambda_grid = cfg.sweep.lambda;
    std::sort(n_pos_grid.begin(), n_pos_grid.end());
    std::sort(n_neg_grid.begin(), n_neg_grid.end());
    std::sort(lambda_grid.begin(), lambda_grid.end());

    SweepResult result;
    for (std::size_t np : n_pos_grid) {
        for (std::size_t nn : n_neg_grid) {
            for (double lambda : lambda_grid) {
                for (std::size_t s = 0; s < cfg.sweep.seeds; ++s) {
                    PipelineConfig sub = cfg;
                    sub.graph.n_pos = np;
                    sub.graph.n_neg = nn;
                    sub.train.opt.lambda = lambda;
                    if (np == 0 && nn == 0) {
                        sub.augment.n_pos_total = 0;
                        sub.augment.n_neg_total = 0;
                    }
                    sub.seed = cfg.seed + s;
                    sub.derive_seeds();

                    SweepRow row;
                    row.n_pos = np;
                    row.n_neg = nn;
                    row.lambda = lambda;
                    row.seed = sub.seed;
                    try {
                        const RunOutcome outcome = run_in_memory(sub);
                        row.ok = true;
                        row.accuracy = outcome.metrics.accuracy;
                        row.auc = outcome.metrics.auc;
                        row.margin_ratio = outcome.metrics.margin_ratio;
                    } catch (const std::exception& e) {
                        row.ok = false;
                        row.error = e.what();
                    }
                    result.rows.push_back(std::move(row));
                }
            }
        }
    }
    return result;
}

inline void save_sweep(const SweepResult& result, const RunPaths& paths) {
    {
        std::ofstream out(paths.sweep_raw, std::ios::binary);
        if (!out) throw DataError("cannot write " + paths.sweep_raw.string());
        out << "n_pos,n_neg,lambda,seed,status,accuracy,auc,margin_ratio\n";
        for (const auto& r : result.rows) {
            out << r.n_pos << ',' << r.n_neg << ',' << format_double(r.lambda) << ',' << r.seed
                << ',';
            if (r.ok) {
                out << "ok," << format_double(r.accuracy) << ',' << format_double(r.auc) << ','
                    << format_double(r.margin_ratio) << '\n';
            } else {
                out << "failed,,,\n";
            }
        }
    }
    {
        std::ofstream out(paths.sweep_summary, std::ios::binary);
        if (!out) throw DataError("cannot write " + paths.sweep_summary.string());
        out << "n_pos,n_neg,lambda,runs,failures,acc_mean,acc_std,auc_mean,auc_std,"
               "margin_ratio_mean,margin_ratio_std\n";
        std::size_t i = 0;
        while (i < result.rows.size()) {
            std::size_t j = i;
            const auto& head = result.rows[i];
            std::vector<double> accs, aucs, ratios;
            std::size_t failures = 0;
            while (j < result.rows.size() && result.rows[j].n_pos == head.n_pos &&
                   result.rows[j].n_neg == head.n_neg && result.rows[j].lambda == head.lambda) {
                if (result.rows[j].ok) {
                    accs.push_back(result.rows[j].accuracy);
                    aucs.push_back(result.rows[j].auc);
                    ratios.push_back(result.rows[j].margin_ratio);
                } else {
                    ++failures;
                }
                ++j;
            }
            auto mean_std = [](const std::vector<double>& v) -> std::pair<double, double> {
                if (v.empty()) return {0.0, 0.0};
                double m = 0.0;
                for (double x : v) m += x;
                m /= static_cast<double>(v.size());
                if (v.size() < 2) return {m, 0.0};
                double var = 0.0;
                for (double x : v) var += (x - m) * (x - m);
                return {m, std::sqrt(var / static_cast<double>(v.size() - 1))};
            };
            const auto [am, as] = mean_std(accs);
            const auto [um, us] = mean_std(aucs);
            const auto [rm, rs] = mean_std(ratios);
            out << head.n_pos << ',' << head.n_neg << ',' << format_double(head.lambda) << ','
                << (j - i) << ',' << failures << ',' << format_double(am) << ','
                << format_double(as) << ',' << format_double(um) << ',' << format_double(us) << ','
                << format_double(rm) << ',' << format_double(rs) << '\n';
            i = j;
        }
    }
}

inline SweepResult stage_sweep(const PipelineConfig& cfg) {
    const RunPaths paths{cfg.out_dir};
    fs::create_directories(paths.dir);
    SweepResult result = run_sweep(cfg);
    save_sweep(result, paths);
    return result;
}

} // namespace coin
