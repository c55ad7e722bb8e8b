// Pipeline driver: staged commands, a full run, and the hyperparameter sweep.
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 divergence.

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "coin/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "pipeline config JSON");
    cmd->add_option("--seed", args.seed, "override the global seed");
    cmd->add_option("--out", args.out, "override the run directory");
}

coin::PipelineConfig resolve(const CommonArgs& args) {
    if (!args.config_path.empty()) {
        return coin::load_pipeline_config(args.config_path, args.seed, args.out);
    }
    coin::PipelineConfig cfg;
    if (args.seed) cfg.seed = *args.seed;
    if (args.out) cfg.out_dir = *args.out;
    cfg.derive_seeds();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"COIN pipeline: adversarial neighbor augmentation, signed k-NN graph, "
                 "contrastive embedding training and evaluation"};
    app.require_subcommand(1);

    struct Command {
        const char* name;
        const char* help;
        void (*run)(const coin::PipelineConfig&);
    };
    const Command commands[] = {
        {"gen-data", "generate (or import) and split the dataset",
         [](const coin::PipelineConfig& cfg) { coin::stage_gen_data(cfg); }},
        {"augment", "standardize the training split and generate neighbors",
         [](const coin::PipelineConfig& cfg) { coin::stage_augment(cfg); }},
        {"graph", "build the signed k-NN graph over the expanded dataset",
         [](const coin::PipelineConfig& cfg) { coin::stage_graph(cfg); }},
        {"train", "train the embedding network on the expanded dataset",
         [](const coin::PipelineConfig& cfg) { coin::stage_train(cfg); }},
        {"eval", "compute metrics and export the latent projection",
         [](const coin::PipelineConfig& cfg) { coin::stage_eval(cfg); }},
        {"run-all", "run every stage into one run directory",
         [](const coin::PipelineConfig& cfg) { coin::run_all(cfg); }},
        {"sweep", "grid over (n_pos, n_neg, lambda) x seeds",
         [](const coin::PipelineConfig& cfg) { coin::stage_sweep(cfg); }},
    };

    CommonArgs args;
    const Command* selected = nullptr;
    for (const auto& cmd : commands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        add_common(sub, args);
        sub->callback([&selected, &cmd]() { selected = &cmd; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const coin::PipelineConfig cfg = resolve(args);
        coin::write_resolved_config(cfg);
        selected->run(cfg);
        std::printf("%s: done, artifacts in %s\n", selected->name, cfg.out_dir.c_str());
        return 0;
    } catch (const coin::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const coin::DivergenceError& e) {
        std::fprintf(stderr, "divergence: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
