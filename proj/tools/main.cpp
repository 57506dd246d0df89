#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "alilab/config.hpp"
#include "alilab/error.hpp"
#include "alilab/experiment.hpp"
#include "alilab/run_io.hpp"
#include "alilab/text.hpp"

namespace {

using namespace alilab;

// Flag values shared by the config-driven subcommands; only flags the user
// actually passed override the config file.
struct ConfigFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out;
    std::string model;
    int steps = 0;
    CLI::Option* config_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* model_opt = nullptr;
    CLI::Option* steps_opt = nullptr;

    void attach(CLI::App* cmd, bool with_model_and_steps) {
        config_opt = cmd->add_option("--config", config_path, "config file (key = value text)");
        seed_opt = cmd->add_option("--seed", seed, "run seed");
        out_opt = cmd->add_option("--out", out, "output directory");
        if (with_model_and_steps) {
            model_opt = cmd->add_option("--model", model,
                                        "ali|gan|vae|invmap|posthoc|cond-ali|semisup");
            steps_opt = cmd->add_option("--steps", steps, "training step budget");
        }
    }

    RunConfig build() const {
        RunConfig cfg;
        if (config_opt->count()) cfg = load_config_file(config_path);
        if (seed_opt->count()) cfg.seed = seed;
        if (out_opt->count()) cfg.out = out;
        if (model_opt && model_opt->count()) cfg.model = model_kind_from_name(model);
        if (steps_opt && steps_opt->count()) cfg.steps = steps;
        apply_model_defaults(cfg);
        validate_config(cfg);
        return cfg;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ali-lab: adversarially learned inference on a 2-D Gaussian-mixture toy"};
    app.require_subcommand(1);

    CLI::App* gen = app.add_subcommand(
        "generate-data", "write dataset.csv, heldout.csv and mixture.json for a config");
    ConfigFlags gen_flags;
    gen_flags.attach(gen, true);

    CLI::App* train =
        app.add_subcommand("train", "train one run; writes metrics, checkpoints and a manifest");
    ConfigFlags train_flags;
    train_flags.attach(train, true);

    CLI::App* search = app.add_subcommand(
        "search", "randomized hyperparameter sweep; writes per-run dirs and leaderboard.json");
    ConfigFlags search_flags;
    search_flags.attach(search, true);
    int runs = 10;
    search->add_option("--runs", runs, "number of sweep runs (default 10)");

    CLI::App* eval =
        app.add_subcommand("eval", "evaluate a finished run; writes reports under <run>/eval/");
    std::string eval_run_dir;
    std::string which = "all";
    eval->add_option("run_dir", eval_run_dir, "run directory (from `train`)")->required();
    eval->add_option("--which", which, "coverage|recon|latent|interp|invert|all (default all)");

    CLI::App* plot = app.add_subcommand(
        "plot", "render plots/figure.svg per run (and a composite with --out)");
    std::vector<std::string> plot_run_dirs;
    std::string plot_out;
    plot->add_option("run_dirs", plot_run_dirs, "run directories")->required()->expected(-1);
    plot->add_option("--out", plot_out, "directory for the cross-run composite.svg");

    CLI::App* oracle = app.add_subcommand(
        "oracle", "verify the tabular discriminator/value identities on random joints");
    std::uint64_t oracle_seed = 1;
    oracle->add_option("--seed", oracle_seed, "seed for the random joints (default 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) {
            const RunConfig cfg = gen_flags.build();
            run_generate_data(cfg);
            std::cout << "wrote " << cfg.data.n_train << " train and " << cfg.data.n_eval
                      << " held-out samples under " << cfg.out << "\n";
        } else if (train->parsed()) {
            const RunResult result = run_training(train_flags.build());
            std::cout << "completed " << result.config.steps << " steps of "
                      << model_kind_name(result.config.model) << " (seed " << result.config.seed
                      << ") in " << result.paths.root.string() << "\n";
            if (!result.metrics.empty()) {
                const MetricsRow& last = result.metrics.back();
                std::cout << "final: Ld=" << format_double(last.m.Ld, 6)
                          << " Lg=" << format_double(last.m.Lg, 6)
                          << " mean_Dq=" << format_double(last.m.mean_Dq, 6)
                          << " mean_Dp=" << format_double(last.m.mean_Dp, 6) << "\n";
            }
        } else if (search->parsed()) {
            const SearchResult result = run_search(search_flags.build(), runs, std::cout);
            const SearchEntry& best = result.leaderboard.front();
            std::cout << "best run: " << best.dir << " covered " << best.covered << "\n";
        } else if (eval->parsed()) {
            run_eval(eval_run_dir, which, std::cout);
        } else if (plot->parsed()) {
            std::string composite;
            if (!plot_out.empty())
                composite = (std::filesystem::path(plot_out) / "composite.svg").string();
            run_plot(plot_run_dirs, composite, std::cout);
        } else if (oracle->parsed()) {
            run_oracle(oracle_seed, std::cout);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const RuntimeAbort& e) {
        std::cerr << "runtime abort: " << e.what() << "\n";
        return 3;
    } catch (const ArtifactError& e) {
        std::cerr << "artifact error: " << e.what() << "\n";
        return 4;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
