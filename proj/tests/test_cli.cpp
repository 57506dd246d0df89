#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "alilab/checkpoint.hpp"
#include "alilab/run_io.hpp"
#include "test_util.hpp"

using namespace alilab;
namespace fs = std::filesystem;

#ifndef ALILAB_CLI_PATH
#error "ALILAB_CLI_PATH must point at the ali-lab executable"
#endif

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + ALILAB_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

// A configuration small enough to train in well under a second.
std::string tiny_config(const std::string& model, const fs::path& out,
                        const std::string& extra = "") {
    return "model = " + model +
           "\n"
           "seed = 5\n"
           "steps = 60\n"
           "batch = 16\n"
           "out = " +
           out.string() +
           "\n" +
           extra +
           "[data]\n"
           "n_train = 400\n"
           "n_eval = 200\n"
           "[encoder]\n"
           "hidden = 8\n"
           "[decoder]\n"
           "hidden = 8\n"
           "[discriminator]\n"
           "hidden = 8\n"
           "[train]\n"
           "eval_every = 30\n"
           "checkpoint_every = 30\n";
}

} // namespace

TEST_CASE("generate-data writes a deterministic dataset") {
    const auto dir = testutil::scratch_dir("cli_data");
    const auto cfg = dir / "cfg.ini";
    write_file(cfg, "model = ali\nseed = 9\nout = " + (dir / "d1").string() +
                        "\n[data]\nn_train = 300\nn_eval = 100\n");
    REQUIRE(run_cli("generate-data --config " + cfg.string()) == 0);
    CHECK(fs::exists(dir / "d1" / "dataset.csv"));
    CHECK(fs::exists(dir / "d1" / "heldout.csv"));
    CHECK(fs::exists(dir / "d1" / "mixture.json"));

    const auto cfg2 = dir / "cfg2.ini";
    write_file(cfg2, "model = ali\nseed = 9\nout = " + (dir / "d2").string() +
                         "\n[data]\nn_train = 300\nn_eval = 100\n");
    REQUIRE(run_cli("generate-data --config " + cfg2.string()) == 0);
    CHECK(read_text_file(dir / "d1" / "dataset.csv") == read_text_file(dir / "d2" / "dataset.csv"));
    CHECK(read_text_file(dir / "d1" / "mixture.json") ==
          read_text_file(dir / "d2" / "mixture.json"));
}

TEST_CASE("train produces the documented artifacts and reruns byte-identically") {
    const auto dir = testutil::scratch_dir("cli_train");
    const auto cfg_a = dir / "a.ini";
    const auto cfg_b = dir / "b.ini";
    write_file(cfg_a, tiny_config("ali", dir / "run_a"));
    write_file(cfg_b, tiny_config("ali", dir / "run_b"));

    REQUIRE(run_cli("train --config " + cfg_a.string()) == 0);
    const RunPaths paths = run_paths(dir / "run_a");
    CHECK(fs::exists(paths.config));
    CHECK(fs::exists(paths.metrics));
    CHECK(fs::exists(paths.manifest));
    CHECK(fs::exists(paths.final_checkpoint));
    CHECK(fs::exists(paths.training_eval));
    CHECK(fs::exists(paths.checkpoints_dir / "step_00000030.json"));

    const std::string manifest = read_text_file(paths.manifest);
    CHECK(manifest.find("\"status\": \"completed\"") != std::string::npos);

    const Checkpoint final = load_checkpoint(paths.final_checkpoint);
    CHECK(final.model_kind == "ali");
    CHECK(final.step == 60);
    CHECK(final.has_network("encoder"));
    CHECK(final.has_network("decoder"));
    CHECK(final.has_network("discriminator"));

    // metrics have one row per step plus the header
    const std::string metrics = read_text_file(paths.metrics);
    int lines = 0;
    for (char ch : metrics) lines += (ch == '\n') ? 1 : 0;
    CHECK(lines == 61);

    REQUIRE(run_cli("train --config " + cfg_b.string()) == 0);
    CHECK(metrics == read_text_file(run_paths(dir / "run_b").metrics));
    CHECK(read_text_file(paths.training_eval) ==
          read_text_file(run_paths(dir / "run_b").training_eval));
}

TEST_CASE("eval writes reports and plot renders them") {
    const auto dir = testutil::scratch_dir("cli_eval");
    const auto cfg = dir / "cfg.ini";
    write_file(cfg, tiny_config("ali", dir / "run"));
    REQUIRE(run_cli("train --config " + cfg.string()) == 0);

    SUBCASE("plot before eval names the missing artifacts") {
        CHECK(run_cli("plot " + (dir / "run").string()) == 4);
    }

    REQUIRE(run_cli("eval " + (dir / "run").string() + " --which all") == 0);
    for (const char* f : {"coverage.json", "coverage_samples.csv", "recon.json",
                          "recon_pairs.csv", "latent.json", "latent_zhat.csv", "interp.csv",
                          "invert.json"})
        CHECK(fs::exists(dir / "run" / "eval" / f));

    // eval is deterministic too: rerun and compare one report byte-for-byte
    const std::string latent_first = read_text_file(dir / "run" / "eval" / "latent.json");
    REQUIRE(run_cli("eval " + (dir / "run").string() + " --which latent") == 0);
    CHECK(read_text_file(dir / "run" / "eval" / "latent.json") == latent_first);

    REQUIRE(run_cli("plot " + (dir / "run").string()) == 0);
    CHECK(fs::exists(dir / "run" / "plots" / "figure.svg"));
    const std::string svg = read_text_file(dir / "run" / "plots" / "figure.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
}

TEST_CASE("sample-space runs skip encoder reports unless asked explicitly") {
    const auto dir = testutil::scratch_dir("cli_gan");
    const auto cfg = dir / "cfg.ini";
    write_file(cfg, tiny_config("gan", dir / "run"));
    REQUIRE(run_cli("train --config " + cfg.string()) == 0);
    REQUIRE(run_cli("eval " + (dir / "run").string() + " --which all") == 0);
    CHECK(fs::exists(dir / "run" / "eval" / "coverage.json"));
    CHECK_FALSE(fs::exists(dir / "run" / "eval" / "recon.json"));
    // asking for an encoder report explicitly is an artifact error
    CHECK(run_cli("eval " + (dir / "run").string() + " --which recon") == 4);
}

TEST_CASE("frozen-decoder training consumes a donor checkpoint") {
    const auto dir = testutil::scratch_dir("cli_frozen");
    const auto gan_cfg = dir / "gan.ini";
    write_file(gan_cfg, tiny_config("gan", dir / "gan"));
    REQUIRE(run_cli("train --config " + gan_cfg.string()) == 0);

    const auto ph_cfg = dir / "ph.ini";
    write_file(ph_cfg,
               tiny_config("posthoc", dir / "ph",
                           "decoder_checkpoint = " +
                               (dir / "gan" / "checkpoints" / "final.json").string() + "\n"));
    REQUIRE(run_cli("train --config " + ph_cfg.string()) == 0);
    CHECK(fs::exists(dir / "ph" / "checkpoints" / "final.json"));

    SUBCASE("missing checkpoint path fails validation") {
        const auto bad_cfg = dir / "bad.ini";
        write_file(bad_cfg, tiny_config("posthoc", dir / "bad"));
        CHECK(run_cli("train --config " + bad_cfg.string()) == 2);
    }
    SUBCASE("dangling checkpoint path is an artifact error") {
        const auto bad_cfg = dir / "bad2.ini";
        write_file(bad_cfg, tiny_config("posthoc", dir / "bad2",
                                        "decoder_checkpoint = /nonexistent/final.json\n"));
        CHECK(run_cli("train --config " + bad_cfg.string()) == 4);
    }
}

TEST_CASE("cli exit codes map the error taxonomy") {
    const auto dir = testutil::scratch_dir("cli_err");
    SUBCASE("bad flags") {
        CHECK(run_cli("train --no-such-flag") == 2);
        CHECK(run_cli("frobnicate") == 2);
    }
    SUBCASE("unreadable config") {
        CHECK(run_cli("train --config /nonexistent.ini") == 2);
    }
    SUBCASE("bad config contents") {
        const auto cfg = dir / "bad.ini";
        write_file(cfg, "model = warp-drive\n");
        CHECK(run_cli("train --config " + cfg.string()) == 2);
    }
    SUBCASE("eval on a directory that is not a run") {
        CHECK(run_cli("eval " + (dir / "not_a_run").string()) == 4);
    }
    SUBCASE("oracle runs clean") {
        CHECK(run_cli("oracle --seed 3") == 0);
    }
}

TEST_CASE("search writes a leaderboard over its runs") {
    const auto dir = testutil::scratch_dir("cli_search");
    const auto cfg = dir / "cfg.ini";
    write_file(cfg, tiny_config("ali", dir / "sweep"));
    REQUIRE(run_cli("search --config " + cfg.string() + " --runs 2") == 0);
    CHECK(fs::exists(dir / "sweep" / "run_00" / "metrics.csv"));
    CHECK(fs::exists(dir / "sweep" / "run_01" / "metrics.csv"));
    const std::string lb = read_text_file(dir / "sweep" / "leaderboard.json");
    CHECK(lb.find("\"n_runs\": 2") != std::string::npos);
    CHECK(lb.find("coverage_stats") != std::string::npos);
    CHECK(lb.find("\"best\"") != std::string::npos);

    // deterministic leaderboard on rerun
    const auto cfg2 = dir / "cfg2.ini";
    write_file(cfg2, tiny_config("ali", dir / "sweep2"));
    REQUIRE(run_cli("search --config " + cfg2.string() + " --runs 2") == 0);
    const std::string lb2 = read_text_file(dir / "sweep2" / "leaderboard.json");
    // identical except for the out-dir paths; compare the metrics files instead
    CHECK(read_text_file(dir / "sweep" / "run_00" / "metrics.csv") ==
          read_text_file(dir / "sweep2" / "run_00" / "metrics.csv"));
    CHECK(lb2.find("\"n_runs\": 2") != std::string::npos);
}
