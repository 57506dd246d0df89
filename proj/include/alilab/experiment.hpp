#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "alilab/checkpoint.hpp"
#include "alilab/config.hpp"
#include "alilab/dataset.hpp"
#include "alilab/mixture.hpp"
#include "alilab/run_io.hpp"

namespace alilab {

// The standardized grid mixture the config describes (centroids in [-1,1]^2
// under the default scale).
GaussianMixture data_mixture(const DataConfig& d);

Dataset make_train_dataset(const RunConfig& c); // seed stream kData
Dataset make_eval_dataset(const RunConfig& c);  // held-out split, stream kEvalData

struct RunResult {
    RunConfig config; // effective (defaults applied)
    RunPaths paths;
    std::vector<MetricsRow> metrics;
    Checkpoint final_checkpoint;
};

// Train one run: writes config.ini, metrics.csv, training_coverage.csv,
// checkpoints/, manifest.json under config.out. On a non-finite training value
// the manifest is flagged "aborted" (with the last good checkpoint) and the
// RuntimeAbort propagates.
RunResult run_training(const RunConfig& config);

// Fresh model samples [n, dim_x]: z ~ N(0, I) decoded; VAE adds its decoder
// noise; a conditional decoder gets uniformly drawn classes (z first, then
// class draws). `kind` picks the sampling rule, the widths come from the nets.
Tensor sample_from_model(const Checkpoint& ckpt, ModelKind kind, int n, int dim_z, Rng& rng);

// Conditional samples with the class held fixed.
Tensor sample_from_model_cond(const Checkpoint& ckpt, int class_id, int n, int dim_z, Rng& rng);

// Coverage on n_eval fresh samples (stream kEval). Optionally returns the
// samples and their component assignments for persistence/plotting.
ModeCoverageReport coverage_of(const Checkpoint& ckpt, const RunConfig& cfg, Tensor* samples_out,
                               std::vector<int>* modes_out);

// generate-data: dataset.csv (train), heldout.csv (eval split), mixture.json.
void run_generate_data(const RunConfig& config);

// eval: which in {coverage, recon, latent, interp, invert, all}; writes the
// report files under <run>/eval/ and logs one line per report.
void run_eval(const std::string& run_dir, const std::string& which, std::ostream& log);

// plot: per-run plots/figure.svg; a composite across runs is written to
// composite_out (a file path) when non-empty.
void run_plot(const std::vector<std::string>& run_dirs, const std::string& composite_out,
              std::ostream& log);

// oracle: tabular identity report on 100 random joints; returns the number of
// failed identities (0 expected).
int run_oracle(std::uint64_t seed, std::ostream& out);

struct SearchEntry {
    int run = 0;
    std::string dir;
    double lr = 0.0;
    double beta1 = 0.0;
    double init_sigma = 0.0;
    std::uint64_t seed = 0;
    bool failed = false;
    int covered = -1;
    double final_Ld = 0.0;
    double final_Lg = 0.0;
};

struct SearchStats {
    double mean = 0.0;
    double stddev = 0.0; // population std over successful runs
    int min = 0;
    int max = 0;
};

struct SearchResult {
    std::vector<SearchEntry> leaderboard; // covered desc, then final_Lg asc, then run asc
    SearchStats coverage;
};

// Randomized hyperparameter sweep: per run r, lr ~ log-U[1e-5, 1e-3],
// beta1 ~ U{0.5, 0.9}, init_sigma ~ log-U[0.003, 0.03] (stream kSearch + r),
// trained under seed base.seed + 1 + r in <out>/run_<r>. Writes
// <out>/leaderboard.json. Runs execute on a small worker pool; hyperparameters
// are drawn up front so results are scheduling-independent.
SearchResult run_search(const RunConfig& base, int n_runs, std::ostream& log);

} // namespace alilab
