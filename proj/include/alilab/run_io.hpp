#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "alilab/ali.hpp"
#include "alilab/config.hpp"
#include "alilab/eval.hpp"

namespace alilab {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr int kManifestFormatVersion = 1;
inline constexpr const char* kMetricsHeader = "step,Ld,Lg,mean_Dq,mean_Dp";

// Stable layout under one run directory.
struct RunPaths {
    std::filesystem::path root;
    std::filesystem::path config;          // config.ini (effective, canonical)
    std::filesystem::path manifest;        // manifest.json
    std::filesystem::path metrics;         // metrics.csv
    std::filesystem::path training_eval;   // training_coverage.csv (snapshot cadence)
    std::filesystem::path checkpoints_dir; // checkpoints/
    std::filesystem::path final_checkpoint;// checkpoints/final.json
    std::filesystem::path eval_dir;        // eval/
    std::filesystem::path plots_dir;       // plots/
};
RunPaths run_paths(const std::filesystem::path& run_dir);

void ensure_dir(const std::filesystem::path& dir);             // IoError on failure
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path); // ArtifactError if missing

struct MetricsRow {
    long long step = 0;
    StepMetrics m;
};
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);

// What the four metric columns mean for a given trainer kind (recorded in the
// manifest; adversarial kinds use the Algorithm losses, the others reuse the
// columns as documented here).
struct MetricsSemantics {
    std::string Ld, Lg, mean_Dq, mean_Dp;
};
MetricsSemantics metrics_semantics(ModelKind kind);

struct RunManifest {
    std::string status = "incomplete"; // incomplete | completed | aborted
    ModelKind model = ModelKind::kAli;
    std::uint64_t seed = 0;
    int steps = 0;
    int batch = 0;
    std::string config_text;
    std::string started_at;  // ISO 8601 UTC; excluded from determinism claims
    std::string finished_at;
    bool has_final = false;
    MetricsRow final_row;
    std::vector<std::string> checkpoints; // relative to checkpoints/
    std::string abort_message;
    std::string last_good_checkpoint;
};
std::string manifest_to_json(const RunManifest& m);
// Atomic (tmp + rename) so a crash never leaves a truncated manifest.
void write_manifest(const RunPaths& paths, const RunManifest& m);

std::string now_iso8601_utc();

// --- eval report files (under <run>/eval/) ---

// coverage.json holds exactly n_samples, counts, covered, dropped;
// the samples themselves go to coverage_samples.csv (x0,x1,mode).
void write_coverage_report(const std::filesystem::path& eval_dir, const ModeCoverageReport& report,
                           const Tensor& samples, const std::vector<int>& modes);
// recon.json {n, mse} + recon_pairs.csv (x0,x1,xhat0,xhat1).
void write_recon_report(const std::filesystem::path& eval_dir, const Tensor& x,
                        const ReconReport& report);
// latent.json {mean, cov, moment_distance} + latent_zhat.csv (z0,z1,...).
void write_latent_report(const std::filesystem::path& eval_dir, const OccupancyReport& report);
// interp.csv (pair,t,x0,x1); path_points[p] holds the decoded path for pair p.
void write_interp_csv(const std::filesystem::path& eval_dir,
                      const std::vector<Tensor>& path_points);
// invert.json {x_cycle_mse, z_cycle_mse}.
void write_invert_report(const std::filesystem::path& eval_dir, const CycleReport& report);

} // namespace alilab
