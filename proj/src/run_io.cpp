#include "alilab/run_io.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "alilab/error.hpp"
#include "alilab/text.hpp"

namespace alilab {

namespace fs = std::filesystem;
using nlohmann::json;

RunPaths run_paths(const fs::path& run_dir) {
    RunPaths p;
    p.root = run_dir;
    p.config = run_dir / "config.ini";
    p.manifest = run_dir / "manifest.json";
    p.metrics = run_dir / "metrics.csv";
    p.training_eval = run_dir / "training_coverage.csv";
    p.checkpoints_dir = run_dir / "checkpoints";
    p.final_checkpoint = p.checkpoints_dir / "final.json";
    p.eval_dir = run_dir / "eval";
    p.plots_dir = run_dir / "plots";
    return p;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out << text;
        out.flush();
        if (!out) throw IoError("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec)
        throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() +
                      "': " + ec.message());
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("missing artifact: '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_metrics_csv(const fs::path& path, const std::vector<MetricsRow>& rows) {
    std::ostringstream o;
    o << kMetricsHeader << "\n";
    for (const MetricsRow& r : rows)
        o << r.step << ',' << format_double(r.m.Ld) << ',' << format_double(r.m.Lg) << ','
          << format_double(r.m.mean_Dq) << ',' << format_double(r.m.mean_Dp) << "\n";
    write_text_atomic(path, o.str());
}

MetricsSemantics metrics_semantics(ModelKind kind) {
    switch (kind) {
    case ModelKind::kVae:
        return {"negative ELBO", "reconstruction negative log-likelihood", "KL(q(z|x) || p(z))",
                "unused (0)"};
    case ModelKind::kInvmap:
        return {"unused (0)", "latent reconstruction MSE", "unused (0)", "unused (0)"};
    case ModelKind::kSemisup:
        return {"discriminator loss (K+1-class)", "generator loss (swapped targets)",
                "mean real-class mass on encoder pairs", "mean real-class mass on decoder pairs"};
    default:
        return {"discriminator loss", "generator loss (swapped objective)",
                "mean D on encoder-side pairs", "mean D on decoder-side pairs"};
    }
}

std::string manifest_to_json(const RunManifest& m) {
    json j;
    j["format_version"] = kManifestFormatVersion;
    j["artifact_version"] = kArtifactVersion;
    j["status"] = m.status;
    j["model"] = model_kind_name(m.model);
    j["seed"] = m.seed;
    j["steps"] = m.steps;
    j["batch"] = m.batch;
    j["config_text"] = m.config_text;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    const MetricsSemantics sem = metrics_semantics(m.model);
    j["metrics_semantics"] = {{"Ld", sem.Ld},
                              {"Lg", sem.Lg},
                              {"mean_Dq", sem.mean_Dq},
                              {"mean_Dp", sem.mean_Dp}};
    if (m.has_final)
        j["final"] = {{"step", m.final_row.step},
                      {"Ld", m.final_row.m.Ld},
                      {"Lg", m.final_row.m.Lg},
                      {"mean_Dq", m.final_row.m.mean_Dq},
                      {"mean_Dp", m.final_row.m.mean_Dp}};
    else
        j["final"] = nullptr;
    j["checkpoints"] = m.checkpoints;
    if (m.status == "aborted") {
        j["abort_message"] = m.abort_message;
        j["last_good_checkpoint"] =
            m.last_good_checkpoint.empty() ? json(nullptr) : json(m.last_good_checkpoint);
    }
    return j.dump(1) + "\n";
}

void write_manifest(const RunPaths& paths, const RunManifest& m) {
    write_text_atomic(paths.manifest, manifest_to_json(m));
}

std::string now_iso8601_utc() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_coverage_report(const fs::path& eval_dir, const ModeCoverageReport& report,
                           const Tensor& samples, const std::vector<int>& modes) {
    ensure_dir(eval_dir);
    json j;
    j["n_samples"] = report.n_samples;
    j["counts"] = report.counts;
    j["covered"] = report.covered;
    j["dropped"] = report.dropped;
    write_text_atomic(eval_dir / "coverage.json", j.dump(1) + "\n");

    if (!samples.empty() && static_cast<int>(modes.size()) != samples.rows())
        throw ContractError("coverage samples/modes size mismatch");
    std::ostringstream o;
    o << "x0,x1,mode\n";
    const int n = samples.empty() ? 0 : samples.rows();
    for (int i = 0; i < n; ++i)
        o << format_double(samples.at(i, 0)) << ',' << format_double(samples.at(i, 1)) << ','
          << modes[static_cast<std::size_t>(i)] << "\n";
    write_text_atomic(eval_dir / "coverage_samples.csv", o.str());
}

void write_recon_report(const fs::path& eval_dir, const Tensor& x, const ReconReport& report) {
    ensure_dir(eval_dir);
    json j;
    j["n"] = x.empty() ? 0 : x.rows();
    j["mse"] = report.mse;
    write_text_atomic(eval_dir / "recon.json", j.dump(1) + "\n");

    std::ostringstream o;
    o << "x0,x1,xhat0,xhat1\n";
    const int n = x.empty() ? 0 : x.rows();
    for (int i = 0; i < n; ++i)
        o << format_double(x.at(i, 0)) << ',' << format_double(x.at(i, 1)) << ','
          << format_double(report.x_hat.at(i, 0)) << ',' << format_double(report.x_hat.at(i, 1))
          << "\n";
    write_text_atomic(eval_dir / "recon_pairs.csv", o.str());
}

void write_latent_report(const fs::path& eval_dir, const OccupancyReport& report) {
    ensure_dir(eval_dir);
    json j;
    j["mean"] = report.mean;
    std::vector<double> cov_flat(report.cov.data(), report.cov.data() + report.cov.size());
    j["cov"] = cov_flat;
    j["moment_distance"] = report.moment_distance;
    write_text_atomic(eval_dir / "latent.json", j.dump(1) + "\n");

    std::ostringstream o;
    const int dz = report.z_hat.empty() ? 0 : report.z_hat.cols();
    for (int d = 0; d < dz; ++d) o << (d ? "," : "") << "z" << d;
    o << "\n";
    const int n = report.z_hat.empty() ? 0 : report.z_hat.rows();
    for (int i = 0; i < n; ++i) {
        for (int d = 0; d < dz; ++d) o << (d ? "," : "") << format_double(report.z_hat.at(i, d));
        o << "\n";
    }
    write_text_atomic(eval_dir / "latent_zhat.csv", o.str());
}

void write_interp_csv(const fs::path& eval_dir, const std::vector<Tensor>& path_points) {
    ensure_dir(eval_dir);
    std::ostringstream o;
    o << "pair,t,x0,x1\n";
    for (std::size_t p = 0; p < path_points.size(); ++p) {
        const Tensor& path = path_points[p];
        if (path.empty()) continue;
        const int steps = path.rows();
        for (int i = 0; i < steps; ++i) {
            const double t = steps > 1 ? static_cast<double>(i) / (steps - 1) : 0.0;
            o << p << ',' << format_double(t) << ',' << format_double(path.at(i, 0)) << ','
              << format_double(path.at(i, 1)) << "\n";
        }
    }
    write_text_atomic(eval_dir / "interp.csv", o.str());
}

void write_invert_report(const fs::path& eval_dir, const CycleReport& report) {
    ensure_dir(eval_dir);
    json j;
    j["x_cycle_mse"] = report.x_cycle_mse;
    j["z_cycle_mse"] = report.z_cycle_mse;
    write_text_atomic(eval_dir / "invert.json", j.dump(1) + "\n");
}

} // namespace alilab
