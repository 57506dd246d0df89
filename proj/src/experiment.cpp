#include "alilab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "alilab/ali.hpp"
#include "alilab/baselines.hpp"
#include "alilab/error.hpp"
#include "alilab/eval.hpp"
#include "alilab/svg.hpp"
#include "alilab/text.hpp"

namespace alilab {

namespace fs = std::filesystem;
using nlohmann::json;

GaussianMixture data_mixture(const DataConfig& d) {
    return standardized(make_grid_mixture(d.side, d.spacing, d.sigma), d.effective_scale());
}

Dataset make_train_dataset(const RunConfig& c) {
    Rng rng(c.seed, streams::kData);
    return sample_dataset(data_mixture(c.data), c.data.n_train, rng);
}

Dataset make_eval_dataset(const RunConfig& c) {
    Rng rng(c.seed, streams::kEvalData);
    return sample_dataset(data_mixture(c.data), c.data.n_eval, rng);
}

namespace {

AliArch arch_from_config(const RunConfig& c) {
    AliArch arch;
    arch.dim_x = c.dim_x;
    arch.dim_z = c.dim_z;
    arch.encoder_hidden = c.encoder_hidden;
    arch.decoder_hidden = c.decoder_hidden;
    arch.discriminator_hidden = c.discriminator_hidden;
    arch.leaky_slope = c.train.leaky_slope;
    arch.init_sigma = c.train.init_sigma;
    arch.cond_classes = c.model == ModelKind::kCondAli ? c.cond.classes : 0;
    return arch;
}

AdamConfig adam_from_config(const RunConfig& c) {
    AdamConfig a;
    a.alpha = c.optimizer.lr;
    a.beta1 = c.optimizer.beta1;
    a.beta2 = c.optimizer.beta2;
    a.epsilon = c.optimizer.eps;
    return a;
}

MlpParameters load_frozen_decoder(const RunConfig& c) {
    const Checkpoint source = load_checkpoint(c.decoder_checkpoint);
    if (!source.has_network("decoder"))
        throw ArtifactError("checkpoint '" + c.decoder_checkpoint + "' has no decoder network");
    return source.network("decoder");
}

// Uniform step/snapshot interface over the trainer kinds.
struct TrainerHandle {
    std::function<StepMetrics()> step;
    std::function<Checkpoint(long long)> snapshot;
};

TrainerHandle make_trainer(const RunConfig& c, const Dataset& data) {
    const AliArch arch = arch_from_config(c);
    const AdamConfig adam = adam_from_config(c);
    const Rng init(c.seed, streams::kInit);
    const Rng train(c.seed, streams::kTrain);
    const std::string kind = model_kind_name(c.model);

    switch (c.model) {
    case ModelKind::kAli:
    case ModelKind::kCondAli: {
        auto t = std::make_shared<AliTrainer>(
            AliTrainer::create(arch, adam, data, c.batch, init, train));
        t->cond_label_divisor = c.model == ModelKind::kCondAli ? c.cond.label_divisor : 1;
        return {[t] { return t->step(); },
                [t, kind](long long s) {
                    return Checkpoint{kind,
                                      s,
                                      {{"encoder", t->model.encoder},
                                       {"decoder", t->model.decoder},
                                       {"discriminator", t->model.discriminator}}};
                }};
    }
    case ModelKind::kGan: {
        auto t = std::make_shared<GanTrainer>(
            GanTrainer::create(arch, adam, data, c.batch, init, train));
        return {[t] { return t->step(); },
                [t, kind](long long s) {
                    return Checkpoint{
                        kind, s, {{"decoder", t->decoder}, {"discriminator", t->discriminator}}};
                }};
    }
    case ModelKind::kVae: {
        auto t = std::make_shared<VaeTrainer>(
            VaeTrainer::create(arch, adam, data, c.batch, init, train));
        return {[t] {
                    const VaeStepInfo info = t->step();
                    StepMetrics m;
                    m.Ld = -info.elbo;
                    m.Lg = -info.recon_ll;
                    m.mean_Dq = info.kl;
                    m.mean_Dp = 0.0;
                    return m;
                },
                [t, kind](long long s) {
                    return Checkpoint{kind, s, {{"encoder", t->encoder}, {"decoder", t->decoder}}};
                }};
    }
    case ModelKind::kInvmap: {
        auto t = std::make_shared<InvmapTrainer>(
            InvmapTrainer::create(load_frozen_decoder(c), arch, adam, c.batch, init, train));
        return {[t] {
                    const double loss = t->step();
                    StepMetrics m;
                    m.Lg = loss;
                    return m;
                },
                [t, kind](long long s) {
                    return Checkpoint{kind, s, {{"encoder", t->encoder}, {"decoder", t->decoder}}};
                }};
    }
    case ModelKind::kPosthoc: {
        auto t = std::make_shared<PosthocTrainer>(
            PosthocTrainer::create(load_frozen_decoder(c), arch, adam, data, c.batch, init, train));
        return {[t] { return t->step(); },
                [t, kind](long long s) {
                    return Checkpoint{kind,
                                      s,
                                      {{"encoder", t->model.encoder},
                                       {"decoder", t->model.decoder},
                                       {"discriminator", t->model.discriminator}}};
                }};
    }
    case ModelKind::kSemisup: {
        std::vector<int> pool(static_cast<std::size_t>(c.semisup.labels));
        for (int i = 0; i < c.semisup.labels; ++i) pool[static_cast<std::size_t>(i)] = i;
        auto t = std::make_shared<SemiSupTrainer>(
            SemiSupTrainer::create(arch, c.semisup.classes, adam, data, std::move(pool),
                                   c.semisup.labeled_fraction, c.batch, init, train));
        return {[t] {
                    const SemiSupMetrics info = t->step();
                    StepMetrics m;
                    m.Ld = info.Ld;
                    m.Lg = info.Lg;
                    m.mean_Dq = info.mean_real_q;
                    m.mean_Dp = info.mean_real_p;
                    return m;
                },
                [t, kind](long long s) {
                    return Checkpoint{kind,
                                      s,
                                      {{"encoder", t->model.encoder},
                                       {"decoder", t->model.decoder},
                                       {"discriminator", t->model.discriminator}}};
                }};
    }
    }
    throw ContractError("make_trainer: unhandled model kind");
}

std::string step_checkpoint_name(long long step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "step_%08lld.json", step);
    return buf;
}

} // namespace

RunResult run_training(const RunConfig& config) {
    RunConfig cfg = config;
    apply_model_defaults(cfg);
    validate_config(cfg);

    const RunPaths paths = run_paths(cfg.out);
    ensure_dir(paths.root);
    ensure_dir(paths.checkpoints_dir);
    const std::string config_text = serialize_config(cfg);
    write_text_atomic(paths.config, config_text);

    RunManifest man;
    man.model = cfg.model;
    man.seed = cfg.seed;
    man.steps = cfg.steps;
    man.batch = cfg.batch;
    man.config_text = config_text;
    man.started_at = now_iso8601_utc();
    write_manifest(paths, man);

    const Dataset data = make_train_dataset(cfg);
    TrainerHandle trainer = make_trainer(cfg, data);
    const GaussianMixture mix = data_mixture(cfg.data);
    Rng snapshot_rng(cfg.seed, streams::kTrainEval);

    std::vector<MetricsRow> rows;
    rows.reserve(static_cast<std::size_t>(std::max(cfg.steps, 1)));
    std::ostringstream coverage_log;
    coverage_log << "step,covered\n";
    const auto flush_logs = [&] {
        write_metrics_csv(paths.metrics, rows);
        write_text_atomic(paths.training_eval, coverage_log.str());
    };

    try {
        for (int s = 1; s <= cfg.steps; ++s) {
            const StepMetrics m = trainer.step();
            rows.push_back({s, m});
            if (cfg.train.checkpoint_every > 0 && s % cfg.train.checkpoint_every == 0 &&
                s != cfg.steps) {
                const std::string name = step_checkpoint_name(s);
                save_checkpoint(paths.checkpoints_dir / name, trainer.snapshot(s));
                man.checkpoints.push_back(name);
            }
            if (cfg.train.eval_every > 0 && s % cfg.train.eval_every == 0) {
                const Tensor xs = sample_from_model(trainer.snapshot(s), cfg.model, 1000,
                                                    cfg.dim_z, snapshot_rng);
                coverage_log << s << ',' << mode_coverage(mix, xs).covered << "\n";
            }
        }
    } catch (const RuntimeAbort& e) {
        flush_logs();
        man.status = "aborted";
        man.abort_message = e.what();
        man.finished_at = now_iso8601_utc();
        if (!man.checkpoints.empty()) man.last_good_checkpoint = man.checkpoints.back();
        if (!rows.empty()) {
            man.has_final = true;
            man.final_row = rows.back();
        }
        write_manifest(paths, man);
        throw;
    }

    Checkpoint final_ckpt = trainer.snapshot(cfg.steps);
    save_checkpoint(paths.final_checkpoint, final_ckpt);
    man.checkpoints.push_back("final.json");
    flush_logs();
    man.status = "completed";
    if (!rows.empty()) {
        man.has_final = true;
        man.final_row = rows.back();
    }
    man.finished_at = now_iso8601_utc();
    write_manifest(paths, man);

    return {std::move(cfg), paths, std::move(rows), std::move(final_ckpt)};
}

Tensor sample_from_model(const Checkpoint& ckpt, ModelKind kind, int n, int dim_z, Rng& rng) {
    const MlpParameters& decoder = ckpt.network("decoder");
    const Tensor z = Tensor::randn({n, dim_z}, rng);
    if (kind == ModelKind::kVae) return vae_sample(decoder, z, rng);
    const int in_width = decoder.layer_sizes().front();
    const int classes = in_width - dim_z;
    if (classes > 0) {
        std::vector<int> draw(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            draw[static_cast<std::size_t>(i)] =
                classes > 1 ? static_cast<int>(rng.bounded(static_cast<std::uint64_t>(classes)))
                            : 0;
        return decoder_mean(decoder, concat_cols(z, one_hot(draw, classes)));
    }
    return decoder_mean(decoder, z);
}

Tensor sample_from_model_cond(const Checkpoint& ckpt, int class_id, int n, int dim_z, Rng& rng) {
    const MlpParameters& decoder = ckpt.network("decoder");
    const int classes = decoder.layer_sizes().front() - dim_z;
    if (classes < 1) throw ContractError("sample_from_model_cond: decoder is unconditional");
    if (class_id < 0 || class_id >= classes)
        throw ContractError("sample_from_model_cond: class " + std::to_string(class_id) +
                            " out of range [0, " + std::to_string(classes) + ")");
    const Tensor z = Tensor::randn({n, dim_z}, rng);
    const std::vector<int> draw(static_cast<std::size_t>(n), class_id);
    return decoder_mean(decoder, concat_cols(z, one_hot(draw, classes)));
}

ModeCoverageReport coverage_of(const Checkpoint& ckpt, const RunConfig& cfg, Tensor* samples_out,
                               std::vector<int>* modes_out) {
    const GaussianMixture mix = data_mixture(cfg.data);
    Rng rng(cfg.seed, streams::kEval);
    const Tensor xs = sample_from_model(ckpt, cfg.model, cfg.data.n_eval, cfg.dim_z, rng);
    const ModeCoverageReport report = mode_coverage(mix, xs);
    if (modes_out) {
        modes_out->resize(static_cast<std::size_t>(xs.rows()));
        for (int i = 0; i < xs.rows(); ++i)
            (*modes_out)[static_cast<std::size_t>(i)] =
                argmax_responsibility(mix, xs.at(i, 0), xs.at(i, 1));
    }
    if (samples_out) *samples_out = xs;
    return report;
}

void run_generate_data(const RunConfig& config) {
    RunConfig cfg = config;
    apply_model_defaults(cfg);
    validate_config(cfg);
    ensure_dir(cfg.out);
    const fs::path out(cfg.out);
    write_dataset_csv(out / "dataset.csv", make_train_dataset(cfg));
    write_dataset_csv(out / "heldout.csv", make_eval_dataset(cfg));
    write_text_atomic(out / "mixture.json", mixture_to_json(data_mixture(cfg.data)));
}

namespace {

// Per-row conditioning class for conditional models, from the data labels.
std::vector<int> cond_classes_of(const Dataset& data, const CondConfig& cond) {
    std::vector<int> classes(data.labels.size());
    for (std::size_t i = 0; i < data.labels.size(); ++i)
        classes[i] = (data.labels[i] / cond.label_divisor) % cond.classes;
    return classes;
}

struct EvalContext {
    RunConfig cfg;
    RunPaths paths;
    Checkpoint ckpt;
    GaussianMixture mix;
    Dataset held;
    bool conditional = false;
    Tensor x_aug; // held-out x with the one-hot class appended (conditional only)
    Tensor y;     // the one-hot block itself
};

EvalContext open_run_for_eval(const std::string& run_dir) {
    EvalContext ctx;
    ctx.paths = run_paths(run_dir);
    if (!fs::exists(ctx.paths.config))
        throw ArtifactError("no config.ini under '" + run_dir + "' — train a run there first");
    ctx.cfg = parse_config_text(read_text_file(ctx.paths.config));
    ctx.ckpt = load_checkpoint(ctx.paths.final_checkpoint);
    ctx.mix = data_mixture(ctx.cfg.data);
    ctx.held = make_eval_dataset(ctx.cfg);
    ctx.conditional = ctx.cfg.model == ModelKind::kCondAli;
    if (ctx.conditional) {
        ctx.y = one_hot(cond_classes_of(ctx.held, ctx.cfg.cond), ctx.cfg.cond.classes);
        ctx.x_aug = concat_cols(ctx.held.x, ctx.y);
    }
    return ctx;
}

Tensor eval_input(const EvalContext& ctx) { return ctx.conditional ? ctx.x_aug : ctx.held.x; }

// Reconstruction that respects conditioning: encode (x, y), decode (z_hat, y).
ReconReport reconstruct_in_context(const EvalContext& ctx, Rng& rng) {
    const MlpParameters& enc = ctx.ckpt.network("encoder");
    const MlpParameters& dec = ctx.ckpt.network("decoder");
    if (!ctx.conditional) return reconstruct(enc, dec, ctx.held.x, rng);
    const int n = ctx.held.x.rows();
    const int dz = enc.output_width() / 2;
    const Tensor eps = Tensor::randn({n, dz}, rng);
    const Tensor z_hat = encode_apply(enc, ctx.x_aug, eps);
    ReconReport report;
    report.x_hat = decoder_mean(dec, concat_cols(z_hat, ctx.y));
    double total = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < ctx.held.x.cols(); ++j) {
            const double diff = ctx.held.x.at(i, j) - report.x_hat.at(i, j);
            total += diff * diff;
        }
    report.mse = n > 0 ? total / n : 0.0;
    return report;
}

void require_encoder(const EvalContext& ctx, const std::string& what) {
    if (!ctx.ckpt.has_network("encoder"))
        throw ArtifactError("eval " + what + ": the " +
                            std::string(model_kind_name(ctx.cfg.model)) +
                            " checkpoint has no encoder network");
}

} // namespace

void run_eval(const std::string& run_dir, const std::string& which, std::ostream& log) {
    static const char* kKinds[] = {"coverage", "recon", "latent", "interp", "invert", "all"};
    bool known = false;
    for (const char* k : kKinds) known = known || which == k;
    if (!known)
        throw ConfigError("unknown eval kind '" + which +
                          "' (expected coverage|recon|latent|interp|invert|all)");

    EvalContext ctx = open_run_for_eval(run_dir);
    const bool all = which == "all";
    const bool has_encoder = ctx.ckpt.has_network("encoder");

    if (all || which == "coverage") {
        Tensor samples;
        std::vector<int> modes;
        const ModeCoverageReport report = coverage_of(ctx.ckpt, ctx.cfg, &samples, &modes);
        write_coverage_report(ctx.paths.eval_dir, report, samples, modes);
        log << "[eval] coverage: " << report.covered << "/" << report.counts.size()
            << " components hit over " << report.n_samples << " samples (dropped "
            << report.dropped << ")\n";
    }
    if (all || which == "recon") {
        if (!has_encoder && all) {
            log << "[eval] recon: skipped (no encoder in a " << model_kind_name(ctx.cfg.model)
                << " checkpoint)\n";
        } else {
            require_encoder(ctx, "recon");
            Rng rng(ctx.cfg.seed, streams::kEvalRecon);
            const ReconReport report = reconstruct_in_context(ctx, rng);
            write_recon_report(ctx.paths.eval_dir, ctx.held.x, report);
            log << "[eval] recon: mse " << format_double(report.mse, 6) << " over "
                << ctx.held.x.rows() << " held-out samples\n";
        }
    }
    if (all || which == "latent") {
        if (!has_encoder && all) {
            log << "[eval] latent: skipped (no encoder in a " << model_kind_name(ctx.cfg.model)
                << " checkpoint)\n";
        } else {
            require_encoder(ctx, "latent");
            Rng rng(ctx.cfg.seed, streams::kEvalLatent);
            const OccupancyReport report =
                latent_occupancy(ctx.ckpt.network("encoder"), eval_input(ctx), rng);
            write_latent_report(ctx.paths.eval_dir, report);
            log << "[eval] latent: moment distance to the standard prior "
                << format_double(report.moment_distance, 6) << "\n";
        }
    }
    if (all || which == "interp") {
        if (!has_encoder && all) {
            log << "[eval] interp: skipped (no encoder in a " << model_kind_name(ctx.cfg.model)
                << " checkpoint)\n";
        } else {
            require_encoder(ctx, "interp");
            const MlpParameters& enc = ctx.ckpt.network("encoder");
            const MlpParameters& dec = ctx.ckpt.network("decoder");
            const Tensor& input = eval_input(ctx);
            const int pairs = std::min(3, input.rows() / 2);
            std::vector<Tensor> paths_out;
            for (int p = 0; p < pairs; ++p) {
                const Tensor a = input.row(2 * p);
                const Tensor b = input.row(2 * p + 1);
                if (!ctx.conditional) {
                    paths_out.push_back(latent_interpolate(enc, dec, a, b, 11));
                } else {
                    // Interpolate in z, decoding under endpoint a's class.
                    const Tensor za = encoder_mean(enc, a);
                    const Tensor zb = encoder_mean(enc, b);
                    const Tensor ya = ctx.y.row(2 * p);
                    Tensor path = Tensor::zeros({11, ctx.held.x.cols()});
                    for (int i = 0; i < 11; ++i) {
                        const double t = i / 10.0;
                        Tensor z = Tensor::zeros({1, za.cols()});
                        for (int j = 0; j < za.cols(); ++j)
                            z.at(0, j) = (1.0 - t) * za.at(0, j) + t * zb.at(0, j);
                        const Tensor x = decoder_mean(dec, concat_cols(z, ya));
                        for (int j = 0; j < x.cols(); ++j) path.at(i, j) = x.at(0, j);
                    }
                    paths_out.push_back(std::move(path));
                }
            }
            write_interp_csv(ctx.paths.eval_dir, paths_out);
            log << "[eval] interp: " << paths_out.size() << " latent paths of 11 points\n";
        }
    }
    if (all || which == "invert") {
        if (!has_encoder && all) {
            log << "[eval] invert: skipped (no encoder in a " << model_kind_name(ctx.cfg.model)
                << " checkpoint)\n";
        } else {
            require_encoder(ctx, "invert");
            Rng rng(ctx.cfg.seed, streams::kEvalInvert);
            const MlpParameters& enc = ctx.ckpt.network("encoder");
            const MlpParameters& dec = ctx.ckpt.network("decoder");
            CycleReport report;
            if (!ctx.conditional) {
                report = invertibility_diagnostic(enc, dec, ctx.held.x, ctx.cfg.dim_z, rng);
            } else {
                // x-cycle under the true classes; z-cycle under uniform classes.
                const Tensor mu = encoder_mean(enc, ctx.x_aug);
                const Tensor x_back = decoder_mean(dec, concat_cols(mu, ctx.y));
                double total = 0.0;
                for (int i = 0; i < ctx.held.x.rows(); ++i)
                    for (int j = 0; j < ctx.held.x.cols(); ++j) {
                        const double diff = ctx.held.x.at(i, j) - x_back.at(i, j);
                        total += diff * diff;
                    }
                report.x_cycle_mse = total / std::max(ctx.held.x.rows(), 1);
                const int n = ctx.held.x.rows();
                const Tensor z = Tensor::randn({n, ctx.cfg.dim_z}, rng);
                std::vector<int> classes(static_cast<std::size_t>(n));
                for (int i = 0; i < n; ++i)
                    classes[static_cast<std::size_t>(i)] = static_cast<int>(
                        rng.bounded(static_cast<std::uint64_t>(ctx.cfg.cond.classes)));
                const Tensor y = one_hot(classes, ctx.cfg.cond.classes);
                const Tensor x_gen = decoder_mean(dec, concat_cols(z, y));
                const Tensor z_back = encoder_mean(enc, concat_cols(x_gen, y));
                total = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < ctx.cfg.dim_z; ++j) {
                        const double diff = z.at(i, j) - z_back.at(i, j);
                        total += diff * diff;
                    }
                report.z_cycle_mse = total / std::max(n, 1);
            }
            write_invert_report(ctx.paths.eval_dir, report);
            log << "[eval] invert: x-cycle mse " << format_double(report.x_cycle_mse, 6)
                << ", z-cycle mse " << format_double(report.z_cycle_mse, 6) << "\n";
        }
    }
}

namespace {

// --- plot helpers ---

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
    std::size_t rows = 0;
};

CsvTable read_numeric_csv(const fs::path& path) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    CsvTable table;
    if (!std::getline(in, line))
        throw ArtifactError("empty csv '" + path.string() + "'");
    table.header = split(trim(line), ',');
    table.columns.resize(table.header.size());
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty()) continue;
        const std::vector<std::string> cells = split(s, ',');
        if (cells.size() != table.header.size())
            throw ArtifactError("csv '" + path.string() + "' line " + std::to_string(lineno) +
                                ": expected " + std::to_string(table.header.size()) + " cells");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const char* begin = cells[i].c_str();
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin)
                throw ArtifactError("csv '" + path.string() + "' line " + std::to_string(lineno) +
                                    ": bad number '" + cells[i] + "'");
            table.columns[i].push_back(v);
        }
        ++table.rows;
    }
    return table;
}

PlotCircles mixture_circles(const GaussianMixture& mix) {
    PlotCircles circles;
    for (const auto& comp : mix.components) {
        const double sd = std::sqrt(comp.cov[0]); // isotropic by construction
        for (double k : {1.0, 2.0}) {
            circles.cx.push_back(comp.mean[0]);
            circles.cy.push_back(comp.mean[1]);
            circles.r.push_back(k * sd);
        }
    }
    return circles;
}

PlotSeries series_from(const std::vector<double>& x, const std::vector<double>& y,
                       std::size_t limit, const std::string& color) {
    PlotSeries s;
    const std::size_t n = std::min(limit, x.size());
    s.x.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
    s.y.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
    s.color = color;
    return s;
}

// The four standard panels for one finished run.
std::vector<Panel> run_panels(const std::string& run_dir) {
    const RunPaths paths = run_paths(run_dir);
    if (!fs::exists(paths.config))
        throw ArtifactError("no config.ini under '" + run_dir + "' — train a run there first");
    const RunConfig cfg = parse_config_text(read_text_file(paths.config));

    std::vector<std::string> missing;
    const fs::path coverage_csv = paths.eval_dir / "coverage_samples.csv";
    const fs::path zhat_csv = paths.eval_dir / "latent_zhat.csv";
    const fs::path recon_csv = paths.eval_dir / "recon_pairs.csv";
    const bool has_encoder = cfg.model != ModelKind::kGan;
    if (!fs::exists(coverage_csv)) missing.push_back("eval/coverage_samples.csv");
    if (has_encoder && !fs::exists(zhat_csv)) missing.push_back("eval/latent_zhat.csv");
    if (has_encoder && !fs::exists(recon_csv)) missing.push_back("eval/recon_pairs.csv");
    if (!missing.empty()) {
        std::string what = "plot needs eval artifacts missing from '" + run_dir + "':";
        for (const std::string& m : missing) what += " " + m;
        what += " — run `ali-lab eval " + run_dir + " --which all` first";
        throw ArtifactError(what);
    }

    const GaussianMixture mix = data_mixture(cfg.data);
    const std::string kind = model_kind_name(cfg.model);
    std::vector<Panel> panels;

    { // 1: training data
        Panel p;
        p.title = kind + ": data q(x)";
        p.xmin = p.ymin = -1.6;
        p.xmax = p.ymax = 1.6;
        Rng rng(cfg.seed, streams::kData);
        const Dataset sample = sample_dataset(mix, 2000, rng);
        PlotSeries s;
        s.color = "#1f77b4";
        for (int i = 0; i < sample.x.rows(); ++i) {
            s.x.push_back(sample.x.at(i, 0));
            s.y.push_back(sample.x.at(i, 1));
        }
        p.scatters.push_back(std::move(s));
        p.circles.push_back(mixture_circles(mix));
        p.empty_caption = "no data";
        panels.push_back(std::move(p));
    }
    { // 2: latent occupancy
        Panel p;
        p.title = kind + ": latent z-hat vs prior";
        p.xmin = p.ymin = -4.0;
        p.xmax = p.ymax = 4.0;
        if (fs::exists(zhat_csv)) {
            const CsvTable t = read_numeric_csv(zhat_csv);
            if (t.columns.size() >= 2)
                p.scatters.push_back(series_from(t.columns[0], t.columns[1], 2000, "#2ca02c"));
        }
        PlotCircles prior;
        prior.color = "#555555";
        for (double r : {1.0, 2.0}) {
            prior.cx.push_back(0.0);
            prior.cy.push_back(0.0);
            prior.r.push_back(r);
        }
        p.circles.push_back(std::move(prior));
        p.empty_caption = "no latent samples";
        panels.push_back(std::move(p));
    }
    { // 3: reconstructions
        Panel p;
        p.title = kind + ": x vs reconstruction";
        p.xmin = p.ymin = -1.6;
        p.xmax = p.ymax = 1.6;
        if (fs::exists(recon_csv)) {
            const CsvTable t = read_numeric_csv(recon_csv);
            if (t.columns.size() >= 4) {
                const std::size_t limit = std::min<std::size_t>(150, t.rows);
                PlotSegments seg;
                for (std::size_t i = 0; i < limit; ++i) {
                    seg.x0.push_back(t.columns[0][i]);
                    seg.y0.push_back(t.columns[1][i]);
                    seg.x1.push_back(t.columns[2][i]);
                    seg.y1.push_back(t.columns[3][i]);
                }
                p.segments.push_back(std::move(seg));
                PlotSeries orig = series_from(t.columns[0], t.columns[1], limit, "#1f77b4");
                PlotSeries recon = series_from(t.columns[2], t.columns[3], limit, "#ff7f0e");
                orig.radius = recon.radius = 1.8;
                p.scatters.push_back(std::move(orig));
                p.scatters.push_back(std::move(recon));
            }
        }
        p.empty_caption = "no reconstructions";
        panels.push_back(std::move(p));
    }
    { // 4: model samples
        Panel p;
        p.title = kind + ": model samples";
        p.xmin = p.ymin = -1.6;
        p.xmax = p.ymax = 1.6;
        const CsvTable t = read_numeric_csv(coverage_csv);
        if (t.columns.size() >= 2 && t.rows > 0)
            p.scatters.push_back(series_from(t.columns[0], t.columns[1], 2000, "#9467bd"));
        p.circles.push_back(mixture_circles(mix));
        p.empty_caption = "no samples";
        panels.push_back(std::move(p));
    }
    return panels;
}

} // namespace

void run_plot(const std::vector<std::string>& run_dirs, const std::string& composite_out,
              std::ostream& log) {
    if (run_dirs.empty()) throw ConfigError("plot needs at least one run directory");
    std::vector<std::vector<Panel>> all_panels;
    for (const std::string& dir : run_dirs) {
        std::vector<Panel> panels = run_panels(dir);
        const RunPaths paths = run_paths(dir);
        ensure_dir(paths.plots_dir);
        const fs::path file = paths.plots_dir / "figure.svg";
        write_text_atomic(file, render_svg(panels, 2, "run: " + dir));
        log << "[plot] wrote " << file.string() << "\n";
        all_panels.push_back(std::move(panels));
    }
    if (!composite_out.empty()) {
        // Rows = panel types, columns = runs (row-major order for render_svg).
        std::vector<Panel> grid;
        for (std::size_t row = 0; row < 4; ++row)
            for (const std::vector<Panel>& panels : all_panels)
                grid.push_back(panels[row]);
        const fs::path file(composite_out);
        if (file.has_parent_path()) ensure_dir(file.parent_path());
        write_text_atomic(file, render_svg(grid, static_cast<int>(all_panels.size()),
                                           "model comparison"));
        log << "[plot] wrote " << file.string() << "\n";
    }
}

int run_oracle(std::uint64_t seed, std::ostream& out) {
    Rng rng(seed, streams::kEval);
    int failures = 0;
    int both_zero_cells = 0;
    const double kValueTol = 1e-10;

    for (int trial = 0; trial < 100; ++trial) {
        const int nx = 1 + static_cast<int>(rng.bounded(16));
        const int nz = 1 + static_cast<int>(rng.bounded(16));
        const double zero_fraction = (trial % 2 == 1) ? 0.3 : 0.0;
        const DiscreteJoint q = random_joint(nx, nz, rng, zero_fraction);
        const DiscreteJoint p = random_joint(nx, nz, rng, zero_fraction);
        const OptimalDiscriminator star = optimal_discriminator(q, p);

        // (a) the closed form matches a per-cell grid search at 1e-3 resolution.
        double max_diff = 0.0;
        for (std::size_t i = 0; i < star.d.size(); ++i) {
            if (!star.defined[i]) {
                ++both_zero_cells;
                continue;
            }
            double best_d = 0.0;
            double best_v = -std::numeric_limits<double>::infinity();
            for (int g = 1; g <= 999; ++g) {
                const double d = g * 1e-3;
                const double v = q.mass[i] * std::log(d) + p.mass[i] * std::log1p(-d);
                if (v > best_v) {
                    best_v = v;
                    best_d = d;
                }
            }
            max_diff = std::max(max_diff, std::abs(best_d - star.d[i]));
        }
        const bool grid_ok = max_diff <= 1e-3 + 1e-12;

        // (b) the value identity against the divergence.
        const double v_star = value_at(q, p, star.d);
        const double identity = -std::log(4.0) + 2.0 * jsd_discrete(q, p);
        const double v_diff = std::abs(v_star - identity);
        const bool value_ok = v_diff <= kValueTol;

        // (c) no perturbed discriminator beats the closed form.
        bool beats = true;
        for (int k = 0; k < 100; ++k) {
            std::vector<double> d2 = star.d;
            for (double& d : d2)
                d = std::min(std::max(d + 0.2 * (rng.uniform() - 0.5), 1e-9), 1.0 - 1e-9);
            if (value_at(q, p, d2) > v_star + 1e-12) beats = false;
        }

        failures += !grid_ok + !value_ok + !beats;
        out << "[oracle] joint " << trial << " (" << nx << "x" << nz
            << "): argmax|diff|=" << format_double(max_diff, 3) << (grid_ok ? " ok" : " FAIL")
            << " | value diff=" << format_double(v_diff, 3) << (value_ok ? " ok" : " FAIL")
            << " | optimal vs 100 perturbed: " << (beats ? "ok" : "FAIL") << "\n";
    }

    { // the q == p corner: V collapses to -log 4 and the divergence vanishes.
        const DiscreteJoint q = random_joint(8, 8, rng, 0.0);
        const OptimalDiscriminator star = optimal_discriminator(q, q);
        const double v = value_at(q, q, star.d);
        const double jsd = jsd_discrete(q, q);
        const bool ok = std::abs(v + std::log(4.0)) <= 1e-12 && std::abs(jsd) <= 1e-12;
        failures += !ok;
        out << "[oracle] q == p: V(D*)=" << format_double(v) << " vs -log4="
            << format_double(-std::log(4.0)) << ", JSD=" << format_double(jsd)
            << (ok ? " ok" : " FAIL") << "\n";
    }
    out << "[oracle] both-zero cells flagged (excluded, not failed): " << both_zero_cells << "\n";
    out << "[oracle] " << (failures == 0 ? "all identities passed" : "FAILURES: ") << (failures == 0 ? "" : std::to_string(failures)) << "\n";
    return failures;
}

namespace {

json search_entry_json(const SearchEntry& e) {
    json j;
    j["run"] = e.run;
    j["dir"] = e.dir;
    j["lr"] = e.lr;
    j["beta1"] = e.beta1;
    j["init_sigma"] = e.init_sigma;
    j["seed"] = e.seed;
    j["failed"] = e.failed;
    j["covered"] = e.covered;
    j["final_Ld"] = e.final_Ld;
    j["final_Lg"] = e.final_Lg;
    return j;
}

} // namespace

SearchResult run_search(const RunConfig& base, int n_runs, std::ostream& log) {
    if (n_runs < 1) throw ConfigError("search needs runs >= 1");
    RunConfig base_cfg = base;
    apply_model_defaults(base_cfg);
    validate_config(base_cfg);
    ensure_dir(base_cfg.out);

    // Hyperparameters drawn up front from per-run streams: the outcome does not
    // depend on worker scheduling.
    std::vector<RunConfig> configs;
    std::vector<SearchEntry> entries(static_cast<std::size_t>(n_runs));
    for (int r = 0; r < n_runs; ++r) {
        Rng hp(base_cfg.seed, streams::kSearch + static_cast<std::uint64_t>(r));
        RunConfig cfg = base_cfg;
        cfg.optimizer.lr = hp.log_uniform(1e-5, 1e-3);
        cfg.optimizer.beta1 = hp.uniform() < 0.5 ? 0.5 : 0.9;
        cfg.train.init_sigma = hp.log_uniform(0.003, 0.03);
        cfg.seed = base_cfg.seed + 1 + static_cast<std::uint64_t>(r);
        char name[16];
        std::snprintf(name, sizeof(name), "run_%02d", r);
        cfg.out = (fs::path(base_cfg.out) / name).string();
        SearchEntry& e = entries[static_cast<std::size_t>(r)];
        e.run = r;
        e.dir = cfg.out;
        e.lr = cfg.optimizer.lr;
        e.beta1 = cfg.optimizer.beta1;
        e.init_sigma = cfg.train.init_sigma;
        e.seed = cfg.seed;
        configs.push_back(std::move(cfg));
    }

    std::mutex log_mutex;
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    const int workers =
        std::max(1, std::min<int>(static_cast<int>(std::thread::hardware_concurrency()), n_runs));
    auto work = [&] {
        while (true) {
            const int r = next.fetch_add(1);
            if (r >= n_runs) return;
            SearchEntry& e = entries[static_cast<std::size_t>(r)];
            try {
                const RunResult result = run_training(configs[static_cast<std::size_t>(r)]);
                const ModeCoverageReport coverage =
                    coverage_of(result.final_checkpoint, result.config, nullptr, nullptr);
                e.covered = coverage.covered;
                if (!result.metrics.empty()) {
                    e.final_Ld = result.metrics.back().m.Ld;
                    e.final_Lg = result.metrics.back().m.Lg;
                }
                std::lock_guard<std::mutex> lock(log_mutex);
                log << "[search] run " << r << ": lr=" << format_double(e.lr, 3)
                    << " beta1=" << format_double(e.beta1, 2)
                    << " init_sigma=" << format_double(e.init_sigma, 3) << " -> covered "
                    << e.covered << "\n";
            } catch (const RuntimeAbort& abort) {
                e.failed = true;
                std::lock_guard<std::mutex> lock(log_mutex);
                log << "[search] run " << r << ": aborted (" << abort.what() << ")\n";
            } catch (...) {
                std::lock_guard<std::mutex> lock(log_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    SearchResult result;
    result.leaderboard = entries;
    std::sort(result.leaderboard.begin(), result.leaderboard.end(),
              [](const SearchEntry& a, const SearchEntry& b) {
                  if (a.failed != b.failed) return !a.failed;
                  if (a.covered != b.covered) return a.covered > b.covered;
                  if (a.final_Lg != b.final_Lg) return a.final_Lg < b.final_Lg;
                  return a.run < b.run;
              });

    int n_ok = 0;
    double sum = 0.0, sum2 = 0.0;
    int lo = 0, hi = 0;
    for (const SearchEntry& e : result.leaderboard) {
        if (e.failed) continue;
        if (n_ok == 0) lo = hi = e.covered;
        lo = std::min(lo, e.covered);
        hi = std::max(hi, e.covered);
        sum += e.covered;
        sum2 += static_cast<double>(e.covered) * e.covered;
        ++n_ok;
    }
    if (n_ok > 0) {
        result.coverage.mean = sum / n_ok;
        result.coverage.stddev = std::sqrt(std::max(0.0, sum2 / n_ok - result.coverage.mean * result.coverage.mean));
        result.coverage.min = lo;
        result.coverage.max = hi;
    }

    json j;
    j["format_version"] = 1;
    j["model"] = model_kind_name(base_cfg.model);
    j["n_runs"] = n_runs;
    json entries_json = json::array();
    for (const SearchEntry& e : result.leaderboard) entries_json.push_back(search_entry_json(e));
    j["entries"] = entries_json;
    j["coverage_stats"] = {{"mean", result.coverage.mean},
                           {"std", result.coverage.stddev},
                           {"min", result.coverage.min},
                           {"max", result.coverage.max}};
    j["best"] = result.leaderboard.empty() || result.leaderboard.front().failed
                    ? json(nullptr)
                    : search_entry_json(result.leaderboard.front());
    write_text_atomic(fs::path(base_cfg.out) / "leaderboard.json", j.dump(1) + "\n");

    log << "[search] coverage mean " << format_double(result.coverage.mean, 3) << " +- "
        << format_double(result.coverage.stddev, 3) << " (min: " << result.coverage.min
        << ", max: " << result.coverage.max << ")\n";

    if (n_ok == 0) throw RuntimeAbort("search: all " + std::to_string(n_runs) + " runs failed");
    return result;
}

} // namespace alilab
