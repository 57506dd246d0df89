#include "alilab/eval.hpp"

#include <cmath>
#include <string>

#include "alilab/ali.hpp"
#include "alilab/error.hpp"

namespace alilab {

ModeCoverageReport mode_coverage(const GaussianMixture& mix, const Tensor& samples) {
    ModeCoverageReport report;
    report.counts.assign(static_cast<std::size_t>(mix.size()), 0);
    report.n_samples = samples.empty() ? 0 : samples.rows();
    for (int i = 0; i < report.n_samples; ++i) {
        const int k = argmax_responsibility(mix, samples.at(i, 0), samples.at(i, 1));
        report.counts[static_cast<std::size_t>(k)] += 1;
    }
    for (long long c : report.counts)
        if (c > 0) report.covered += 1;
    report.dropped = mix.size() - report.covered;
    return report;
}

ReconReport reconstruct(const MlpParameters& encoder, const MlpParameters& decoder,
                        const Tensor& x, Rng& rng) {
    const Tensor eps = Tensor::randn({x.rows(), encoder.output_width() / 2}, rng);
    const Tensor z_hat = encode_apply(encoder, x, eps);
    ReconReport report;
    report.x_hat = decoder_mean(decoder, z_hat);
    double acc = 0.0;
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) {
            const double d = x.at(i, j) - report.x_hat.at(i, j);
            acc += d * d;
        }
    report.mse = acc / x.rows();
    return report;
}

Tensor latent_interpolate(const MlpParameters& encoder, const MlpParameters& decoder,
                          const Tensor& x1, const Tensor& x2, int steps) {
    if (steps < 2) throw ContractError("latent_interpolate needs steps >= 2");
    if (x1.rows() != 1 || x2.rows() != 1)
        throw ContractError("latent_interpolate endpoints must be single rows");
    const Tensor z1 = encoder_mean(encoder, x1);
    const Tensor z2 = encoder_mean(encoder, x2);
    const int dz = z1.cols();
    Tensor zs = Tensor::zeros({steps, dz});
    for (int s = 0; s < steps; ++s) {
        const double w = static_cast<double>(s) / (steps - 1);
        for (int j = 0; j < dz; ++j) zs.at(s, j) = (1.0 - w) * z1.at(0, j) + w * z2.at(0, j);
    }
    return decoder_mean(decoder, zs);
}

OccupancyReport latent_occupancy(const MlpParameters& encoder, const Tensor& data, Rng& rng) {
    const int n = data.rows();
    if (n < 100) throw ContractError("latent_occupancy needs at least 100 points, got " + std::to_string(n));
    const int dz = encoder.output_width() / 2;
    const Tensor eps = Tensor::randn({n, dz}, rng);

    OccupancyReport report;
    report.z_hat = encode_apply(encoder, data, eps);
    report.mean.assign(static_cast<std::size_t>(dz), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dz; ++j) report.mean[static_cast<std::size_t>(j)] += report.z_hat.at(i, j);
    for (double& m : report.mean) m /= n;

    report.cov = Tensor::zeros({dz, dz});
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < dz; ++a)
            for (int b = 0; b < dz; ++b)
                report.cov.at(a, b) += (report.z_hat.at(i, a) - report.mean[static_cast<std::size_t>(a)]) *
                                       (report.z_hat.at(i, b) - report.mean[static_cast<std::size_t>(b)]);
    for (std::int64_t i = 0; i < report.cov.size(); ++i) report.cov[i] /= n;

    double mean_norm = 0.0;
    for (double m : report.mean) mean_norm += m * m;
    double fro = 0.0;
    for (int a = 0; a < dz; ++a)
        for (int b = 0; b < dz; ++b) {
            const double d = report.cov.at(a, b) - (a == b ? 1.0 : 0.0);
            fro += d * d;
        }
    report.moment_distance = std::sqrt(mean_norm) + std::sqrt(fro);

    report.histogram = Tensor::zeros({kOccupancyBins, kOccupancyBins});
    const double lo = -kOccupancyExtent, hi = kOccupancyExtent;
    const double w = (hi - lo) / kOccupancyBins;
    long long in_range = 0;
    for (int i = 0; i < n; ++i) {
        const double z0 = report.z_hat.at(i, 0);
        const double z1 = dz > 1 ? report.z_hat.at(i, 1) : 0.0;
        if (z0 < lo || z0 >= hi || z1 < lo || z1 >= hi) continue;
        const int b0 = static_cast<int>((z0 - lo) / w);
        const int b1 = static_cast<int>((z1 - lo) / w);
        report.histogram.at(b0, b1) += 1.0;
        ++in_range;
    }
    if (in_range > 0)
        for (std::int64_t i = 0; i < report.histogram.size(); ++i)
            report.histogram[i] /= static_cast<double>(in_range);
    return report;
}

CycleReport invertibility_diagnostic(const MlpParameters& encoder, const MlpParameters& decoder,
                                     const Tensor& data, int dim_z, Rng& rng) {
    CycleReport report;
    {
        const Tensor z = encoder_mean(encoder, data);
        const Tensor x_hat = decoder_mean(decoder, z);
        double acc = 0.0;
        for (int i = 0; i < data.rows(); ++i)
            for (int j = 0; j < data.cols(); ++j) {
                const double d = data.at(i, j) - x_hat.at(i, j);
                acc += d * d;
            }
        report.x_cycle_mse = acc / data.rows();
    }
    {
        const Tensor z = Tensor::randn({data.rows(), dim_z}, rng);
        const Tensor x = decoder_mean(decoder, z);
        const Tensor z_hat = encoder_mean(encoder, x);
        double acc = 0.0;
        for (int i = 0; i < z.rows(); ++i)
            for (int j = 0; j < z.cols(); ++j) {
                const double d = z.at(i, j) - z_hat.at(i, j);
                acc += d * d;
            }
        report.z_cycle_mse = acc / z.rows();
    }
    return report;
}

// --- tabular oracles ---

void DiscreteJoint::validate() const {
    if (nx < 1 || nz < 1 || mass.size() != static_cast<std::size_t>(nx) * nz)
        throw ContractError("discrete joint has inconsistent dimensions");
    double total = 0.0;
    for (double m : mass) {
        if (m < 0.0) throw ContractError("discrete joint has negative mass");
        total += m;
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw ContractError("discrete joint mass sums to " + std::to_string(total));
}

DiscreteJoint random_joint(int nx, int nz, Rng& rng, double zero_fraction) {
    DiscreteJoint j;
    j.nx = nx;
    j.nz = nz;
    j.mass.resize(static_cast<std::size_t>(nx) * nz);
    double total = 0.0;
    for (double& m : j.mass) {
        m = rng.uniform() < zero_fraction ? 0.0 : rng.uniform();
        total += m;
    }
    if (total == 0.0) {
        j.mass[0] = 1.0;
        total = 1.0;
    }
    for (double& m : j.mass) m /= total;
    // Renormalize exactly once more so the float sum lands within the 1e-12 contract.
    double check = 0.0;
    for (double m : j.mass) check += m;
    for (double& m : j.mass) m /= check;
    return j;
}

OptimalDiscriminator optimal_discriminator(const DiscreteJoint& q, const DiscreteJoint& p) {
    q.validate();
    p.validate();
    if (q.nx != p.nx || q.nz != p.nz)
        throw ContractError("optimal_discriminator: grids differ");
    OptimalDiscriminator out;
    out.d.resize(q.mass.size(), 0.0);
    out.defined.resize(q.mass.size(), 0);
    for (std::size_t i = 0; i < q.mass.size(); ++i) {
        const double total = q.mass[i] + p.mass[i];
        if (total > 0.0) {
            out.d[i] = q.mass[i] / total;
            out.defined[i] = 1;
        }
    }
    return out;
}

double value_at(const DiscreteJoint& q, const DiscreteJoint& p, const std::vector<double>& d) {
    q.validate();
    p.validate();
    if (q.nx != p.nx || q.nz != p.nz || d.size() != q.mass.size())
        throw ContractError("value_at: dimensions differ");
    double value = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(d[i] >= 0.0 && d[i] <= 1.0))
            throw DomainError("value_at: D = " + std::to_string(d[i]) + " outside [0, 1]");
        // Only the side whose mass multiplies the diverging log constrains D:
        // a q-massed cell needs D > 0, a p-massed cell needs D < 1. The optimal
        // discriminator legitimately sits on the boundary where one side is empty.
        if (q.mass[i] > 0.0) {
            if (!(d[i] > 0.0))
                throw DomainError("value_at: D = 0 on a cell with q-mass");
            value += q.mass[i] * std::log(d[i]);
        }
        if (p.mass[i] > 0.0) {
            if (!(d[i] < 1.0))
                throw DomainError("value_at: D = 1 on a cell with p-mass");
            value += p.mass[i] * std::log1p(-d[i]);
        }
    }
    return value;
}

double jsd_discrete(const DiscreteJoint& q, const DiscreteJoint& p) {
    q.validate();
    p.validate();
    if (q.nx != p.nx || q.nz != p.nz) throw ContractError("jsd_discrete: grids differ");
    double kl_qm = 0.0, kl_pm = 0.0;
    for (std::size_t i = 0; i < q.mass.size(); ++i) {
        const double m = 0.5 * (q.mass[i] + p.mass[i]);
        if (q.mass[i] > 0.0) kl_qm += q.mass[i] * std::log(q.mass[i] / m);
        if (p.mass[i] > 0.0) kl_pm += p.mass[i] * std::log(p.mass[i] / m);
    }
    return 0.5 * (kl_qm + kl_pm);
}

} // namespace alilab
