#pragma once

#include <cstdint>
#include <vector>

#include "alilab/mixture.hpp"
#include "alilab/nn.hpp"
#include "alilab/rng.hpp"
#include "alilab/tensor.hpp"

namespace alilab {

// --- sample-based diagnostics ---

struct ModeCoverageReport {
    int n_samples = 0;
    std::vector<long long> counts; // per component
    int covered = 0;
    int dropped = 0;
};

// Assign each sample to its argmax-responsibility component (ties -> lowest index).
ModeCoverageReport mode_coverage(const GaussianMixture& mix, const Tensor& samples);

struct ReconReport {
    Tensor x_hat;
    double mse = 0.0; // mean over samples of the squared Euclidean error
};

// One stochastic encode (z = mu + sigma*eps) then a deterministic decode per point.
ReconReport reconstruct(const MlpParameters& encoder, const MlpParameters& decoder,
                        const Tensor& x, Rng& rng);

// Decoded points along the segment between the encoder-mean latents of x1 and x2,
// steps >= 2 including both endpoints.
Tensor latent_interpolate(const MlpParameters& encoder, const MlpParameters& decoder,
                          const Tensor& x1, const Tensor& x2, int steps);

struct OccupancyReport {
    std::vector<double> mean;
    Tensor cov;             // [dz, dz]
    double moment_distance; // ||mean|| + ||cov - I||_F
    Tensor histogram;       // [bins, bins] over [-4,4]^2 of the first two dims, sums to 1
    Tensor z_hat;           // the aggregated draws (one per data point)
};

inline constexpr int kOccupancyBins = 40;
inline constexpr double kOccupancyExtent = 4.0;

// Aggregate one z_hat draw per data point; requires at least 100 points.
OccupancyReport latent_occupancy(const MlpParameters& encoder, const Tensor& data, Rng& rng);

struct CycleReport {
    double x_cycle_mse = 0.0; // || x - dec(enc_mu(x)) ||^2 mean
    double z_cycle_mse = 0.0; // || z - enc_mu(dec(z)) ||^2 mean over fresh prior draws
};

CycleReport invertibility_diagnostic(const MlpParameters& encoder, const MlpParameters& decoder,
                                     const Tensor& data, int dim_z, Rng& rng);

// --- tabular oracles ---

// Joint distribution over a small grid of (x, z) cells, masses >= 0 summing to 1.
struct DiscreteJoint {
    int nx = 0;
    int nz = 0;
    std::vector<double> mass;

    double& at(int i, int j) { return mass[static_cast<std::size_t>(i) * nz + j]; }
    double at(int i, int j) const { return mass[static_cast<std::size_t>(i) * nz + j]; }
    void validate() const; // nonnegative, sums to 1 within 1e-12
};

// Random joint with masses ~ U(0,1) normalized; zero_fraction of cells zeroed first.
DiscreteJoint random_joint(int nx, int nz, Rng& rng, double zero_fraction = 0.0);

struct OptimalDiscriminator {
    std::vector<double> d;             // q / (q + p) where defined
    std::vector<std::uint8_t> defined; // 0 on cells where q + p == 0
};

OptimalDiscriminator optimal_discriminator(const DiscreteJoint& q, const DiscreteJoint& p);

// E_q log d + E_p log(1 - d). All d must lie in [0,1]; cells carrying q-mass
// additionally need d > 0 and cells carrying p-mass need d < 1 (so the optimal
// discriminator itself stays evaluable on disjoint supports). Violations ->
// DomainError.
double value_at(const DiscreteJoint& q, const DiscreteJoint& p, const std::vector<double>& d);

// Jensen-Shannon divergence, natural log, 0 log 0 = 0.
double jsd_discrete(const DiscreteJoint& q, const DiscreteJoint& p);

} // namespace alilab
