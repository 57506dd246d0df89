#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "alilab/error.hpp"
#include "alilab/eval.hpp"
#include "alilab/mixture.hpp"
#include "alilab/nn.hpp"
#include "alilab/rng.hpp"
#include "test_util.hpp"

using namespace alilab;

namespace {

MlpParameters identity_encoder() {
    // mu = x, log sigma clamped to -7: a near-deterministic identity.
    MlpParameters enc;
    enc.head = Head::SplitGaussian;
    enc.leaky_slope = 0.02;
    enc.layers.resize(1);
    enc.layers[0].weight = Tensor::from({2, 4}, {1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0});
    enc.layers[0].bias = Tensor::from({4}, {0.0, 0.0, -50.0, -50.0});
    return enc;
}

MlpParameters identity_decoder() {
    MlpParameters dec;
    dec.head = Head::Linear;
    dec.leaky_slope = 0.02;
    dec.layers.resize(1);
    dec.layers[0].weight = Tensor::from({2, 2}, {1.0, 0.0, 0.0, 1.0});
    dec.layers[0].bias = Tensor::zeros({2});
    return dec;
}

DiscreteJoint uniform_joint(int nx, int nz) {
    DiscreteJoint j;
    j.nx = nx;
    j.nz = nz;
    j.mass.assign(static_cast<std::size_t>(nx) * nz, 1.0 / (nx * nz));
    return j;
}

} // namespace

TEST_CASE("optimal discriminator on a frozen two-cell pair") {
    // q = [0.3, 0.7], p = [0.6, 0.4]; JSD and V computed independently.
    DiscreteJoint q, p;
    q.nx = 2;
    q.nz = 1;
    q.mass = {0.3, 0.7};
    p.nx = 2;
    p.nz = 1;
    p.mass = {0.6, 0.4};
    q.validate();
    p.validate();

    const OptimalDiscriminator d = optimal_discriminator(q, p);
    CHECK(d.d[0] == doctest::Approx(0.3 / 0.9).epsilon(1e-14));
    CHECK(d.d[1] == doctest::Approx(0.7 / 1.1).epsilon(1e-14));
    CHECK(d.defined[0] == 1);
    CHECK(d.defined[1] == 1);

    const double v = value_at(q, p, d.d);
    CHECK(v == doctest::Approx(-1.2938927027568636).epsilon(1e-12));
    CHECK(jsd_discrete(q, p) == doctest::Approx(0.04620082918151349).epsilon(1e-13));
    CHECK(v == doctest::Approx(-std::log(4.0) + 2.0 * jsd_discrete(q, p)).epsilon(1e-12));
}

TEST_CASE("identical joints sit exactly at the -log 4 saddle") {
    Rng rng(61);
    for (int trial = 0; trial < 10; ++trial) {
        const DiscreteJoint q = random_joint(1 + static_cast<int>(rng.bounded(8)),
                                             1 + static_cast<int>(rng.bounded(8)), rng);
        const OptimalDiscriminator d = optimal_discriminator(q, q);
        for (std::size_t i = 0; i < d.d.size(); ++i)
            if (d.defined[i]) CHECK(d.d[i] == 0.5);
        CHECK(std::abs(value_at(q, q, d.d) + std::log(4.0)) < 1e-12);
        CHECK(jsd_discrete(q, q) < 1e-14);
    }
}

TEST_CASE("disjoint supports: JSD saturates at log 2 and D* hits the legal boundary") {
    DiscreteJoint q = uniform_joint(2, 2);
    DiscreteJoint p = uniform_joint(2, 2);
    // q lives on the first row, p on the second
    q.mass = {0.5, 0.5, 0.0, 0.0};
    p.mass = {0.0, 0.0, 0.5, 0.5};
    const OptimalDiscriminator d = optimal_discriminator(q, p);
    CHECK(d.d[0] == 1.0);
    CHECK(d.d[1] == 1.0);
    CHECK(d.d[2] == 0.0);
    CHECK(d.d[3] == 0.0);
    // D* = 1 on q-only cells and 0 on p-only cells is evaluable: V = 0
    CHECK(std::abs(value_at(q, p, d.d)) < 1e-12);
    CHECK(jsd_discrete(q, p) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("value_at rejects discriminators outside their domain") {
    DiscreteJoint q = uniform_joint(2, 1);
    DiscreteJoint p = uniform_joint(2, 1);
    SUBCASE("d = 0 on a q-mass cell") {
        CHECK_THROWS_AS(value_at(q, p, {0.0, 0.5}), DomainError);
    }
    SUBCASE("d = 1 on a p-mass cell") {
        CHECK_THROWS_AS(value_at(q, p, {0.5, 1.0}), DomainError);
    }
    SUBCASE("d outside [0, 1]") {
        CHECK_THROWS_AS(value_at(q, p, {-0.1, 0.5}), DomainError);
        CHECK_THROWS_AS(value_at(q, p, {0.5, 1.1}), DomainError);
    }
    SUBCASE("boundary values are fine on cells without the relevant mass") {
        DiscreteJoint q2, p2;
        q2.nx = 2;
        q2.nz = 1;
        q2.mass = {1.0, 0.0};
        p2.nx = 2;
        p2.nz = 1;
        p2.mass = {0.0, 1.0};
        CHECK(std::abs(value_at(q2, p2, {1.0, 0.0})) < 1e-15);
    }
    SUBCASE("wrong table size is a contract violation") {
        CHECK_THROWS_AS(value_at(q, p, {0.5}), ContractError);
    }
}

TEST_CASE("the analytic optimum beats perturbed discriminators") {
    Rng rng(62);
    for (int trial = 0; trial < 10; ++trial) {
        const int nx = 1 + static_cast<int>(rng.bounded(8));
        const int nz = 1 + static_cast<int>(rng.bounded(8));
        const DiscreteJoint q = random_joint(nx, nz, rng, trial % 2 == 0 ? 0.3 : 0.0);
        const DiscreteJoint p = random_joint(nx, nz, rng, trial % 2 == 0 ? 0.3 : 0.0);
        const OptimalDiscriminator d = optimal_discriminator(q, p);
        const double v_star = value_at(q, p, d.d);
        for (int k = 0; k < 50; ++k) {
            std::vector<double> perturbed = d.d;
            for (double& val : perturbed) {
                val += 0.2 * (rng.uniform() - 0.5);
                val = std::min(1.0 - 1e-9, std::max(1e-9, val));
            }
            CHECK(value_at(q, p, perturbed) <= v_star + 1e-12);
        }
    }
}

TEST_CASE("random joints are honest distributions") {
    Rng rng(63);
    const DiscreteJoint j = random_joint(7, 5, rng, 0.4);
    j.validate();
    double sum = 0.0;
    int zeros = 0;
    for (double m : j.mass) {
        CHECK(m >= 0.0);
        sum += m;
        zeros += (m == 0.0) ? 1 : 0;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(zeros >= 7 * 5 * 2 / 10); // ~40% zeroed

    SUBCASE("validation rejects a non-normalized joint") {
        DiscreteJoint bad = j;
        bad.mass[0] += 0.5;
        CHECK_THROWS(bad.validate());
    }
    SUBCASE("both-zero cells are excluded via the defined flag") {
        DiscreteJoint q = uniform_joint(2, 1), p = uniform_joint(2, 1);
        q.mass = {1.0, 0.0};
        p.mass = {1.0, 0.0};
        const OptimalDiscriminator d = optimal_discriminator(q, p);
        CHECK(d.defined[0] == 1);
        CHECK(d.defined[1] == 0);
        CHECK(d.d[0] == 0.5);
    }
}

TEST_CASE("jsd matches a direct two-KL computation") {
    Rng rng(64);
    for (int trial = 0; trial < 10; ++trial) {
        const DiscreteJoint q = random_joint(6, 4, rng, 0.2);
        const DiscreteJoint p = random_joint(6, 4, rng, 0.2);
        double direct = 0.0;
        for (std::size_t i = 0; i < q.mass.size(); ++i) {
            const double m = 0.5 * (q.mass[i] + p.mass[i]);
            if (q.mass[i] > 0.0) direct += 0.5 * q.mass[i] * std::log(q.mass[i] / m);
            if (p.mass[i] > 0.0) direct += 0.5 * p.mass[i] * std::log(p.mass[i] / m);
        }
        CHECK(jsd_discrete(q, p) == doctest::Approx(direct).epsilon(1e-12));
        CHECK(jsd_discrete(q, p) >= 0.0);
        CHECK(jsd_discrete(q, p) <= std::log(2.0) + 1e-12);
    }
}

TEST_CASE("mode coverage counts argmax assignments") {
    GaussianMixture mix = standardized(make_grid_mixture(5, 2.0, 0.05), grid_scale(5, 2.0));
    // place 3 samples exactly on centroid 0, 2 on centroid 7, 1 on centroid 24
    Tensor samples = Tensor::zeros({6, 2});
    auto put = [&](int row, int comp) {
        samples.at(row, 0) = mix.components[static_cast<std::size_t>(comp)].mean[0];
        samples.at(row, 1) = mix.components[static_cast<std::size_t>(comp)].mean[1];
    };
    put(0, 0);
    put(1, 0);
    put(2, 0);
    put(3, 7);
    put(4, 7);
    put(5, 24);
    const ModeCoverageReport r = mode_coverage(mix, samples);
    CHECK(r.n_samples == 6);
    CHECK(r.covered == 3);
    CHECK(r.dropped == 22);
    CHECK(r.counts[0] == 3);
    CHECK(r.counts[7] == 2);
    CHECK(r.counts[24] == 1);
    long long total = 0;
    for (long long c : r.counts) total += c;
    CHECK(total == r.n_samples);
    CHECK(r.covered + r.dropped == mix.size());
}

TEST_CASE("reconstruction against a zero decoder reduces to the data norm") {
    MlpParameters enc = identity_encoder();
    MlpParameters dec = identity_decoder();
    for (auto& layer : dec.layers)
        for (std::int64_t i = 0; i < layer.weight.size(); ++i) layer.weight[i] = 0.0;

    Rng data_rng(71);
    const Tensor x = Tensor::randn({500, 2}, data_rng);
    Rng rng(72, streams::kEvalRecon);
    const ReconReport r = reconstruct(enc, dec, x, rng);
    REQUIRE(r.x_hat.rows() == 500);
    double norm = 0.0;
    for (int i = 0; i < 500; ++i)
        norm += (x.at(i, 0) * x.at(i, 0) + x.at(i, 1) * x.at(i, 1)) / 500.0;
    CHECK(r.mse == doctest::Approx(norm).epsilon(1e-12));
    for (std::int64_t i = 0; i < r.x_hat.size(); ++i) CHECK(r.x_hat[i] == 0.0);
}

TEST_CASE("near-identity autoencoder reconstructs near-perfectly") {
    Rng data_rng(73);
    const Tensor x = Tensor::randn({300, 2}, data_rng);
    Rng rng(74, streams::kEvalRecon);
    const ReconReport r = reconstruct(identity_encoder(), identity_decoder(), x, rng);
    CHECK(r.mse < 1e-4); // only the sigma = e^-7 jitter remains
}

TEST_CASE("latent interpolation walks the straight segment for identity nets") {
    const Tensor x1 = Tensor::from({1, 2}, {-1.0, 0.5});
    const Tensor x2 = Tensor::from({1, 2}, {1.0, -0.5});
    const int steps = 5;
    const Tensor path = latent_interpolate(identity_encoder(), identity_decoder(), x1, x2, steps);
    REQUIRE(path.rows() == steps);
    REQUIRE(path.cols() == 2);
    for (int i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) / (steps - 1);
        CHECK(path.at(i, 0) == doctest::Approx(-1.0 + 2.0 * t).epsilon(1e-12));
        CHECK(path.at(i, 1) == doctest::Approx(0.5 - 1.0 * t).epsilon(1e-12));
    }
    CHECK_THROWS_AS(latent_interpolate(identity_encoder(), identity_decoder(), x1, x2, 1),
                    ContractError);
}

TEST_CASE("latent occupancy") {
    SUBCASE("identity encoder on prior draws matches the prior") {
        Rng data_rng(75);
        const Tensor z = Tensor::randn({10000, 2}, data_rng);
        Rng rng(76, streams::kEvalLatent);
        const OccupancyReport r = latent_occupancy(identity_encoder(), z, rng);
        CHECK(r.moment_distance < 0.1);
        REQUIRE(r.mean.size() == 2);
        CHECK(std::abs(r.mean[0]) < 0.05);
        CHECK(std::abs(r.mean[1]) < 0.05);
        CHECK(r.cov.at(0, 0) == doctest::Approx(1.0).epsilon(0.1));
        CHECK(r.cov.at(1, 1) == doctest::Approx(1.0).epsilon(0.1));
        CHECK(r.z_hat.rows() == 10000);
    }
    SUBCASE("constant encoder degenerates to ||mu|| + sqrt(dim_z)") {
        MlpParameters enc;
        enc.head = Head::SplitGaussian;
        enc.leaky_slope = 0.02;
        enc.layers.resize(1);
        enc.layers[0].weight = Tensor::zeros({2, 4});
        enc.layers[0].bias = Tensor::from({4}, {0.7, -0.2, -50.0, -50.0});
        Rng data_rng(77);
        const Tensor x = Tensor::randn({2000, 2}, data_rng);
        Rng rng(78, streams::kEvalLatent);
        const OccupancyReport r = latent_occupancy(enc, x, rng);
        const double expected = std::sqrt(0.7 * 0.7 + 0.2 * 0.2) + std::sqrt(2.0);
        CHECK(r.moment_distance == doctest::Approx(expected).epsilon(1e-3));
    }
    SUBCASE("histogram is a distribution over the latent box") {
        Rng data_rng(79);
        const Tensor z = Tensor::randn({500, 2}, data_rng);
        Rng rng(80, streams::kEvalLatent);
        const OccupancyReport r = latent_occupancy(identity_encoder(), z, rng);
        REQUIRE(r.histogram.rows() == kOccupancyBins);
        REQUIRE(r.histogram.cols() == kOccupancyBins);
        double sum = 0.0;
        for (std::int64_t i = 0; i < r.histogram.size(); ++i) {
            CHECK(r.histogram[i] >= 0.0);
            sum += r.histogram[i];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("fewer than 100 points is a contract violation") {
        Rng data_rng(81);
        const Tensor z = Tensor::randn({99, 2}, data_rng);
        Rng rng(82);
        CHECK_THROWS_AS(latent_occupancy(identity_encoder(), z, rng), ContractError);
    }
}

TEST_CASE("invertibility diagnostic is tiny for identity networks") {
    Rng data_rng(83);
    const Tensor x = Tensor::randn({400, 2}, data_rng);
    Rng rng(84, streams::kEvalInvert);
    const CycleReport r = invertibility_diagnostic(identity_encoder(), identity_decoder(), x, 2, rng);
    CHECK(r.x_cycle_mse < 1e-10);
    CHECK(r.z_cycle_mse < 1e-10);
}
