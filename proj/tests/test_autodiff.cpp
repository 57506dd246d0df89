#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "alilab/ali.hpp"
#include "alilab/error.hpp"
#include "alilab/nn.hpp"
#include "alilab/rng.hpp"
#include "alilab/tape.hpp"
#include "alilab/tensor.hpp"

using namespace alilab;

namespace {

constexpr double kFdStep = 1e-5;
constexpr double kFdTol = 1e-4;

Tensor random_point(std::vector<int> shape, Rng& rng, double lo = -2.0, double hi = 2.0) {
    Tensor t = Tensor::zeros(shape);
    for (std::int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

// Max FD error of `build` over `n` random points of the given shape.
double fd_sweep(const std::function<NodeId(Tape&, NodeId)>& build, std::vector<int> shape,
                int n, Rng& rng, double lo = -2.0, double hi = 2.0) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const Tensor point = random_point(shape, rng, lo, hi);
        worst = std::max(worst, gradient_check(build, point, kFdStep));
    }
    return worst;
}

} // namespace

TEST_CASE("finite differences: every primitive op") {
    Rng rng(101);
    const Tensor other = random_point({3, 4}, rng);
    const Tensor bias = random_point({4}, rng);
    const Tensor square_mat = random_point({4, 3}, rng);

    auto reduce = [](Tape& t, NodeId x) { return t.mean(x); };
    (void)reduce;

    SUBCASE("add") {
        auto build = [&](Tape& t, NodeId x) { return t.mean(t.add(x, t.leaf(other))); };
        CHECK(fd_sweep(build, {3, 4}, 10, rng) < kFdTol);
    }
    SUBCASE("subtract") {
        auto build = [&](Tape& t, NodeId x) { return t.mean(t.subtract(x, t.leaf(other))); };
        CHECK(fd_sweep(build, {3, 4}, 10, rng) < kFdTol);
    }
    SUBCASE("multiply") {
        auto build = [&](Tape& t, NodeId x) { return t.mean(t.multiply(x, t.leaf(other))); };
        CHECK(fd_sweep(build, {3, 4}, 10, rng) < kFdTol);
    }
    SUBCASE("matmul lhs and rhs") {
        auto lhs = [&](Tape& t, NodeId x) { return t.mean(t.matmul(x, t.leaf(square_mat))); };
        CHECK(fd_sweep(lhs, {3, 4}, 10, rng) < kFdTol);
        auto rhs = [&](Tape& t, NodeId x) { return t.mean(t.matmul(t.leaf(other), x)); };
        CHECK(fd_sweep(rhs, {4, 3}, 10, rng) < kFdTol);
    }
    SUBCASE("concat_last_axis both sides") {
        auto left = [&](Tape& t, NodeId x) {
            return t.mean(t.concat_last_axis(x, t.leaf(other)));
        };
        CHECK(fd_sweep(left, {3, 2}, 10, rng) < kFdTol);
        auto right = [&](Tape& t, NodeId x) {
            return t.mean(t.concat_last_axis(t.leaf(other), x));
        };
        CHECK(fd_sweep(right, {3, 2}, 10, rng) < kFdTol);
    }
    SUBCASE("sum") {
        auto build = [&](Tape& t, NodeId x) { return t.sum(x); };
        CHECK(fd_sweep(build, {3, 4}, 10, rng) < kFdTol);
    }
    SUBCASE("mean") {
        auto build = [&](Tape& t, NodeId x) { return t.mean(x); };
        CHECK(fd_sweep(build, {3, 4}, 10, rng) < kFdTol);
    }
    SUBCASE("negate") {
        auto build = [&](Tape& t, NodeId x) { return t.mean(t.negate(x)); };
        CHECK(fd_sweep(build, {3, 4}, 10, rng) < kFdTol);
    }
    SUBCASE("exp") {
        auto build = [&](Tape& t, NodeId x) { return t.mean(t.exponential(x)); };
        CHECK(fd_sweep(build, {3, 4}, 10, rng) < kFdTol);
    }
    SUBCASE("log") {
        auto build = [&](Tape& t, NodeId x) { return t.mean(t.logarithm(x)); };
        CHECK(fd_sweep(build, {3, 4}, 10, rng, 0.1, 3.0) < kFdTol);
    }
    SUBCASE("sigmoid") {
        auto build = [&](Tape& t, NodeId x) { return t.mean(t.sigmoid(x)); };
        CHECK(fd_sweep(build, {3, 4}, 10, rng) < kFdTol);
    }
    SUBCASE("tanh") {
        auto build = [&](Tape& t, NodeId x) { return t.mean(t.tanh(x)); };
        CHECK(fd_sweep(build, {3, 4}, 10, rng) < kFdTol);
    }
    SUBCASE("leaky_relu") {
        // Keep points away from the kink so central differences are valid.
        auto build = [&](Tape& t, NodeId x) { return t.mean(t.leaky_relu(x, 0.02)); };
        double worst = 0.0;
        for (int i = 0; i < 10; ++i) {
            Tensor point = random_point({3, 4}, rng);
            for (std::int64_t k = 0; k < point.size(); ++k)
                if (std::abs(point[k]) < 10 * kFdStep) point[k] = 0.5;
            worst = std::max(worst, gradient_check(build, point, kFdStep));
        }
        CHECK(worst < kFdTol);
    }
    SUBCASE("square") {
        auto build = [&](Tape& t, NodeId x) { return t.mean(t.square(x)); };
        CHECK(fd_sweep(build, {3, 4}, 10, rng) < kFdTol);
    }
    SUBCASE("broadcast_add_bias both arguments") {
        auto data = [&](Tape& t, NodeId x) {
            return t.mean(t.broadcast_add_bias(x, t.leaf(bias)));
        };
        CHECK(fd_sweep(data, {3, 4}, 10, rng) < kFdTol);
        auto wrt_bias = [&](Tape& t, NodeId x) {
            return t.mean(t.broadcast_add_bias(t.leaf(other), x));
        };
        CHECK(fd_sweep(wrt_bias, {4}, 10, rng) < kFdTol);
    }
}

TEST_CASE("finite differences: composite helpers") {
    Rng rng(202);

    SUBCASE("softplus") {
        auto build = [&](Tape& t, NodeId x) { return t.mean(softplus(t, x)); };
        CHECK(fd_sweep(build, {3, 4}, 10, rng, -5.0, 5.0) < kFdTol);
    }
    SUBCASE("scale and add_constant") {
        auto build = [&](Tape& t, NodeId x) {
            return t.mean(add_constant(t, scale(t, x, -1.7), 0.25));
        };
        CHECK(fd_sweep(build, {3, 4}, 10, rng) < kFdTol);
    }
    SUBCASE("select_columns") {
        auto build = [&](Tape& t, NodeId x) { return t.mean(select_columns(t, x, 1, 3)); };
        CHECK(fd_sweep(build, {3, 4}, 10, rng) < kFdTol);
    }
    SUBCASE("clamp_columns away from the boundary") {
        auto build = [&](Tape& t, NodeId x) {
            return t.mean(clamp_columns(t, x, 0, 2, -1.0, 1.0));
        };
        // Points in (-0.9, 0.9): strictly inside, so the clamp is locally linear.
        CHECK(fd_sweep(build, {3, 4}, 10, rng, -0.9, 0.9) < kFdTol);
    }
    SUBCASE("logsumexp_rows") {
        std::vector<char> mask{1, 0, 1, 1};
        auto build = [&](Tape& t, NodeId x) { return t.mean(logsumexp_rows(t, x, mask)); };
        // Moderate logit range: wider spreads push the true softmax weights of
        // the small coordinates below what central differences can resolve.
        CHECK(fd_sweep(build, {3, 4}, 10, rng, -4.0, 4.0) < kFdTol);
    }
    SUBCASE("logsumexp_rows stays finite and exact at extreme logit spreads") {
        std::vector<char> mask{1, 0, 1, 1};
        Tape t;
        Tensor x = Tensor::from({1, 4}, {40.0, 999.0, -40.0, 35.0}); // col 1 masked out
        const NodeId out = t.sum(logsumexp_rows(t, t.leaf(x), mask));
        const double expect = 40.0 + std::log(1.0 + std::exp(-80.0) + std::exp(-5.0));
        CHECK(std::abs(t.value(out)[0] - expect) < 1e-12);
        Gradients g = backward(t, out);
        const Tensor& gx = g.wrt(0);
        for (int j = 0; j < 4; ++j) CHECK(std::isfinite(gx.at(0, j)));
        CHECK(gx.at(0, 1) == 0.0); // masked column gets no gradient
    }
}

TEST_CASE("finite differences: adversarial losses through a small network") {
    Rng rng(303);
    AliArch arch;
    arch.encoder_hidden = {6};
    arch.decoder_hidden = {6};
    arch.discriminator_hidden = {6};
    arch.init_sigma = 0.3;
    AliModel model = ali_init(arch, rng);

    const Tensor x = random_point({5, 2}, rng, -1.0, 1.0);
    const Tensor z = random_point({5, 2}, rng, -1.0, 1.0);
    const Tensor eps = random_point({5, 2}, rng, -1.0, 1.0);

    // Differentiate each loss with respect to the first encoder weight matrix:
    // the full graph (encode -> decode -> discriminate -> softplus means) hangs
    // off that leaf.
    auto loss_wrt_encw0 = [&](bool gen) {
        return [&, gen](Tape& t, NodeId w0) {
            MlpParameters enc = model.encoder;
            TapedMlp taped;
            taped.params = &enc;
            for (std::size_t l = 0; l < enc.layers.size(); ++l) {
                taped.weights.push_back(l == 0 ? w0 : t.leaf(enc.layers[l].weight));
                taped.biases.push_back(t.leaf(enc.layers[l].bias));
            }
            TapedMlp dec = register_mlp(t, model.decoder);
            TapedMlp dsc = register_mlp(t, model.discriminator);
            const NodeId z_hat = encode(t, taped, t.leaf(x), t.leaf(eps));
            const NodeId x_til = dec.forward(t, t.leaf(z));
            const NodeId lq = dsc.forward(t, t.concat_last_axis(t.leaf(x), z_hat));
            const NodeId lp = dsc.forward(t, t.concat_last_axis(x_til, t.leaf(z)));
            return gen ? generator_loss(t, lq, lp) : discriminator_loss(t, lq, lp);
        };
    };
    CHECK(gradient_check(loss_wrt_encw0(false), model.encoder.layers[0].weight, kFdStep) < kFdTol);
    CHECK(gradient_check(loss_wrt_encw0(true), model.encoder.layers[0].weight, kFdStep) < kFdTol);
}

TEST_CASE("finite differences: gaussian ELBO terms") {
    Rng rng(404);
    // ELBO pieces for a diagonal gaussian: recon -0.5||x - mu_x||^2 and the
    // analytic KL, both built from primitives on the tape.
    const Tensor x = random_point({4, 2}, rng, -1.0, 1.0);
    const Tensor eps = random_point({4, 2}, rng, -1.0, 1.0);

    auto build = [&](Tape& t, NodeId enc_out) {
        // enc_out: [4, 4] = [mu | log_sigma] over z.
        const NodeId mu = select_columns(t, enc_out, 0, 2);
        const NodeId ls = clamp_columns(t, enc_out, 2, 4, kLogSigmaMin, kLogSigmaMax);
        const NodeId sig = t.exponential(select_columns(t, ls, 2, 4));
        const NodeId z = t.add(mu, t.multiply(sig, t.leaf(eps)));
        // negative recon: mean ||x - z||^2 (stand-in decoder = identity)
        const NodeId recon = t.mean(t.square(t.subtract(t.leaf(x), z)));
        // KL(N(mu, sig) || N(0,1)) summed over dims, averaged over rows:
        // 0.5 * (mu^2 + sig^2 - 1 - 2 log sig)
        const NodeId kl_inner = t.add(
            t.square(mu),
            t.subtract(t.square(sig),
                       add_constant(t, scale(t, select_columns(t, ls, 2, 4), 2.0), 1.0)));
        const NodeId kl = scale(t, t.mean(kl_inner), 0.5);
        return t.add(recon, kl);
    };
    CHECK(fd_sweep(build, {4, 4}, 10, rng, -1.5, 1.5) < kFdTol);
}

TEST_CASE("backward is deterministic and handles fan-out") {
    SUBCASE("bitwise identical gradients on rebuild") {
        auto run = [] {
            Rng rng(7);
            Tape t;
            const NodeId x = t.leaf(random_point({3, 3}, rng));
            const NodeId y = t.mean(t.multiply(t.sigmoid(x), t.tanh(x)));
            Gradients g = backward(t, y);
            return g.wrt(x);
        };
        const Tensor a = run();
        const Tensor b = run();
        for (std::int64_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
    SUBCASE("fan-out accumulates: d/dx of x*x + x is 2x + 1") {
        Tape t;
        const NodeId x = t.leaf(Tensor::from({3}, {-1.5, 0.25, 2.0}));
        const NodeId y = t.sum(t.add(t.multiply(x, x), x));
        Gradients g = backward(t, y);
        const Tensor& gx = g.wrt(x);
        CHECK(gx[0] == doctest::Approx(-2.0).epsilon(1e-12));
        CHECK(gx[1] == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(gx[2] == doctest::Approx(5.0).epsilon(1e-12));
    }
    SUBCASE("untouched nodes read as zeros") {
        Tape t;
        const NodeId x = t.leaf(Tensor::from({2}, {1.0, 2.0}));
        const NodeId unused = t.leaf(Tensor::from({2}, {3.0, 4.0}));
        const NodeId y = t.sum(x);
        Gradients g = backward(t, y);
        CHECK_FALSE(g.touched(unused));
        const Tensor& gu = g.wrt(unused);
        CHECK(gu[0] == 0.0);
        CHECK(gu[1] == 0.0);
    }
}

TEST_CASE("shape and domain errors") {
    Tape t;
    const NodeId a = t.leaf(Tensor::zeros({2, 3}));
    const NodeId b = t.leaf(Tensor::zeros({3, 2}));
    CHECK_THROWS_AS(t.add(a, b), ShapeError);
    CHECK_THROWS_AS(t.multiply(a, b), ShapeError);
    CHECK_THROWS_AS(t.matmul(a, a), ShapeError);
    CHECK_THROWS_AS(t.broadcast_add_bias(a, t.leaf(Tensor::zeros({4}))), ShapeError);
    CHECK_THROWS_AS(t.concat_last_axis(a, t.leaf(Tensor::zeros({3, 3}))), ShapeError);
    CHECK_THROWS_AS(t.logarithm(t.leaf(Tensor::from({1}, {0.0}))), DomainError);
    CHECK_THROWS_AS(t.logarithm(t.leaf(Tensor::from({1}, {-1.0}))), DomainError);
}

TEST_CASE("loss identities at the symmetric point and under the swap") {
    SUBCASE("zero logits give exactly 2 log 2") {
        const Tensor zeros = Tensor::zeros({8, 1});
        const double two_log2 = 2.0 * std::log(2.0);
        CHECK(std::abs(discriminator_loss_value(zeros, zeros) - two_log2) < 1e-15);
        CHECK(std::abs(generator_loss_value(zeros, zeros) - two_log2) < 1e-15);
        CHECK(mean_sigmoid(zeros) == 0.5);
    }
    SUBCASE("swap identity Lg(a,b) == Ld(b,a), bitwise") {
        Rng rng(55);
        for (int i = 0; i < 20; ++i) {
            Tensor a = Tensor::randn({7, 1}, rng, 3.0);
            Tensor b = Tensor::randn({7, 1}, rng, 3.0);
            CHECK(generator_loss_value(a, b) == discriminator_loss_value(b, a));
        }
    }
    SUBCASE("perfect discrimination saturates to ~0 loss") {
        const Tensor big = Tensor::full({4, 1}, 50.0);
        const Tensor small = Tensor::full({4, 1}, -50.0);
        CHECK(discriminator_loss_value(big, small) < 1e-20);
    }
    SUBCASE("agrees with the naive sigmoid formula at moderate logits") {
        Rng rng(56);
        for (int i = 0; i < 10; ++i) {
            Tensor a = Tensor::randn({5, 1}, rng, 2.0);
            Tensor b = Tensor::randn({5, 1}, rng, 2.0);
            double naive = 0.0;
            for (int r = 0; r < 5; ++r) {
                const double sq = 1.0 / (1.0 + std::exp(-a.at(r, 0)));
                const double sp = 1.0 / (1.0 + std::exp(-b.at(r, 0)));
                naive += -std::log(sq) / 5.0 - std::log(1.0 - sp) / 5.0;
            }
            CHECK(discriminator_loss_value(a, b) == doctest::Approx(naive).epsilon(1e-12));
        }
    }
}

TEST_CASE("softplus is stable at extreme inputs") {
    Tape t;
    const NodeId x = t.leaf(Tensor::from({6}, {-745.0, -50.0, 0.0, 50.0, 745.0, 0.3}));
    const NodeId y = softplus(t, x);
    const Tensor& v = t.value(y);
    CHECK(v.all_finite());
    CHECK(v[0] >= 0.0);
    CHECK(v[0] < 1e-300); // deep negative tail underflows gracefully
    // softplus(-50) = log(1 + e^-50): the composite's 1 + 1.9e-22 rounds to 1,
    // so the value floor here is 0 rather than e^-50 — within one ulp-of-1
    // worth of absolute error, which is all the loss arithmetic needs.
    CHECK(v[1] >= 0.0);
    CHECK(v[1] <= 2.0 * std::exp(-50.0));
    CHECK(v[2] == std::log1p(1.0));       // exactly log 2
    CHECK(std::abs(v[3] - 50.0) < 1e-12); // softplus(x) ~ x for large x
    CHECK(v[4] == 745.0);
    // gradients stay finite too
    Gradients g = backward(t, t.sum(y));
    CHECK(g.wrt(x).all_finite());
}

TEST_CASE("tape values and ops are queryable") {
    Tape t;
    const NodeId x = t.leaf(Tensor::from({2}, {1.0, 2.0}));
    const NodeId y = t.negate(x);
    CHECK(t.op(x) == Op::Leaf);
    CHECK(t.op(y) == Op::Negate);
    CHECK(t.value(y)[0] == -1.0);
    CHECK(t.size() == 2);
}
