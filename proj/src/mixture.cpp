#include "alilab/mixture.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "json.hpp"

#include "alilab/error.hpp"

namespace alilab {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

struct CovDerived {
    double det;
    double inv_xx, inv_xy, inv_yy;
};

CovDerived derive(const std::array<double, 3>& cov) {
    const double det = cov[0] * cov[2] - cov[1] * cov[1];
    if (!(cov[0] > 0.0) || !(det > 0.0))
        throw ContractError("mixture covariance is not SPD");
    return {det, cov[2] / det, -cov[1] / det, cov[0] / det};
}

double log_gaussian(const GaussianMixture::Component& c, double x0, double x1) {
    const CovDerived d = derive(c.cov);
    const double dx = x0 - c.mean[0];
    const double dy = x1 - c.mean[1];
    const double quad = dx * (d.inv_xx * dx + d.inv_xy * dy) + dy * (d.inv_xy * dx + d.inv_yy * dy);
    return -kLog2Pi - 0.5 * std::log(d.det) - 0.5 * quad;
}

} // namespace

void GaussianMixture::validate() const {
    if (components.empty()) throw ContractError("mixture has no components");
    double total = 0.0;
    for (const Component& c : components) {
        if (!(c.weight > 0.0)) throw ContractError("mixture weights must be positive");
        derive(c.cov);
        total += c.weight;
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw ContractError("mixture weights sum to " + std::to_string(total) + ", expected 1");
}

GaussianMixture make_grid_mixture(int side, double spacing, double sigma) {
    if (side < 1) throw ContractError("grid side must be >= 1");
    if (!(spacing > 0.0) || !(sigma > 0.0))
        throw ContractError("grid spacing and sigma must be positive");
    GaussianMixture mix;
    const int k = side * side;
    const double off = (side - 1) / 2.0;
    const double var = sigma * sigma;
    for (int i = 0; i < k; ++i) {
        GaussianMixture::Component c;
        c.mean = {(i % side - off) * spacing, (i / side - off) * spacing};
        c.cov = {var, 0.0, var};
        c.weight = 1.0 / k;
        mix.components.push_back(c);
    }
    mix.validate();
    return mix;
}

GaussianMixture standardized(const GaussianMixture& mix, double scale) {
    if (!(scale > 0.0)) throw ContractError("standardization scale must be positive");
    GaussianMixture out = mix;
    const double s2 = scale * scale;
    for (auto& c : out.components) {
        c.mean[0] /= scale;
        c.mean[1] /= scale;
        c.cov[0] /= s2;
        c.cov[1] /= s2;
        c.cov[2] /= s2;
    }
    return out;
}

double grid_scale(int side, double spacing) {
    const double extent = (side - 1) / 2.0 * spacing;
    return extent > 0.0 ? extent : 1.0;
}

SampleSet sample(const GaussianMixture& mix, int n, Rng& rng) {
    mix.validate();
    SampleSet out;
    out.x = Tensor::zeros({n, 2});
    out.labels.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        double cdf = 0.0;
        int k = mix.size() - 1;
        for (int j = 0; j < mix.size(); ++j) {
            cdf += mix.components[static_cast<std::size_t>(j)].weight;
            if (u < cdf) {
                k = j;
                break;
            }
        }
        const auto& c = mix.components[static_cast<std::size_t>(k)];
        // Cholesky of [[a,b],[b,cc]]: L = [[sqrt(a),0],[b/sqrt(a), sqrt(cc - b^2/a)]]
        const double l00 = std::sqrt(c.cov[0]);
        const double l10 = c.cov[1] / l00;
        const double l11 = std::sqrt(c.cov[2] - l10 * l10);
        const double e0 = rng.normal();
        const double e1 = rng.normal();
        out.x.at(i, 0) = c.mean[0] + l00 * e0;
        out.x.at(i, 1) = c.mean[1] + l10 * e0 + l11 * e1;
        out.labels[static_cast<std::size_t>(i)] = k;
    }
    return out;
}

double log_density(const GaussianMixture& mix, double x0, double x1) {
    double mx = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(static_cast<std::size_t>(mix.size()));
    for (int k = 0; k < mix.size(); ++k) {
        const auto& c = mix.components[static_cast<std::size_t>(k)];
        logs[static_cast<std::size_t>(k)] = std::log(c.weight) + log_gaussian(c, x0, x1);
        mx = std::max(mx, logs[static_cast<std::size_t>(k)]);
    }
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - mx);
    return mx + std::log(acc);
}

std::vector<double> responsibilities(const GaussianMixture& mix, double x0, double x1) {
    std::vector<double> logs(static_cast<std::size_t>(mix.size()));
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < mix.size(); ++k) {
        const auto& c = mix.components[static_cast<std::size_t>(k)];
        logs[static_cast<std::size_t>(k)] = std::log(c.weight) + log_gaussian(c, x0, x1);
        mx = std::max(mx, logs[static_cast<std::size_t>(k)]);
    }
    double total = 0.0;
    for (double& l : logs) {
        l = std::exp(l - mx);
        total += l;
    }
    for (double& l : logs) l /= total;
    return logs;
}

int argmax_responsibility(const GaussianMixture& mix, double x0, double x1) {
    const std::vector<double> r = responsibilities(mix, x0, x1);
    int best = 0;
    for (int k = 1; k < static_cast<int>(r.size()); ++k)
        if (r[static_cast<std::size_t>(k)] > r[static_cast<std::size_t>(best)]) best = k;
    return best;
}

std::string mixture_to_json(const GaussianMixture& mix) {
    nlohmann::json j;
    j["format_version"] = 1;
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : mix.components) {
        comps.push_back({{"mean", c.mean}, {"cov", c.cov}, {"weight", c.weight}});
    }
    j["components"] = std::move(comps);
    return j.dump(1);
}

GaussianMixture mixture_from_json(const std::string& text) {
    try {
        const nlohmann::json j = nlohmann::json::parse(text);
        if (j.at("format_version").get<int>() != 1)
            throw ConfigError("unsupported mixture format_version");
        GaussianMixture mix;
        for (const auto& c : j.at("components")) {
            GaussianMixture::Component comp;
            comp.mean = c.at("mean").get<std::array<double, 2>>();
            comp.cov = c.at("cov").get<std::array<double, 3>>();
            comp.weight = c.at("weight").get<double>();
            mix.components.push_back(comp);
        }
        mix.validate();
        return mix;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed mixture JSON: ") + e.what());
    }
}

} // namespace alilab
