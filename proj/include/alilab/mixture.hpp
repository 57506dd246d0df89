#pragma once

#include <array>
#include <vector>

#include "alilab/rng.hpp"
#include "alilab/tensor.hpp"

namespace alilab {

// 2D Gaussian mixture. Covariances are full SPD matrices stored as (xx, xy, yy).
struct GaussianMixture {
    struct Component {
        std::array<double, 2> mean{0.0, 0.0};
        std::array<double, 3> cov{1.0, 0.0, 1.0};
        double weight = 1.0;
    };

    std::vector<Component> components;

    int size() const { return static_cast<int>(components.size()); }
    void validate() const; // weights positive and summing to 1 (1e-12), covariances SPD
};

// side x side grid of isotropic components, equal weights, centered on the
// origin: component k sits at ((k % side - off) * spacing, (k / side - off) * spacing)
// with off = (side - 1) / 2.
GaussianMixture make_grid_mixture(int side, double spacing, double sigma);

// Means divided by scale, covariances by scale^2.
GaussianMixture standardized(const GaussianMixture& mix, double scale);

// Scale that maps the grid's outermost centroid coordinate to 1 (identity for side 1).
double grid_scale(int side, double spacing);

struct SampleSet {
    Tensor x; // [n, 2]
    std::vector<int> labels;
};

// Ancestral sampling: component by CDF inversion of one uniform, then the
// component Gaussian via its Cholesky factor and two normals.
SampleSet sample(const GaussianMixture& mix, int n, Rng& rng);

double log_density(const GaussianMixture& mix, double x0, double x1);

// Posterior component probabilities p(k | x), log-sum-exp stabilized.
std::vector<double> responsibilities(const GaussianMixture& mix, double x0, double x1);

// Argmax responsibility; ties resolve to the lowest component index.
int argmax_responsibility(const GaussianMixture& mix, double x0, double x1);

std::string mixture_to_json(const GaussianMixture& mix);
GaussianMixture mixture_from_json(const std::string& text);

} // namespace alilab
