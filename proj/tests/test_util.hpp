#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "alilab/dataset.hpp"
#include "alilab/mixture.hpp"
#include "alilab/nn.hpp"
#include "alilab/rng.hpp"
#include "alilab/tensor.hpp"

namespace testutil {

inline void zero_params(alilab::MlpParameters& net) {
    for (auto& layer : net.layers) {
        for (std::int64_t i = 0; i < layer.weight.size(); ++i) layer.weight[i] = 0.0;
        for (std::int64_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] = 0.0;
    }
}

inline bool bitwise_equal(const alilab::Tensor& a, const alilab::Tensor& b) {
    if (!a.same_shape(b)) return false;
    return std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

inline bool bitwise_equal(const alilab::MlpParameters& a, const alilab::MlpParameters& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        if (!bitwise_equal(a.layers[i].weight, b.layers[i].weight)) return false;
        if (!bitwise_equal(a.layers[i].bias, b.layers[i].bias)) return false;
    }
    return true;
}

inline double max_abs_diff(const alilab::Tensor& a, const alilab::Tensor& b) {
    double m = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Small deterministic dataset drawn from the standard grid mixture.
inline alilab::Dataset tiny_dataset(int n, std::uint64_t seed = 11) {
    alilab::GaussianMixture mix =
        alilab::standardized(alilab::make_grid_mixture(5, 2.0, 0.05), alilab::grid_scale(5, 2.0));
    alilab::Rng rng(seed, alilab::streams::kData);
    return alilab::sample_dataset(mix, n, rng);
}

// Scratch directory under the system temp dir. The path is deterministic per
// test for debuggability, so wipe any leftovers from an earlier run first.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    static std::uint64_t counter = 0;
    const auto base = std::filesystem::temp_directory_path() /
                      ("alilab_test_" + tag + "_" + std::to_string(counter++));
    std::filesystem::remove_all(base);
    std::filesystem::create_directories(base);
    return base;
}

} // namespace testutil
