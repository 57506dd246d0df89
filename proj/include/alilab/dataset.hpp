#pragma once

#include <filesystem>
#include <vector>

#include "alilab/mixture.hpp"
#include "alilab/rng.hpp"
#include "alilab/tensor.hpp"

namespace alilab {

struct Dataset {
    Tensor x; // [n, dim]
    std::vector<int> labels;

    int size() const { return x.empty() ? 0 : x.rows(); }
    int dim() const { return x.empty() ? 0 : x.cols(); }
};

Dataset sample_dataset(const GaussianMixture& mix, int n, Rng& rng);

// CSV with header x0,x1,label.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset_csv(const std::filesystem::path& path);

// Uniform-with-replacement minibatch rows.
Tensor draw_batch(const Dataset& data, int m, Rng& rng);
struct LabeledBatch {
    Tensor x;
    std::vector<int> labels;
};
LabeledBatch draw_labeled_batch(const Dataset& data, int m, Rng& rng);

// As draw_labeled_batch, but the first n_labeled rows come from the given pool
// of indices (with replacement) and the rest from the full dataset.
LabeledBatch draw_semisup_batch(const Dataset& data, const std::vector<int>& labeled_pool,
                                int n_labeled, int m, Rng& rng);

} // namespace alilab
