#pragma once

#include <string>
#include <vector>

#include "alilab/rng.hpp"
#include "alilab/tape.hpp"
#include "alilab/tensor.hpp"

namespace alilab {

enum class Head {
    Linear,
    Sigmoid,
    SplitGaussian, // output [mu | log_sigma], log_sigma clamped to [-7, 2]
};

const char* head_name(Head head);
Head head_from_name(const std::string& name);

inline constexpr double kLogSigmaMin = -7.0;
inline constexpr double kLogSigmaMax = 2.0;

struct DenseLayer {
    Tensor weight; // [in, out]
    Tensor bias;   // [out]
};

struct MlpParameters {
    std::vector<DenseLayer> layers;
    Head head = Head::Linear;
    double leaky_slope = 0.02;

    int input_width() const;
    int output_width() const;
    std::vector<int> layer_sizes() const;
    void validate() const;
};

// Weights ~ N(0, init_sigma^2) drawn row-major layer by layer, biases zero.
MlpParameters mlp_init(const std::vector<int>& sizes, Head head, double leaky_slope,
                       double init_sigma, Rng& rng);

// Forward pass without a tape. Bit-identical to the taped forward.
Tensor mlp_apply(const MlpParameters& net, const Tensor& input);

// Split-gaussian output halves.
Tensor split_mu(const Tensor& head_out);
Tensor split_log_sigma(const Tensor& head_out);

// An MLP registered on a tape: parameter leaves plus the layer recipe.
struct TapedMlp {
    const MlpParameters* params = nullptr;
    std::vector<NodeId> weights;
    std::vector<NodeId> biases;

    NodeId forward(Tape& t, NodeId input) const;
    std::vector<NodeId> param_ids() const; // [W0, b0, W1, b1, ...]
};

TapedMlp register_mlp(Tape& t, const MlpParameters& net);

// Mutable views of a network's parameter tensors, for the optimizer.
struct ParamRefs {
    std::vector<Tensor*> tensors;
    std::vector<std::string> names;

    void append(MlpParameters& net, const std::string& prefix);
};

struct AdamConfig {
    double alpha = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    long long t = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;
};

AdamState adam_init(const AdamConfig& config, const std::vector<Tensor*>& params);

// One bias-corrected Adam update. Throws RuntimeAbort naming the parameter if a
// gradient is non-finite. grads must align with params.
void adam_step(AdamState& state, const std::vector<Tensor*>& params,
               const std::vector<Tensor>& grads, const std::vector<std::string>& names);

} // namespace alilab
