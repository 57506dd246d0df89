#include "alilab/nn.hpp"

#include <cmath>
#include <string>

#include "alilab/error.hpp"

namespace alilab {

const char* head_name(Head head) {
    switch (head) {
    case Head::Linear: return "linear";
    case Head::Sigmoid: return "sigmoid";
    case Head::SplitGaussian: return "split_gaussian";
    }
    throw ContractError("unknown head");
}

Head head_from_name(const std::string& name) {
    if (name == "linear") return Head::Linear;
    if (name == "sigmoid") return Head::Sigmoid;
    if (name == "split_gaussian") return Head::SplitGaussian;
    throw ConfigError("unknown head kind '" + name + "'");
}

int MlpParameters::input_width() const {
    if (layers.empty()) throw ContractError("network has no layers");
    return layers.front().weight.rows();
}

int MlpParameters::output_width() const {
    if (layers.empty()) throw ContractError("network has no layers");
    return layers.back().weight.cols();
}

std::vector<int> MlpParameters::layer_sizes() const {
    std::vector<int> sizes;
    sizes.push_back(input_width());
    for (const DenseLayer& l : layers) sizes.push_back(l.weight.cols());
    return sizes;
}

void MlpParameters::validate() const {
    if (layers.empty()) throw ContractError("network has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const DenseLayer& l = layers[i];
        if (l.bias.shape().size() != 1 || l.bias.shape()[0] != l.weight.cols())
            throw ShapeError("layer " + std::to_string(i) + ": bias " + shape_str(l.bias) +
                             " does not match weight " + shape_str(l.weight));
        if (i + 1 < layers.size() && l.weight.cols() != layers[i + 1].weight.rows())
            throw ShapeError("layer " + std::to_string(i) + " output width " +
                             std::to_string(l.weight.cols()) + " does not feed layer " +
                             std::to_string(i + 1));
    }
    if (head == Head::SplitGaussian && output_width() % 2 != 0)
        throw ContractError("split-gaussian head requires even output width, got " +
                            std::to_string(output_width()));
}

MlpParameters mlp_init(const std::vector<int>& sizes, Head head, double leaky_slope,
                       double init_sigma, Rng& rng) {
    if (sizes.size() < 2) throw ContractError("mlp_init needs at least input and output widths");
    MlpParameters net;
    net.head = head;
    net.leaky_slope = leaky_slope;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        DenseLayer layer;
        layer.weight = Tensor::randn({sizes[i], sizes[i + 1]}, rng, init_sigma);
        layer.bias = Tensor::zeros({sizes[i + 1]});
        net.layers.push_back(std::move(layer));
    }
    net.validate();
    return net;
}

namespace {

void apply_clamp_last_half(Tensor& out) {
    const int half = out.cols() / 2;
    for (int i = 0; i < out.rows(); ++i) {
        for (int j = half; j < out.cols(); ++j) {
            double& v = out.at(i, j);
            // Same arithmetic as the mask composite: x*1+0 inside, 0+bound outside.
            if (v < kLogSigmaMin)
                v = kLogSigmaMin;
            else if (v > kLogSigmaMax)
                v = kLogSigmaMax;
            else
                v = v * 1.0 + 0.0;
        }
    }
}

} // namespace

Tensor mlp_apply(const MlpParameters& net, const Tensor& input) {
    if (input.cols() != net.input_width())
        throw ShapeError("mlp_apply: input " + shape_str(input) + " does not match network input width " +
                         std::to_string(net.input_width()));
    Tensor h = input;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const DenseLayer& l = net.layers[i];
        Tensor a = Tensor::zeros({h.rows(), l.weight.cols()});
        mm_nn(h, l.weight, a, false);
        for (int r = 0; r < a.rows(); ++r)
            for (int c = 0; c < a.cols(); ++c) a.at(r, c) += l.bias[c];
        if (i + 1 < net.layers.size()) {
            for (std::int64_t k = 0; k < a.size(); ++k)
                if (a[k] < 0.0) a[k] *= net.leaky_slope;
        }
        h = std::move(a);
    }
    switch (net.head) {
    case Head::Linear:
        break;
    case Head::Sigmoid:
        for (std::int64_t k = 0; k < h.size(); ++k) {
            const double x = h[k];
            h[k] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
        }
        break;
    case Head::SplitGaussian:
        apply_clamp_last_half(h);
        break;
    }
    return h;
}

Tensor split_mu(const Tensor& head_out) {
    const int half = head_out.cols() / 2;
    Tensor mu = Tensor::zeros({head_out.rows(), half});
    for (int i = 0; i < head_out.rows(); ++i)
        for (int j = 0; j < half; ++j) mu.at(i, j) = head_out.at(i, j);
    return mu;
}

Tensor split_log_sigma(const Tensor& head_out) {
    const int half = head_out.cols() / 2;
    Tensor ls = Tensor::zeros({head_out.rows(), half});
    for (int i = 0; i < head_out.rows(); ++i)
        for (int j = 0; j < half; ++j) ls.at(i, j) = head_out.at(i, half + j);
    return ls;
}

NodeId TapedMlp::forward(Tape& t, NodeId input) const {
    NodeId h = input;
    for (std::size_t i = 0; i < params->layers.size(); ++i) {
        h = t.broadcast_add_bias(t.matmul(h, weights[i]), biases[i]);
        if (i + 1 < params->layers.size()) h = t.leaky_relu(h, params->leaky_slope);
    }
    switch (params->head) {
    case Head::Linear:
        return h;
    case Head::Sigmoid:
        return t.sigmoid(h);
    case Head::SplitGaussian: {
        const int w = t.value(h).cols();
        return clamp_columns(t, h, w / 2, w, kLogSigmaMin, kLogSigmaMax);
    }
    }
    throw ContractError("unknown head");
}

std::vector<NodeId> TapedMlp::param_ids() const {
    std::vector<NodeId> ids;
    ids.reserve(weights.size() * 2);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        ids.push_back(weights[i]);
        ids.push_back(biases[i]);
    }
    return ids;
}

TapedMlp register_mlp(Tape& t, const MlpParameters& net) {
    net.validate();
    TapedMlp taped;
    taped.params = &net;
    for (const DenseLayer& l : net.layers) {
        taped.weights.push_back(t.leaf(l.weight));
        taped.biases.push_back(t.leaf(l.bias));
    }
    return taped;
}

void ParamRefs::append(MlpParameters& net, const std::string& prefix) {
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        tensors.push_back(&net.layers[i].weight);
        names.push_back(prefix + ".layer" + std::to_string(i) + ".weight");
        tensors.push_back(&net.layers[i].bias);
        names.push_back(prefix + ".layer" + std::to_string(i) + ".bias");
    }
}

AdamState adam_init(const AdamConfig& config, const std::vector<Tensor*>& params) {
    AdamState state;
    state.config = config;
    for (const Tensor* p : params) {
        state.m.push_back(Tensor::zeros(p->shape()));
        state.v.push_back(Tensor::zeros(p->shape()));
    }
    return state;
}

void adam_step(AdamState& state, const std::vector<Tensor*>& params,
               const std::vector<Tensor>& grads, const std::vector<std::string>& names) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw ContractError("adam_step: parameter/gradient/state counts differ");
    const AdamConfig& c = state.config;
    state.t += 1;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& theta = *params[p];
        const Tensor& g = grads[p];
        if (!theta.same_shape(g))
            throw ShapeError("adam_step: gradient " + shape_str(g) + " does not match parameter " +
                             shape_str(theta));
        if (!g.all_finite()) {
            const std::string who = p < names.size() ? names[p] : ("parameter " + std::to_string(p));
            throw RuntimeAbort("non-finite gradient for " + who + " at optimizer step " +
                               std::to_string(state.t));
        }
        Tensor& m = state.m[p];
        Tensor& v = state.v[p];
        for (std::int64_t i = 0; i < theta.size(); ++i) {
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            theta[i] -= c.alpha * mhat / (std::sqrt(vhat) + c.epsilon);
        }
    }
}

} // namespace alilab
