#include "alilab/ali.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "alilab/error.hpp"

namespace alilab {

AliModel ali_init(const AliArch& arch, Rng& rng) {
    if (arch.dim_x < 1 || arch.dim_z < 1) throw ContractError("ali_init: dims must be >= 1");
    const int k = arch.cond_classes;
    AliModel model;
    model.dim_x = arch.dim_x;
    model.dim_z = arch.dim_z;
    model.cond_classes = k;

    std::vector<int> enc{arch.dim_x + k};
    enc.insert(enc.end(), arch.encoder_hidden.begin(), arch.encoder_hidden.end());
    enc.push_back(2 * arch.dim_z);
    model.encoder = mlp_init(enc, Head::SplitGaussian, arch.leaky_slope, arch.init_sigma, rng);

    std::vector<int> dec{arch.dim_z + k};
    dec.insert(dec.end(), arch.decoder_hidden.begin(), arch.decoder_hidden.end());
    dec.push_back(arch.dim_x);
    model.decoder = mlp_init(dec, Head::Linear, arch.leaky_slope, arch.init_sigma, rng);

    std::vector<int> dsc{arch.dim_x + arch.dim_z + k};
    dsc.insert(dsc.end(), arch.discriminator_hidden.begin(), arch.discriminator_hidden.end());
    dsc.push_back(1);
    model.discriminator = mlp_init(dsc, Head::Linear, arch.leaky_slope, arch.init_sigma, rng);
    return model;
}

NodeId encode(Tape& t, const TapedMlp& encoder, NodeId x, NodeId eps) {
    const NodeId head = encoder.forward(t, x);
    const int dz = t.value(head).cols() / 2;
    const NodeId mu = select_columns(t, head, 0, dz);
    const NodeId log_sigma = select_columns(t, head, dz, 2 * dz);
    return t.add(mu, t.multiply(t.exponential(log_sigma), eps));
}

NodeId discriminator_loss(Tape& t, NodeId logits_q, NodeId logits_p) {
    return t.add(t.mean(softplus(t, t.negate(logits_q))), t.mean(softplus(t, logits_p)));
}

NodeId generator_loss(Tape& t, NodeId logits_q, NodeId logits_p) {
    return discriminator_loss(t, logits_p, logits_q);
}

namespace {

double softplus_scalar(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double mean_softplus(const Tensor& v, double sign) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < v.size(); ++i) acc += softplus_scalar(sign * v[i]);
    return acc / static_cast<double>(v.size());
}

} // namespace

double discriminator_loss_value(const Tensor& logits_q, const Tensor& logits_p) {
    return mean_softplus(logits_q, -1.0) + mean_softplus(logits_p, 1.0);
}

double generator_loss_value(const Tensor& logits_q, const Tensor& logits_p) {
    return discriminator_loss_value(logits_p, logits_q);
}

double mean_sigmoid(const Tensor& logits) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < logits.size(); ++i) {
        const double x = logits[i];
        acc += x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }
    return acc / static_cast<double>(logits.size());
}

Tensor encode_apply(const MlpParameters& encoder, const Tensor& x, const Tensor& eps) {
    const Tensor head = mlp_apply(encoder, x);
    const Tensor mu = split_mu(head);
    const Tensor ls = split_log_sigma(head);
    Tensor z = mu;
    for (int i = 0; i < z.rows(); ++i)
        for (int j = 0; j < z.cols(); ++j) z.at(i, j) += std::exp(ls.at(i, j)) * eps.at(i, j);
    return z;
}

Tensor encoder_mean(const MlpParameters& encoder, const Tensor& x) {
    return split_mu(mlp_apply(encoder, x));
}

Tensor encoder_log_sigma(const MlpParameters& encoder, const Tensor& x) {
    return split_log_sigma(mlp_apply(encoder, x));
}

Tensor decoder_mean(const MlpParameters& decoder, const Tensor& z) {
    const Tensor out = mlp_apply(decoder, z);
    return decoder.head == Head::SplitGaussian ? split_mu(out) : out;
}

Tensor discriminate_apply(const MlpParameters& d, const Tensor& x, const Tensor& z) {
    return mlp_apply(d, concat_cols(x, z));
}

Tensor one_hot(const std::vector<int>& classes, int k) {
    Tensor out = Tensor::zeros({static_cast<int>(classes.size()), k});
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const int c = classes[i];
        if (c < 0 || c >= k)
            throw ContractError("one_hot: class " + std::to_string(c) + " outside [0, " +
                                std::to_string(k) + ")");
        out.at(static_cast<int>(i), c) = 1.0;
    }
    return out;
}

AliTrainer AliTrainer::create(const AliArch& arch, const AdamConfig& adam, const Dataset& data,
                              int batch, Rng init_rng, Rng train_rng) {
    AliTrainer tr;
    tr.model = ali_init(arch, init_rng);
    tr.rng = train_rng;
    tr.data = &data;
    tr.batch = batch;

    ParamRefs d_refs;
    d_refs.append(tr.model.discriminator, "discriminator");
    tr.opt_d = adam_init(adam, d_refs.tensors);
    ParamRefs g_refs;
    g_refs.append(tr.model.encoder, "encoder");
    g_refs.append(tr.model.decoder, "decoder");
    tr.opt_g = adam_init(adam, g_refs.tensors);
    return tr;
}

namespace {

struct PhaseDraw {
    Tensor x;
    Tensor z;
    Tensor eps;
    Tensor yq; // empty when unconditional
    Tensor yp;
};

PhaseDraw draw_phase(const AliTrainer& tr, Rng& rng) {
    PhaseDraw d;
    const int m = tr.batch;
    const int k = tr.model.cond_classes;
    if (k > 0) {
        LabeledBatch b = draw_labeled_batch(*tr.data, m, rng);
        d.x = std::move(b.x);
        std::vector<int> classes(b.labels.size());
        for (std::size_t i = 0; i < b.labels.size(); ++i)
            classes[i] = (b.labels[i] / tr.cond_label_divisor) % k;
        d.yq = one_hot(classes, k);
    } else {
        d.x = draw_batch(*tr.data, m, rng);
    }
    d.z = Tensor::randn({m, tr.model.dim_z}, rng);
    d.eps = Tensor::randn({m, tr.model.dim_z}, rng);
    if (k > 1) {
        std::vector<int> classes(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i)
            classes[static_cast<std::size_t>(i)] =
                static_cast<int>(rng.bounded(static_cast<std::uint64_t>(k)));
        d.yp = one_hot(classes, k);
    } else if (k == 1) {
        d.yp = Tensor::full({m, 1}, 1.0);
    }
    return d;
}

Tensor with_cond(const Tensor& base, const Tensor& y) {
    return y.empty() ? base : concat_cols(base, y);
}

NodeId with_cond(Tape& t, NodeId base, NodeId y) {
    return y < 0 ? base : t.concat_last_axis(base, y);
}

// Divergence (or poisoned weights) surfaces here first: the forward pass
// propagates non-finite values silently, and the softplus in the loss would
// reject them as a domain violation. Turn that into the training-abort signal
// before any loss node is built.
void abort_on_bad_logits(const Tensor& lq, const Tensor& lp, long long step) {
    if (!lq.all_finite() || !lp.all_finite())
        throw RuntimeAbort("non-finite discriminator logits at step " + std::to_string(step));
}

} // namespace

StepMetrics AliTrainer::step() {
    StepMetrics metrics;

    // Discriminator phase: encoder/decoder outputs are detached constants, so
    // only theta_d receives gradient.
    {
        PhaseDraw d = draw_phase(*this, rng);
        const Tensor z_hat = encode_apply(model.encoder, with_cond(d.x, d.yq), d.eps);
        const Tensor x_til = mlp_apply(model.decoder, with_cond(d.z, d.yp));

        Tape t;
        const TapedMlp dsc = register_mlp(t, model.discriminator);
        const NodeId yq = d.yq.empty() ? -1 : t.leaf(d.yq);
        const NodeId yp = d.yp.empty() ? -1 : t.leaf(d.yp);
        const NodeId in_q = with_cond(t, t.concat_last_axis(t.leaf(d.x), t.leaf(z_hat)), yq);
        const NodeId in_p = with_cond(t, t.concat_last_axis(t.leaf(x_til), t.leaf(d.z)), yp);
        const NodeId lq = dsc.forward(t, in_q);
        const NodeId lp = dsc.forward(t, in_p);
        abort_on_bad_logits(t.value(lq), t.value(lp), step_count + 1);
        const NodeId loss = discriminator_loss(t, lq, lp);

        metrics.Ld = t.value(loss)[0];
        metrics.Lg = generator_loss_value(t.value(lq), t.value(lp));
        metrics.mean_Dq = mean_sigmoid(t.value(lq));
        metrics.mean_Dp = mean_sigmoid(t.value(lp));
        if (!std::isfinite(metrics.Ld))
            throw RuntimeAbort("non-finite discriminator loss at step " +
                               std::to_string(step_count + 1));

        Gradients grads = backward(t, loss);
        std::vector<Tensor> g;
        for (NodeId id : dsc.param_ids()) g.push_back(grads.wrt(id));
        ParamRefs refs;
        refs.append(model.discriminator, "discriminator");
        adam_step(opt_d, refs.tensors, g, refs.names);
    }

    // Generator phase: fresh minibatch, full graph, update encoder + decoder.
    {
        PhaseDraw d = draw_phase(*this, rng);
        Tape t;
        const TapedMlp enc = register_mlp(t, model.encoder);
        const TapedMlp dec = register_mlp(t, model.decoder);
        const TapedMlp dsc = register_mlp(t, model.discriminator);
        const NodeId x = t.leaf(d.x);
        const NodeId z = t.leaf(d.z);
        const NodeId eps = t.leaf(d.eps);
        const NodeId yq = d.yq.empty() ? -1 : t.leaf(d.yq);
        const NodeId yp = d.yp.empty() ? -1 : t.leaf(d.yp);

        const NodeId z_hat = encode(t, enc, with_cond(t, x, yq), eps);
        const NodeId x_til = dec.forward(t, with_cond(t, z, yp));
        const NodeId lq = dsc.forward(t, with_cond(t, t.concat_last_axis(x, z_hat), yq));
        const NodeId lp = dsc.forward(t, with_cond(t, t.concat_last_axis(x_til, z), yp));
        abort_on_bad_logits(t.value(lq), t.value(lp), step_count + 1);
        const NodeId loss = generator_loss(t, lq, lp);
        if (!std::isfinite(t.value(loss)[0]))
            throw RuntimeAbort("non-finite generator loss at step " + std::to_string(step_count + 1));

        Gradients grads = backward(t, loss);
        std::vector<Tensor> g;
        for (NodeId id : enc.param_ids()) g.push_back(grads.wrt(id));
        for (NodeId id : dec.param_ids()) g.push_back(grads.wrt(id));
        ParamRefs refs;
        refs.append(model.encoder, "encoder");
        refs.append(model.decoder, "decoder");
        adam_step(opt_g, refs.tensors, g, refs.names);
    }

    step_count += 1;
    return metrics;
}

} // namespace alilab
