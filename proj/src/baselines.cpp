#include "alilab/baselines.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "alilab/error.hpp"

namespace alilab {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void abort_if_not_finite(double v, const char* what, long long step) {
    if (!std::isfinite(v))
        throw RuntimeAbort(std::string("non-finite ") + what + " at step " + std::to_string(step));
}

// Checked before any loss node is built: the log inside softplus/log-sum-exp
// would otherwise reject non-finite logits as a domain violation instead of
// signalling the training abort.
void abort_on_bad_logits(const Tensor& lq, const Tensor& lp, long long step) {
    if (!lq.all_finite() || !lp.all_finite())
        throw RuntimeAbort("non-finite discriminator logits at step " + std::to_string(step));
}

} // namespace

// --- GAN ---

GanTrainer GanTrainer::create(const AliArch& arch, const AdamConfig& adam, const Dataset& data,
                              int batch, Rng init_rng, Rng train_rng) {
    GanTrainer tr;
    std::vector<int> dec{arch.dim_z};
    dec.insert(dec.end(), arch.decoder_hidden.begin(), arch.decoder_hidden.end());
    dec.push_back(arch.dim_x);
    tr.decoder = mlp_init(dec, Head::Linear, arch.leaky_slope, arch.init_sigma, init_rng);
    std::vector<int> dsc{arch.dim_x};
    dsc.insert(dsc.end(), arch.discriminator_hidden.begin(), arch.discriminator_hidden.end());
    dsc.push_back(1);
    tr.discriminator = mlp_init(dsc, Head::Linear, arch.leaky_slope, arch.init_sigma, init_rng);
    tr.rng = train_rng;
    tr.data = &data;
    tr.dim_z = arch.dim_z;
    tr.batch = batch;

    ParamRefs d_refs;
    d_refs.append(tr.discriminator, "discriminator");
    tr.opt_d = adam_init(adam, d_refs.tensors);
    ParamRefs g_refs;
    g_refs.append(tr.decoder, "decoder");
    tr.opt_g = adam_init(adam, g_refs.tensors);
    return tr;
}

StepMetrics GanTrainer::step() {
    StepMetrics metrics;
    {
        const Tensor x = draw_batch(*data, batch, rng);
        const Tensor z = Tensor::randn({batch, dim_z}, rng);
        const Tensor x_til = mlp_apply(decoder, z);

        Tape t;
        const TapedMlp dsc = register_mlp(t, discriminator);
        const NodeId lq = dsc.forward(t, t.leaf(x));
        const NodeId lp = dsc.forward(t, t.leaf(x_til));
        abort_on_bad_logits(t.value(lq), t.value(lp), step_count + 1);
        const NodeId loss = discriminator_loss(t, lq, lp);

        metrics.Ld = t.value(loss)[0];
        metrics.Lg = generator_loss_value(t.value(lq), t.value(lp));
        metrics.mean_Dq = mean_sigmoid(t.value(lq));
        metrics.mean_Dp = mean_sigmoid(t.value(lp));
        abort_if_not_finite(metrics.Ld, "discriminator loss", step_count + 1);

        Gradients grads = backward(t, loss);
        std::vector<Tensor> g;
        for (NodeId id : dsc.param_ids()) g.push_back(grads.wrt(id));
        ParamRefs refs;
        refs.append(discriminator, "discriminator");
        adam_step(opt_d, refs.tensors, g, refs.names);
    }
    {
        const Tensor x = draw_batch(*data, batch, rng);
        const Tensor z = Tensor::randn({batch, dim_z}, rng);

        Tape t;
        const TapedMlp dec = register_mlp(t, decoder);
        const TapedMlp dsc = register_mlp(t, discriminator);
        const NodeId lq = dsc.forward(t, t.leaf(x));
        const NodeId lp = dsc.forward(t, dec.forward(t, t.leaf(z)));
        abort_on_bad_logits(t.value(lq), t.value(lp), step_count + 1);
        const NodeId loss = generator_loss(t, lq, lp);
        abort_if_not_finite(t.value(loss)[0], "generator loss", step_count + 1);

        Gradients grads = backward(t, loss);
        std::vector<Tensor> g;
        for (NodeId id : dec.param_ids()) g.push_back(grads.wrt(id));
        ParamRefs refs;
        refs.append(decoder, "decoder");
        adam_step(opt_g, refs.tensors, g, refs.names);
    }
    step_count += 1;
    return metrics;
}

// --- inverse mapping ---

InvmapTrainer InvmapTrainer::create(MlpParameters frozen_decoder, const AliArch& arch,
                                    const AdamConfig& adam, int batch, Rng init_rng, Rng train_rng) {
    InvmapTrainer tr;
    tr.decoder = std::move(frozen_decoder);
    std::vector<int> enc{arch.dim_x};
    enc.insert(enc.end(), arch.encoder_hidden.begin(), arch.encoder_hidden.end());
    enc.push_back(2 * arch.dim_z);
    tr.encoder = mlp_init(enc, Head::SplitGaussian, arch.leaky_slope, arch.init_sigma, init_rng);
    tr.rng = train_rng;
    tr.dim_z = arch.dim_z;
    tr.batch = batch;
    ParamRefs refs;
    refs.append(tr.encoder, "encoder");
    tr.opt = adam_init(adam, refs.tensors);
    return tr;
}

double InvmapTrainer::step() {
    const Tensor z = Tensor::randn({batch, dim_z}, rng);
    const Tensor x_til = mlp_apply(decoder, z);

    Tape t;
    const TapedMlp enc = register_mlp(t, encoder);
    const NodeId head = enc.forward(t, t.leaf(x_til));
    const NodeId mu = select_columns(t, head, 0, dim_z);
    const NodeId diff = t.subtract(t.leaf(z), mu);
    const NodeId loss = scale(t, t.sum(t.square(diff)), 1.0 / batch);
    const double loss_value = t.value(loss)[0];
    abort_if_not_finite(loss_value, "latent reconstruction loss", step_count + 1);

    Gradients grads = backward(t, loss);
    std::vector<Tensor> g;
    for (NodeId id : enc.param_ids()) g.push_back(grads.wrt(id));
    ParamRefs refs;
    refs.append(encoder, "encoder");
    adam_step(opt, refs.tensors, g, refs.names);
    step_count += 1;
    return loss_value;
}

// --- post-hoc learned inference ---

PosthocTrainer PosthocTrainer::create(MlpParameters frozen_decoder, const AliArch& arch,
                                      const AdamConfig& adam, const Dataset& data, int batch,
                                      Rng init_rng, Rng train_rng) {
    PosthocTrainer tr;
    tr.model.dim_x = arch.dim_x;
    tr.model.dim_z = arch.dim_z;
    std::vector<int> enc{arch.dim_x};
    enc.insert(enc.end(), arch.encoder_hidden.begin(), arch.encoder_hidden.end());
    enc.push_back(2 * arch.dim_z);
    tr.model.encoder = mlp_init(enc, Head::SplitGaussian, arch.leaky_slope, arch.init_sigma, init_rng);
    tr.model.decoder = std::move(frozen_decoder);
    std::vector<int> dsc{arch.dim_x + arch.dim_z};
    dsc.insert(dsc.end(), arch.discriminator_hidden.begin(), arch.discriminator_hidden.end());
    dsc.push_back(1);
    tr.model.discriminator = mlp_init(dsc, Head::Linear, arch.leaky_slope, arch.init_sigma, init_rng);
    tr.rng = train_rng;
    tr.data = &data;
    tr.batch = batch;

    ParamRefs d_refs;
    d_refs.append(tr.model.discriminator, "discriminator");
    tr.opt_d = adam_init(adam, d_refs.tensors);
    ParamRefs g_refs;
    g_refs.append(tr.model.encoder, "encoder");
    tr.opt_g = adam_init(adam, g_refs.tensors);
    return tr;
}

StepMetrics PosthocTrainer::step() {
    StepMetrics metrics;
    {
        const Tensor x = draw_batch(*data, batch, rng);
        const Tensor z = Tensor::randn({batch, model.dim_z}, rng);
        const Tensor eps = Tensor::randn({batch, model.dim_z}, rng);
        const Tensor z_hat = encode_apply(model.encoder, x, eps);
        const Tensor x_til = mlp_apply(model.decoder, z);

        Tape t;
        const TapedMlp dsc = register_mlp(t, model.discriminator);
        const NodeId lq = dsc.forward(t, t.concat_last_axis(t.leaf(x), t.leaf(z_hat)));
        const NodeId lp = dsc.forward(t, t.concat_last_axis(t.leaf(x_til), t.leaf(z)));
        abort_on_bad_logits(t.value(lq), t.value(lp), step_count + 1);
        const NodeId loss = discriminator_loss(t, lq, lp);

        metrics.Ld = t.value(loss)[0];
        metrics.Lg = generator_loss_value(t.value(lq), t.value(lp));
        metrics.mean_Dq = mean_sigmoid(t.value(lq));
        metrics.mean_Dp = mean_sigmoid(t.value(lp));
        abort_if_not_finite(metrics.Ld, "discriminator loss", step_count + 1);

        Gradients grads = backward(t, loss);
        std::vector<Tensor> g;
        for (NodeId id : dsc.param_ids()) g.push_back(grads.wrt(id));
        ParamRefs refs;
        refs.append(model.discriminator, "discriminator");
        adam_step(opt_d, refs.tensors, g, refs.names);
    }
    {
        const Tensor x = draw_batch(*data, batch, rng);
        const Tensor z = Tensor::randn({batch, model.dim_z}, rng);
        const Tensor eps = Tensor::randn({batch, model.dim_z}, rng);
        const Tensor x_til = mlp_apply(model.decoder, z);

        Tape t;
        const TapedMlp enc = register_mlp(t, model.encoder);
        const TapedMlp dsc = register_mlp(t, model.discriminator);
        const NodeId xn = t.leaf(x);
        const NodeId z_hat = encode(t, enc, xn, t.leaf(eps));
        const NodeId lq = dsc.forward(t, t.concat_last_axis(xn, z_hat));
        const NodeId lp = dsc.forward(t, t.concat_last_axis(t.leaf(x_til), t.leaf(z)));
        abort_on_bad_logits(t.value(lq), t.value(lp), step_count + 1);
        const NodeId loss = generator_loss(t, lq, lp);
        abort_if_not_finite(t.value(loss)[0], "generator loss", step_count + 1);

        Gradients grads = backward(t, loss);
        std::vector<Tensor> g;
        for (NodeId id : enc.param_ids()) g.push_back(grads.wrt(id));
        ParamRefs refs;
        refs.append(model.encoder, "encoder");
        adam_step(opt_g, refs.tensors, g, refs.names);
    }
    step_count += 1;
    return metrics;
}

// --- VAE ---

VaeTrainer VaeTrainer::create(const AliArch& arch, const AdamConfig& adam, const Dataset& data,
                              int batch, Rng init_rng, Rng train_rng) {
    VaeTrainer tr;
    std::vector<int> enc{arch.dim_x};
    enc.insert(enc.end(), arch.encoder_hidden.begin(), arch.encoder_hidden.end());
    enc.push_back(2 * arch.dim_z);
    tr.encoder = mlp_init(enc, Head::SplitGaussian, arch.leaky_slope, arch.init_sigma, init_rng);
    std::vector<int> dec{arch.dim_z};
    dec.insert(dec.end(), arch.decoder_hidden.begin(), arch.decoder_hidden.end());
    dec.push_back(2 * arch.dim_x);
    tr.decoder = mlp_init(dec, Head::SplitGaussian, arch.leaky_slope, arch.init_sigma, init_rng);
    tr.rng = train_rng;
    tr.data = &data;
    tr.dim_z = arch.dim_z;
    tr.batch = batch;
    ParamRefs refs;
    refs.append(tr.encoder, "encoder");
    refs.append(tr.decoder, "decoder");
    tr.opt = adam_init(adam, refs.tensors);
    return tr;
}

VaeStepInfo VaeTrainer::step() {
    const Tensor x = draw_batch(*data, batch, rng);
    const Tensor eps = Tensor::randn({batch, dim_z}, rng);
    const int dim_x = data->dim();

    Tape t;
    const TapedMlp enc = register_mlp(t, encoder);
    const TapedMlp dec = register_mlp(t, decoder);
    const NodeId xn = t.leaf(x);

    const NodeId enc_head = enc.forward(t, xn);
    const NodeId mu_z = select_columns(t, enc_head, 0, dim_z);
    const NodeId ls_z = select_columns(t, enc_head, dim_z, 2 * dim_z);
    const NodeId z = t.add(mu_z, t.multiply(t.exponential(ls_z), t.leaf(eps)));

    const NodeId dec_head = dec.forward(t, z);
    const NodeId mu_x = select_columns(t, dec_head, 0, dim_x);
    const NodeId ls_x = select_columns(t, dec_head, dim_x, 2 * dim_x);

    // -E log p(x|z) = mean over batch of sum_d ( (x-mu)^2 / (2 sigma^2) + log sigma ) + dim_x/2 log 2pi
    const NodeId sq = t.square(t.subtract(xn, mu_x));
    const NodeId precision = t.exponential(scale(t, ls_x, -2.0));
    const NodeId nll_elems = t.add(scale(t, t.multiply(sq, precision), 0.5), ls_x);
    const NodeId nll =
        add_constant(t, scale(t, t.sum(nll_elems), 1.0 / batch), dim_x * 0.5 * kLog2Pi);

    // KL(q(z|x) || N(0,I)) = mean of sum_d 0.5 (mu^2 + sigma^2 - 1 - 2 log sigma)
    const NodeId kl_inner = add_constant(
        t, t.add(t.add(t.square(mu_z), t.exponential(scale(t, ls_z, 2.0))), scale(t, ls_z, -2.0)),
        -1.0);
    const NodeId kl = scale(t, t.sum(scale(t, kl_inner, 0.5)), 1.0 / batch);

    const NodeId loss = t.add(nll, kl);

    VaeStepInfo info;
    info.recon_ll = -t.value(nll)[0];
    info.kl = t.value(kl)[0];
    info.elbo = -t.value(loss)[0];
    abort_if_not_finite(info.elbo, "ELBO", step_count + 1);

    Gradients grads = backward(t, loss);
    std::vector<Tensor> g;
    for (NodeId id : enc.param_ids()) g.push_back(grads.wrt(id));
    for (NodeId id : dec.param_ids()) g.push_back(grads.wrt(id));
    ParamRefs refs;
    refs.append(encoder, "encoder");
    refs.append(decoder, "decoder");
    adam_step(opt, refs.tensors, g, refs.names);
    step_count += 1;
    return info;
}

Tensor vae_sample(const MlpParameters& decoder, const Tensor& z, Rng& rng) {
    const Tensor head = mlp_apply(decoder, z);
    Tensor out = split_mu(head);
    const Tensor ls = split_log_sigma(head);
    for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j) out.at(i, j) += std::exp(ls.at(i, j)) * rng.normal();
    return out;
}

// --- semi-supervised ---

SemiSupTrainer SemiSupTrainer::create(const AliArch& arch, int num_classes, const AdamConfig& adam,
                                      const Dataset& data, std::vector<int> labeled_pool,
                                      double labeled_fraction, int batch, Rng init_rng,
                                      Rng train_rng) {
    if (num_classes < 2) throw ContractError("semisup needs at least 2 classes");
    if (labeled_fraction < 0.0 || labeled_fraction > 1.0)
        throw ContractError("labeled fraction must lie in [0, 1]");
    SemiSupTrainer tr;
    tr.num_classes = num_classes;
    tr.model.dim_x = arch.dim_x;
    tr.model.dim_z = arch.dim_z;
    std::vector<int> enc{arch.dim_x};
    enc.insert(enc.end(), arch.encoder_hidden.begin(), arch.encoder_hidden.end());
    enc.push_back(2 * arch.dim_z);
    tr.model.encoder = mlp_init(enc, Head::SplitGaussian, arch.leaky_slope, arch.init_sigma, init_rng);
    std::vector<int> dec{arch.dim_z};
    dec.insert(dec.end(), arch.decoder_hidden.begin(), arch.decoder_hidden.end());
    dec.push_back(arch.dim_x);
    tr.model.decoder = mlp_init(dec, Head::Linear, arch.leaky_slope, arch.init_sigma, init_rng);
    std::vector<int> dsc{arch.dim_x + arch.dim_z};
    dsc.insert(dsc.end(), arch.discriminator_hidden.begin(), arch.discriminator_hidden.end());
    dsc.push_back(num_classes + 1);
    tr.model.discriminator = mlp_init(dsc, Head::Linear, arch.leaky_slope, arch.init_sigma, init_rng);
    tr.rng = train_rng;
    tr.data = &data;
    tr.labeled_pool = std::move(labeled_pool);
    tr.labeled_fraction = labeled_fraction;
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

std::vector<char> real_mask(int k) {
    if (k < 1) throw ContractError("real_mask: class count must be >= 1");
    std::vector<char> mask(static_cast<std::size_t>(k) + 1, 1);
    mask.back() = 0;
    return mask;
}

double mean_real_mass(const Tensor& logits, int k) {
    // mean over rows of sum_{c<k} softmax(logits)[c]
    double acc = 0.0;
    for (int i = 0; i < logits.rows(); ++i) {
        double mx = logits.at(i, 0);
        for (int j = 1; j <= k; ++j) mx = std::max(mx, logits.at(i, j));
        double all = 0.0, real = 0.0;
        for (int j = 0; j <= k; ++j) {
            const double e = std::exp(logits.at(i, j) - mx);
            all += e;
            if (j < k) real += e;
        }
        acc += real / all;
    }
    return acc / logits.rows();
}

} // namespace

SemiSupMetrics SemiSupTrainer::step() {
    SemiSupMetrics metrics;
    const int k = num_classes;
    const int n_lab = static_cast<int>(std::lround(labeled_fraction * batch));
    const std::vector<char> mask_all(static_cast<std::size_t>(k) + 1, 1);
    const std::vector<char> mask_real = real_mask(k);

    {
        LabeledBatch b = draw_semisup_batch(*data, labeled_pool, n_lab, batch, rng);
        const Tensor z = Tensor::randn({batch, model.dim_z}, rng);
        const Tensor eps = Tensor::randn({batch, model.dim_z}, rng);
        const Tensor z_hat = encode_apply(model.encoder, b.x, eps);
        const Tensor x_til = mlp_apply(model.decoder, z);

        Tape t;
        const TapedMlp dsc = register_mlp(t, model.discriminator);
        const NodeId lq = dsc.forward(t, t.concat_last_axis(t.leaf(b.x), t.leaf(z_hat)));
        const NodeId lp = dsc.forward(t, t.concat_last_axis(t.leaf(x_til), t.leaf(z)));
        abort_on_bad_logits(t.value(lq), t.value(lp), step_count + 1);
        const NodeId lse_all_q = logsumexp_rows(t, lq, mask_all);

        NodeId loss = -1;
        if (n_lab > 0) {
            Tensor y = Tensor::zeros({batch, k + 1});
            Tensor lab_mask = Tensor::zeros({batch, 1});
            for (int i = 0; i < n_lab; ++i) {
                y.at(i, b.labels[static_cast<std::size_t>(i)]) = 1.0;
                lab_mask.at(i, 0) = 1.0;
            }
            Tensor ones_col = Tensor::full({k + 1, 1}, 1.0);
            const NodeId row_logit = t.matmul(t.multiply(lq, t.leaf(std::move(y))), t.leaf(std::move(ones_col)));
            const NodeId ce_rows = t.multiply(t.subtract(lse_all_q, row_logit), t.leaf(std::move(lab_mask)));
            loss = scale(t, t.sum(ce_rows), 1.0 / n_lab);
        }
        if (n_lab < batch) {
            Tensor unlab_mask = Tensor::zeros({batch, 1});
            for (int i = n_lab; i < batch; ++i) unlab_mask.at(i, 0) = 1.0;
            const NodeId lse_real_q = logsumexp_rows(t, lq, mask_real);
            const NodeId ce_rows = t.multiply(t.subtract(lse_all_q, lse_real_q), t.leaf(std::move(unlab_mask)));
            const NodeId term = scale(t, t.sum(ce_rows), 1.0 / (batch - n_lab));
            loss = loss < 0 ? term : t.add(loss, term);
        }
        {
            const NodeId last = select_columns(t, lp, k, k + 1);
            const NodeId term = scale(t, t.sum(t.subtract(logsumexp_rows(t, lp, mask_all), last)), 1.0 / batch);
            loss = loss < 0 ? term : t.add(loss, term);
        }

        metrics.Ld = t.value(loss)[0];
        metrics.mean_real_q = mean_real_mass(t.value(lq), k);
        metrics.mean_real_p = mean_real_mass(t.value(lp), k);
        if (n_lab > 0) {
            int correct = 0;
            const Tensor& lqv = t.value(lq);
            for (int i = 0; i < n_lab; ++i) {
                int best = 0;
                for (int j = 1; j < k; ++j)
                    if (lqv.at(i, j) > lqv.at(i, best)) best = j;
                if (best == b.labels[static_cast<std::size_t>(i)]) ++correct;
            }
            metrics.labeled_accuracy = static_cast<double>(correct) / n_lab;
        }
        abort_if_not_finite(metrics.Ld, "discriminator loss", step_count + 1);

        Gradients grads = backward(t, loss);
        std::vector<Tensor> g;
        for (NodeId id : dsc.param_ids()) g.push_back(grads.wrt(id));
        ParamRefs refs;
        refs.append(model.discriminator, "discriminator");
        adam_step(opt_d, refs.tensors, g, refs.names);
    }

    {
        LabeledBatch b = draw_semisup_batch(*data, labeled_pool, n_lab, batch, rng);
        const Tensor z = Tensor::randn({batch, model.dim_z}, rng);
        const Tensor eps = Tensor::randn({batch, model.dim_z}, rng);

        Tape t;
        const TapedMlp enc = register_mlp(t, model.encoder);
        const TapedMlp dec = register_mlp(t, model.decoder);
        const TapedMlp dsc = register_mlp(t, model.discriminator);
        const NodeId xn = t.leaf(b.x);
        const NodeId zn = t.leaf(z);
        const NodeId z_hat = encode(t, enc, xn, t.leaf(eps));
        const NodeId x_til = dec.forward(t, zn);
        const NodeId lq = dsc.forward(t, t.concat_last_axis(xn, z_hat));
        const NodeId lp = dsc.forward(t, t.concat_last_axis(x_til, zn));
        abort_on_bad_logits(t.value(lq), t.value(lp), step_count + 1);

        // q-pairs toward class K+1, p-pairs toward the real-class mass.
        const NodeId last_q = select_columns(t, lq, k, k + 1);
        const NodeId term_q = scale(t, t.sum(t.subtract(logsumexp_rows(t, lq, mask_all), last_q)), 1.0 / batch);
        const NodeId term_p = scale(
            t, t.sum(t.subtract(logsumexp_rows(t, lp, mask_all), logsumexp_rows(t, lp, mask_real))),
            1.0 / batch);
        const NodeId loss = t.add(term_q, term_p);

        metrics.Lg = t.value(loss)[0];
        abort_if_not_finite(metrics.Lg, "generator loss", step_count + 1);

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

Tensor semisup_class_probs(const AliModel& model, int num_classes, const Tensor& x, Rng& rng) {
    const Tensor eps = Tensor::randn({x.rows(), model.dim_z}, rng);
    const Tensor z_hat = encode_apply(model.encoder, x, eps);
    const Tensor logits = discriminate_apply(model.discriminator, x, z_hat);
    if (logits.cols() != num_classes + 1)
        throw ContractError("discriminator width " + std::to_string(logits.cols()) +
                            " does not match K+1 = " + std::to_string(num_classes + 1));
    // Softmax over all K+1 logits, but report only the K real classes — the
    // remaining share is the model-pair ("fake") mass, so rows sum to <= 1.
    Tensor probs = Tensor::zeros({logits.rows(), num_classes});
    for (int i = 0; i < logits.rows(); ++i) {
        double mx = logits.at(i, 0);
        for (int j = 1; j < logits.cols(); ++j) mx = std::max(mx, logits.at(i, j));
        double total = 0.0;
        for (int j = 0; j < logits.cols(); ++j) total += std::exp(logits.at(i, j) - mx);
        for (int j = 0; j < num_classes; ++j)
            probs.at(i, j) = std::exp(logits.at(i, j) - mx) / total;
    }
    return probs;
}

std::vector<int> semisup_classify(const AliModel& model, int num_classes, const Tensor& x, Rng& rng) {
    const Tensor probs = semisup_class_probs(model, num_classes, x, rng);
    std::vector<int> out(static_cast<std::size_t>(x.rows()));
    for (int i = 0; i < x.rows(); ++i) {
        int best = 0;
        for (int j = 1; j < num_classes; ++j)
            if (probs.at(i, j) > probs.at(i, best)) best = j;
        out[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

double semisup_accuracy(const AliModel& model, int num_classes, const Dataset& heldout, Rng& rng) {
    const std::vector<int> pred = semisup_classify(model, num_classes, heldout.x, rng);
    int correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == heldout.labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(pred.size());
}

} // namespace alilab
