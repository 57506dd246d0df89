#pragma once

#include <vector>

#include "alilab/ali.hpp"
#include "alilab/dataset.hpp"
#include "alilab/nn.hpp"

namespace alilab {

// GAN over x alone: same two-phase step as AliTrainer, discriminator input x.
struct GanTrainer {
    MlpParameters decoder;
    MlpParameters discriminator;
    AdamState opt_d;
    AdamState opt_g;
    Rng rng;
    const Dataset* data = nullptr;
    int dim_z = 2;
    int batch = 100;
    long long step_count = 0;

    static GanTrainer create(const AliArch& arch, const AdamConfig& adam, const Dataset& data,
                             int batch, Rng init_rng, Rng train_rng);

    StepMetrics step();
};

// Deterministic inverse mapping: frozen decoder, encoder mean head regressed
// onto z with loss E || z - mu(decoder(z)) ||^2.
struct InvmapTrainer {
    MlpParameters decoder; // frozen
    MlpParameters encoder;
    AdamState opt;
    Rng rng;
    int dim_z = 2;
    int batch = 100;
    long long step_count = 0;

    static InvmapTrainer create(MlpParameters frozen_decoder, const AliArch& arch,
                                const AdamConfig& adam, int batch, Rng init_rng, Rng train_rng);

    double step(); // returns the latent reconstruction loss
};

// Post-hoc learned inference: the ALI procedure against a frozen decoder; the
// generator phase updates the encoder only.
struct PosthocTrainer {
    AliModel model; // decoder frozen
    AdamState opt_d;
    AdamState opt_g;
    Rng rng;
    const Dataset* data = nullptr;
    int batch = 100;
    long long step_count = 0;

    static PosthocTrainer create(MlpParameters frozen_decoder, const AliArch& arch,
                                 const AdamConfig& adam, const Dataset& data, int batch,
                                 Rng init_rng, Rng train_rng);

    StepMetrics step();
};

// VAE with learned per-dimension decoder variance; one reparametrized sample
// per datum and the analytic Gaussian KL.
struct VaeStepInfo {
    double elbo = 0.0;
    double recon_ll = 0.0; // E log p(x | z)
    double kl = 0.0;
};

struct VaeTrainer {
    MlpParameters encoder; // x -> [mu | log_sigma] over z
    MlpParameters decoder; // z -> [mu | log_sigma] over x
    AdamState opt;
    Rng rng;
    const Dataset* data = nullptr;
    int dim_z = 2;
    int batch = 100;
    long long step_count = 0;

    static VaeTrainer create(const AliArch& arch, const AdamConfig& adam, const Dataset& data,
                             int batch, Rng init_rng, Rng train_rng);

    VaeStepInfo step();
};

// Draw x ~ p(x): decode z and add the decoder's per-dimension noise.
Tensor vae_sample(const MlpParameters& decoder, const Tensor& z, Rng& rng);

// Semi-supervised ALI: discriminator outputs K+1 logits (K data classes plus
// the p-pair class). Labeled q-pairs take cross-entropy to their class,
// unlabeled q-pairs to the aggregated real-class mass, p-pairs to class K+1;
// the generator mirrors the Algorithm swap (q-pairs toward class K+1, p-pairs
// toward the real-class mass). All terms go through log-sum-exp on logits.
struct SemiSupMetrics {
    double Ld = 0.0;
    double Lg = 0.0;
    double mean_real_q = 0.0; // mean probability mass on the K real classes, q-pairs
    double mean_real_p = 0.0;
    double labeled_accuracy = 0.0;
};

struct SemiSupTrainer {
    AliModel model; // discriminator output width K+1, linear head
    int num_classes = 0;
    AdamState opt_d;
    AdamState opt_g;
    Rng rng;
    const Dataset* data = nullptr;
    std::vector<int> labeled_pool; // dataset row indices with visible labels
    double labeled_fraction = 0.5; // of each q-batch, drawn from the pool
    int batch = 100;
    long long step_count = 0;

    static SemiSupTrainer create(const AliArch& arch, int num_classes, const AdamConfig& adam,
                                 const Dataset& data, std::vector<int> labeled_pool,
                                 double labeled_fraction, int batch, Rng init_rng, Rng train_rng);

    SemiSupMetrics step();
};

// Class probabilities softmax(logits)[.., 0..K) for (x, z_hat) pairs.
Tensor semisup_class_probs(const AliModel& model, int num_classes, const Tensor& x, Rng& rng);
// Argmax over the K real classes.
std::vector<int> semisup_classify(const AliModel& model, int num_classes, const Tensor& x, Rng& rng);
double semisup_accuracy(const AliModel& model, int num_classes, const Dataset& heldout, Rng& rng);

} // namespace alilab
