#pragma once

#include <vector>

#include "alilab/dataset.hpp"
#include "alilab/nn.hpp"
#include "alilab/rng.hpp"
#include "alilab/tape.hpp"

namespace alilab {

// Per-step losses, all evaluated on the discriminator-phase forward pass
// (pre-update logits; Lg via the swap identity on the same logits). The
// generator update itself runs on a fresh forward pass with fresh noise.
struct StepMetrics {
    double Ld = 0.0;
    double Lg = 0.0;
    double mean_Dq = 0.0;
    double mean_Dp = 0.0;
};

struct AliArch {
    int dim_x = 2;
    int dim_z = 2;
    std::vector<int> encoder_hidden{64, 64};
    std::vector<int> decoder_hidden{64, 64};
    std::vector<int> discriminator_hidden{64, 64};
    double leaky_slope = 0.02;
    double init_sigma = 0.01;
    int cond_classes = 0; // 0 = unconditional; otherwise width of the one-hot y
};

struct AliModel {
    MlpParameters encoder;       // x [, y] -> [mu | log_sigma]
    MlpParameters decoder;       // z [, y] -> x
    MlpParameters discriminator; // (x, z) [, y] -> logit
    int dim_x = 0;
    int dim_z = 0;
    int cond_classes = 0;
};

// Networks drawn in order encoder, decoder, discriminator.
AliModel ali_init(const AliArch& arch, Rng& rng);

// z_hat = mu(x) + exp(log_sigma(x)) * eps, built on the tape.
NodeId encode(Tape& t, const TapedMlp& encoder, NodeId x, NodeId eps);

// Algorithm losses from pre-sigmoid logits via stable softplus:
//   Ld = mean softplus(-lq) + mean softplus(lp)
//   Lg = mean softplus(lq)  + mean softplus(-lp)   (the swap)
NodeId discriminator_loss(Tape& t, NodeId logits_q, NodeId logits_p);
NodeId generator_loss(Tape& t, NodeId logits_q, NodeId logits_p);

// Scalar versions over raw logit tensors (same softplus formulation).
double discriminator_loss_value(const Tensor& logits_q, const Tensor& logits_p);
double generator_loss_value(const Tensor& logits_q, const Tensor& logits_p);
double mean_sigmoid(const Tensor& logits);

// Untaped forward passes (bit-identical to the taped ones).
Tensor encode_apply(const MlpParameters& encoder, const Tensor& x, const Tensor& eps);
Tensor encoder_mean(const MlpParameters& encoder, const Tensor& x);
Tensor encoder_log_sigma(const MlpParameters& encoder, const Tensor& x);
// Mean prediction: the mu half for split-gaussian decoders, raw output otherwise.
Tensor decoder_mean(const MlpParameters& decoder, const Tensor& z);
Tensor discriminate_apply(const MlpParameters& d, const Tensor& x, const Tensor& z);

Tensor one_hot(const std::vector<int>& classes, int k);

// Two-phase trainer (one discriminator Adam step, then one generator Adam step
// on encoder + decoder jointly). Conditional when model.cond_classes > 0: the
// one-hot y is appended to every network input; q-side classes come from data
// labels via label / cond_label_divisor, p-side classes are drawn uniformly.
//
// RNG consumption per phase: batch indices, then z normals, then eps normals,
// then (conditional, K > 1 only) p-side class draws.
struct AliTrainer {
    AliModel model;
    AdamState opt_d;
    AdamState opt_g;
    Rng rng;
    const Dataset* data = nullptr;
    int batch = 100;
    long long step_count = 0;
    int cond_label_divisor = 1;

    static AliTrainer create(const AliArch& arch, const AdamConfig& adam, const Dataset& data,
                             int batch, Rng init_rng, Rng train_rng);

    StepMetrics step();
};

} // namespace alilab
