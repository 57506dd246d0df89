#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace alilab {

enum class ModelKind { kAli, kGan, kVae, kInvmap, kPosthoc, kCondAli, kSemisup };

const char* model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name); // ConfigError on unknown

struct DataConfig {
    int side = 5;          // grid side; side*side mixture components
    double spacing = 2.0;  // raw centroid spacing
    double sigma = 0.05;   // raw per-component standard deviation
    double scale = 0.0;    // standardization divisor; 0 = auto ((side-1)/2 * spacing)
    int n_train = 100000;
    int n_eval = 10000;

    double effective_scale() const;
};

struct OptimizerConfig {
    double lr = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainConfig {
    double init_sigma = 0.01;  // weight init N(0, init_sigma^2)
    double leaky_slope = 0.02; // leaky ReLU negative slope
    int eval_every = 5000;     // coverage snapshot cadence; 0 = never
    int checkpoint_every = 0;  // periodic checkpoint cadence; 0 = final only
};

struct CondConfig {
    int classes = 0;       // conditioning one-hot width; 0 = unconditional
    int label_divisor = 1; // class = (component label / divisor) % classes
};

struct SemisupConfig {
    int classes = 0;               // K real classes (discriminator gets K+1 outputs)
    int labels = 100;              // labeled-pool size (first rows of the train set)
    double labeled_fraction = 0.5; // labeled share of each batch
};

struct RunConfig {
    ModelKind model = ModelKind::kAli;
    std::uint64_t seed = 1;
    int steps = 20000;
    int batch = 100;
    std::string out = "run";
    std::string decoder_checkpoint; // frozen decoder source (invmap / posthoc)

    DataConfig data;
    int dim_x = 2;
    int dim_z = 2;
    std::vector<int> encoder_hidden{64, 64};
    std::vector<int> decoder_hidden{64, 64};
    std::vector<int> discriminator_hidden{64, 64};
    OptimizerConfig optimizer;
    TrainConfig train;
    CondConfig cond;
    SemisupConfig semisup;
};

// Parse the key-value config text (flat [section] blocks, '#'/';' comments).
// Unknown sections or keys, malformed values, and duplicate keys all raise
// ConfigError with the offending line number.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path); // ConfigError if unreadable

// Canonical text form: parse(serialize(c)) == c, and serialize is a fixed
// ordering so equal configs produce identical bytes.
std::string serialize_config(const RunConfig& config);

// Fill model-dependent blanks (cond/semisup class counts from the mixture
// geometry) without overriding explicit settings.
void apply_model_defaults(RunConfig& config);

// ConfigError on any violated invariant. Called before any training starts.
void validate_config(const RunConfig& config);

} // namespace alilab
