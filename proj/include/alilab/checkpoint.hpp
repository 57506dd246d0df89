#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "alilab/nn.hpp"

namespace alilab {

inline constexpr int kCheckpointFormatVersion = 1;

// One serialized network: role tag plus the flat parameter arrays per layer.
struct NetworkSnapshot {
    std::string role; // "encoder" | "decoder" | "discriminator"
    MlpParameters params;
};

struct Checkpoint {
    std::string model_kind;
    long long step = 0;
    std::vector<NetworkSnapshot> networks;

    const MlpParameters& network(const std::string& role) const;
    bool has_network(const std::string& role) const;
};

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path); // ArtifactError if missing

} // namespace alilab
