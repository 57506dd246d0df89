#include "alilab/checkpoint.hpp"

#include <fstream>

#include "json.hpp"

#include "alilab/error.hpp"

namespace alilab {

using nlohmann::json;

const MlpParameters& Checkpoint::network(const std::string& role) const {
    for (const NetworkSnapshot& n : networks)
        if (n.role == role) return n.params;
    throw ArtifactError("checkpoint has no network with role '" + role + "'");
}

bool Checkpoint::has_network(const std::string& role) const {
    for (const NetworkSnapshot& n : networks)
        if (n.role == role) return true;
    return false;
}

namespace {

json network_to_json(const NetworkSnapshot& net) {
    json j;
    j["role"] = net.role;
    j["layer_sizes"] = net.params.layer_sizes();
    j["head"] = head_name(net.params.head);
    j["leaky_slope"] = net.params.leaky_slope;
    json weights = json::array();
    json biases = json::array();
    for (const DenseLayer& l : net.params.layers) {
        weights.push_back(std::vector<double>(l.weight.data(), l.weight.data() + l.weight.size()));
        biases.push_back(std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size()));
    }
    j["weights"] = std::move(weights);
    j["biases"] = std::move(biases);
    return j;
}

NetworkSnapshot network_from_json(const json& j) {
    NetworkSnapshot net;
    net.role = j.at("role").get<std::string>();
    net.params.head = head_from_name(j.at("head").get<std::string>());
    net.params.leaky_slope = j.at("leaky_slope").get<double>();
    const auto sizes = j.at("layer_sizes").get<std::vector<int>>();
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (sizes.size() < 2 || weights.size() != sizes.size() - 1 || biases.size() != sizes.size() - 1)
        throw ConfigError("checkpoint network '" + net.role + "' has inconsistent layer arrays");
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        DenseLayer layer;
        layer.weight = Tensor::from({sizes[i], sizes[i + 1]}, weights[i].get<std::vector<double>>());
        layer.bias = Tensor::from({sizes[i + 1]}, biases[i].get<std::vector<double>>());
        net.params.layers.push_back(std::move(layer));
    }
    net.params.validate();
    return net;
}

} // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
    json j;
    j["format_version"] = kCheckpointFormatVersion;
    j["model_kind"] = ckpt.model_kind;
    j["step"] = ckpt.step;
    json nets = json::array();
    for (const NetworkSnapshot& n : ckpt.networks) nets.push_back(network_to_json(n));
    j["networks"] = std::move(nets);
    return j.dump(1);
}

Checkpoint checkpoint_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kCheckpointFormatVersion)
            throw ConfigError("unsupported checkpoint format_version " + std::to_string(version) +
                              " (expected " + std::to_string(kCheckpointFormatVersion) + ")");
        Checkpoint ckpt;
        ckpt.model_kind = j.at("model_kind").get<std::string>();
        ckpt.step = j.at("step").get<long long>();
        for (const json& n : j.at("networks")) ckpt.networks.push_back(network_from_json(n));
        return ckpt;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << checkpoint_to_json(ckpt) << "\n";
    if (!out) throw IoError("write to " + path.string() + " failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArtifactError("checkpoint not found: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return checkpoint_from_json(text);
}

} // namespace alilab
