#include "alilab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "alilab/error.hpp"
#include "alilab/mixture.hpp"
#include "alilab/text.hpp"

namespace alilab {

namespace {

const char* kModelNames[] = {"ali", "gan", "vae", "invmap", "posthoc", "cond-ali", "semisup"};

[[noreturn]] void fail(int line, const std::string& what) {
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

double to_double(const std::string& v, int line) {
    const char* begin = v.c_str();
    char* end = nullptr;
    const double out = std::strtod(begin, &end);
    if (end == begin || *end != '\0') fail(line, "expected a number, got '" + v + "'");
    return out;
}

long long to_int(const std::string& v, int line) {
    const char* begin = v.c_str();
    char* end = nullptr;
    const long long out = std::strtoll(begin, &end, 10);
    if (end == begin || *end != '\0') fail(line, "expected an integer, got '" + v + "'");
    return out;
}

std::uint64_t to_u64(const std::string& v, int line) {
    const char* begin = v.c_str();
    char* end = nullptr;
    const unsigned long long out = std::strtoull(begin, &end, 10);
    if (end == begin || *end != '\0' || v[0] == '-')
        fail(line, "expected a non-negative integer, got '" + v + "'");
    return out;
}

std::vector<int> to_int_list(const std::string& v, int line) {
    std::vector<int> out;
    for (const std::string& piece : split(v, ',')) {
        if (piece.empty()) fail(line, "empty entry in list '" + v + "'");
        out.push_back(static_cast<int>(to_int(piece, line)));
    }
    return out;
}

std::string join_int_list(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

} // namespace

const char* model_kind_name(ModelKind kind) { return kModelNames[static_cast<int>(kind)]; }

ModelKind model_kind_from_name(const std::string& name) {
    for (int i = 0; i < 7; ++i)
        if (name == kModelNames[i]) return static_cast<ModelKind>(i);
    throw ConfigError("unknown model kind '" + name +
                      "' (expected ali|gan|vae|invmap|posthoc|cond-ali|semisup)");
}

double DataConfig::effective_scale() const {
    return scale > 0.0 ? scale : grid_scale(side, spacing);
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section; // "" = top level
    std::vector<std::string> seen; // "section/key" duplicates guard
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "unterminated section header '" + s + "'");
            section = trim(s.substr(1, s.size() - 2));
            static const char* kSections[] = {"data",  "dims",  "encoder", "decoder",
                                              "discriminator", "optimizer", "train",
                                              "cond",  "semisup"};
            bool known = false;
            for (const char* name : kSections) known = known || section == name;
            if (!known) fail(line, "unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected key = value, got '" + s + "'");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key.empty()) fail(line, "empty key");
        const std::string slot = section + "/" + key;
        for (const std::string& prev : seen)
            if (prev == slot) fail(line, "duplicate key '" + key + "' in [" + section + "]");
        seen.push_back(slot);

        if (section.empty()) {
            if (key == "model") {
                try {
                    cfg.model = model_kind_from_name(val);
                } catch (const ConfigError& e) {
                    fail(line, e.what());
                }
            } else if (key == "seed") cfg.seed = to_u64(val, line);
            else if (key == "steps") cfg.steps = static_cast<int>(to_int(val, line));
            else if (key == "batch") cfg.batch = static_cast<int>(to_int(val, line));
            else if (key == "out") cfg.out = val;
            else if (key == "decoder_checkpoint") cfg.decoder_checkpoint = val;
            else fail(line, "unknown top-level key '" + key + "'");
        } else if (section == "data") {
            if (key == "side") cfg.data.side = static_cast<int>(to_int(val, line));
            else if (key == "spacing") cfg.data.spacing = to_double(val, line);
            else if (key == "sigma") cfg.data.sigma = to_double(val, line);
            else if (key == "scale") cfg.data.scale = (val == "auto") ? 0.0 : to_double(val, line);
            else if (key == "n_train") cfg.data.n_train = static_cast<int>(to_int(val, line));
            else if (key == "n_eval") cfg.data.n_eval = static_cast<int>(to_int(val, line));
            else fail(line, "unknown key '" + key + "' in [data]");
        } else if (section == "dims") {
            if (key == "dim_x") cfg.dim_x = static_cast<int>(to_int(val, line));
            else if (key == "dim_z") cfg.dim_z = static_cast<int>(to_int(val, line));
            else fail(line, "unknown key '" + key + "' in [dims]");
        } else if (section == "encoder") {
            if (key == "hidden") cfg.encoder_hidden = to_int_list(val, line);
            else fail(line, "unknown key '" + key + "' in [encoder]");
        } else if (section == "decoder") {
            if (key == "hidden") cfg.decoder_hidden = to_int_list(val, line);
            else fail(line, "unknown key '" + key + "' in [decoder]");
        } else if (section == "discriminator") {
            if (key == "hidden") cfg.discriminator_hidden = to_int_list(val, line);
            else fail(line, "unknown key '" + key + "' in [discriminator]");
        } else if (section == "optimizer") {
            if (key == "lr") cfg.optimizer.lr = to_double(val, line);
            else if (key == "beta1") cfg.optimizer.beta1 = to_double(val, line);
            else if (key == "beta2") cfg.optimizer.beta2 = to_double(val, line);
            else if (key == "eps") cfg.optimizer.eps = to_double(val, line);
            else fail(line, "unknown key '" + key + "' in [optimizer]");
        } else if (section == "train") {
            if (key == "init_sigma") cfg.train.init_sigma = to_double(val, line);
            else if (key == "leaky_slope") cfg.train.leaky_slope = to_double(val, line);
            else if (key == "eval_every") cfg.train.eval_every = static_cast<int>(to_int(val, line));
            else if (key == "checkpoint_every")
                cfg.train.checkpoint_every = static_cast<int>(to_int(val, line));
            else fail(line, "unknown key '" + key + "' in [train]");
        } else if (section == "cond") {
            if (key == "classes") cfg.cond.classes = static_cast<int>(to_int(val, line));
            else if (key == "label_divisor")
                cfg.cond.label_divisor = static_cast<int>(to_int(val, line));
            else fail(line, "unknown key '" + key + "' in [cond]");
        } else if (section == "semisup") {
            if (key == "classes") cfg.semisup.classes = static_cast<int>(to_int(val, line));
            else if (key == "labels") cfg.semisup.labels = static_cast<int>(to_int(val, line));
            else if (key == "labeled_fraction")
                cfg.semisup.labeled_fraction = to_double(val, line);
            else fail(line, "unknown key '" + key + "' in [semisup]");
        }
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream o;
    o << "model = " << model_kind_name(c.model) << "\n";
    o << "seed = " << c.seed << "\n";
    o << "steps = " << c.steps << "\n";
    o << "batch = " << c.batch << "\n";
    o << "out = " << c.out << "\n";
    if (!c.decoder_checkpoint.empty())
        o << "decoder_checkpoint = " << c.decoder_checkpoint << "\n";
    o << "\n[data]\n";
    o << "side = " << c.data.side << "\n";
    o << "spacing = " << format_double(c.data.spacing) << "\n";
    o << "sigma = " << format_double(c.data.sigma) << "\n";
    o << "scale = " << (c.data.scale > 0.0 ? format_double(c.data.scale) : std::string("auto"))
      << "\n";
    o << "n_train = " << c.data.n_train << "\n";
    o << "n_eval = " << c.data.n_eval << "\n";
    o << "\n[dims]\n";
    o << "dim_x = " << c.dim_x << "\n";
    o << "dim_z = " << c.dim_z << "\n";
    o << "\n[encoder]\nhidden = " << join_int_list(c.encoder_hidden) << "\n";
    o << "\n[decoder]\nhidden = " << join_int_list(c.decoder_hidden) << "\n";
    o << "\n[discriminator]\nhidden = " << join_int_list(c.discriminator_hidden) << "\n";
    o << "\n[optimizer]\n";
    o << "lr = " << format_double(c.optimizer.lr) << "\n";
    o << "beta1 = " << format_double(c.optimizer.beta1) << "\n";
    o << "beta2 = " << format_double(c.optimizer.beta2) << "\n";
    o << "eps = " << format_double(c.optimizer.eps) << "\n";
    o << "\n[train]\n";
    o << "init_sigma = " << format_double(c.train.init_sigma) << "\n";
    o << "leaky_slope = " << format_double(c.train.leaky_slope) << "\n";
    o << "eval_every = " << c.train.eval_every << "\n";
    o << "checkpoint_every = " << c.train.checkpoint_every << "\n";
    o << "\n[cond]\n";
    o << "classes = " << c.cond.classes << "\n";
    o << "label_divisor = " << c.cond.label_divisor << "\n";
    o << "\n[semisup]\n";
    o << "classes = " << c.semisup.classes << "\n";
    o << "labels = " << c.semisup.labels << "\n";
    o << "labeled_fraction = " << format_double(c.semisup.labeled_fraction) << "\n";
    return o.str();
}

void apply_model_defaults(RunConfig& c) {
    if (c.model == ModelKind::kCondAli && c.cond.classes == 0) {
        // Default conditioning: one class per grid row of the mixture.
        c.cond.classes = c.data.side;
        c.cond.label_divisor = c.data.side;
    }
    if (c.model == ModelKind::kSemisup && c.semisup.classes == 0)
        c.semisup.classes = c.data.side * c.data.side; // one class per component
}

void validate_config(const RunConfig& c) {
    auto need = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    need(c.steps >= 1, "steps must be >= 1");
    need(c.batch >= 1, "batch must be >= 1");
    need(!c.out.empty(), "out directory must be set");
    need(c.data.side >= 1, "data side must be >= 1");
    need(c.data.spacing > 0.0, "data spacing must be > 0");
    need(c.data.sigma > 0.0, "data sigma must be > 0");
    need(c.data.scale >= 0.0, "data scale must be positive or auto");
    need(c.data.n_train >= 1, "n_train must be >= 1");
    need(c.data.n_eval >= 1, "n_eval must be >= 1");
    need(c.dim_x >= 1 && c.dim_z >= 1, "dims must be >= 1");
    need(c.dim_x == 2, "dim_x must be 2 (the mixture is two-dimensional)");
    auto check_hidden = [&](const std::vector<int>& h, const char* who) {
        need(!h.empty(), std::string(who) + " hidden sizes must be non-empty");
        for (int w : h) need(w >= 1, std::string(who) + " hidden sizes must be >= 1");
    };
    check_hidden(c.encoder_hidden, "encoder");
    check_hidden(c.decoder_hidden, "decoder");
    check_hidden(c.discriminator_hidden, "discriminator");
    need(c.optimizer.lr > 0.0, "lr must be > 0");
    need(c.optimizer.beta1 >= 0.0 && c.optimizer.beta1 < 1.0, "beta1 must be in [0, 1)");
    need(c.optimizer.beta2 >= 0.0 && c.optimizer.beta2 < 1.0, "beta2 must be in [0, 1)");
    need(c.optimizer.eps > 0.0, "optimizer eps must be > 0");
    need(c.train.init_sigma > 0.0, "init_sigma must be > 0");
    need(c.train.leaky_slope > 0.0 && c.train.leaky_slope < 1.0,
         "leaky_slope must be in (0, 1)");
    need(c.train.eval_every >= 0, "eval_every must be >= 0");
    need(c.train.checkpoint_every >= 0, "checkpoint_every must be >= 0");
    if (c.model == ModelKind::kInvmap || c.model == ModelKind::kPosthoc)
        need(!c.decoder_checkpoint.empty(),
             std::string(model_kind_name(c.model)) +
                 " needs decoder_checkpoint = <path to a trained decoder>");
    if (c.model == ModelKind::kCondAli) {
        need(c.cond.classes >= 1, "cond classes must be >= 1 for cond-ali");
        need(c.cond.label_divisor >= 1, "cond label_divisor must be >= 1");
    }
    if (c.model == ModelKind::kSemisup) {
        need(c.semisup.classes >= 2, "semisup classes must be >= 2");
        need(c.semisup.labels >= 1, "semisup labels must be >= 1");
        need(c.semisup.labels <= c.data.n_train, "semisup labels must be <= n_train");
        need(c.semisup.labeled_fraction >= 0.0 && c.semisup.labeled_fraction <= 1.0,
             "semisup labeled_fraction must be in [0, 1]");
    }
}

} // namespace alilab
