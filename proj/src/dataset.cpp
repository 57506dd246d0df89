#include "alilab/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "alilab/error.hpp"

namespace alilab {

Dataset sample_dataset(const GaussianMixture& mix, int n, Rng& rng) {
    SampleSet s = sample(mix, n, rng);
    return Dataset{std::move(s.x), std::move(s.labels)};
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "x0,x1,label\n";
    char line[96];
    for (int i = 0; i < data.size(); ++i) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%d\n", data.x.at(i, 0), data.x.at(i, 1),
                      data.labels[static_cast<std::size_t>(i)]);
        out << line;
    }
    if (!out) throw IoError("write to " + path.string() + " failed");
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArtifactError("dataset not found: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "x0,x1,label")
        throw ConfigError("dataset " + path.string() + " has unexpected header '" + line + "'");
    std::vector<double> coords;
    std::vector<int> labels;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        double x0 = 0.0, x1 = 0.0;
        int label = 0;
        if (!std::getline(row, field, ',')) throw ConfigError("bad dataset row: " + line);
        x0 = std::stod(field);
        if (!std::getline(row, field, ',')) throw ConfigError("bad dataset row: " + line);
        x1 = std::stod(field);
        if (!std::getline(row, field, ',')) throw ConfigError("bad dataset row: " + line);
        label = std::stoi(field);
        coords.push_back(x0);
        coords.push_back(x1);
        labels.push_back(label);
    }
    if (labels.empty()) throw ConfigError("dataset " + path.string() + " has no rows");
    Dataset data;
    data.x = Tensor::from({static_cast<int>(labels.size()), 2}, std::move(coords));
    data.labels = std::move(labels);
    return data;
}

Tensor draw_batch(const Dataset& data, int m, Rng& rng) {
    Tensor out = Tensor::zeros({m, data.dim()});
    for (int i = 0; i < m; ++i) {
        const auto r = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(data.size())));
        for (int j = 0; j < data.dim(); ++j) out.at(i, j) = data.x.at(r, j);
    }
    return out;
}

LabeledBatch draw_labeled_batch(const Dataset& data, int m, Rng& rng) {
    LabeledBatch out;
    out.x = Tensor::zeros({m, data.dim()});
    out.labels.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const auto r = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(data.size())));
        for (int j = 0; j < data.dim(); ++j) out.x.at(i, j) = data.x.at(r, j);
        out.labels[static_cast<std::size_t>(i)] = data.labels[static_cast<std::size_t>(r)];
    }
    return out;
}

LabeledBatch draw_semisup_batch(const Dataset& data, const std::vector<int>& labeled_pool,
                                int n_labeled, int m, Rng& rng) {
    if (n_labeled > m) throw ContractError("labeled rows exceed batch size");
    if (n_labeled > 0 && labeled_pool.empty()) throw ContractError("labeled pool is empty");
    LabeledBatch out;
    out.x = Tensor::zeros({m, data.dim()});
    out.labels.assign(static_cast<std::size_t>(m), -1);
    for (int i = 0; i < n_labeled; ++i) {
        const auto pick = static_cast<std::size_t>(rng.bounded(labeled_pool.size()));
        const int r = labeled_pool[pick];
        for (int j = 0; j < data.dim(); ++j) out.x.at(i, j) = data.x.at(r, j);
        out.labels[static_cast<std::size_t>(i)] = data.labels[static_cast<std::size_t>(r)];
    }
    for (int i = n_labeled; i < m; ++i) {
        const auto r = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(data.size())));
        for (int j = 0; j < data.dim(); ++j) out.x.at(i, j) = data.x.at(r, j);
    }
    return out;
}

} // namespace alilab
