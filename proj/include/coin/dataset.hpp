#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <utility>

#include "coin/core.hpp"

namespace coin {

/// Labeled vector dataset. Class ids are dense: every label lies in
/// [0, num_classes()) and every class is populated.
struct LabeledDataset {
    std::vector<FeatureVector> samples;
    std::vector<int> labels;
    std::string name;

    std::size_t size() const { return samples.size(); }

    std::size_t dim() const { return samples.empty() ? 0 : samples.front().size(); }

    int num_classes() const {
        int c = 0;
        for (int label : labels) c = std::max(c, label + 1);
        return c;
    }

    std::size_t class_count(int c) const {
        return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), c));
    }

    void validate() const {
        if (samples.size() != labels.size()) {
            throw DataError(name + ": " + std::to_string(samples.size()) + " samples vs " +
                            std::to_string(labels.size()) + " labels");
        }
        if (samples.empty()) throw DataError(name + ": empty dataset");
        const std::size_t d = samples.front().size();
        if (d == 0) throw DataError(name + ": zero-dimensional samples");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (samples[i].size() != d) {
                throw DataError(name + ": sample " + std::to_string(i) + " has dimension " +
                                std::to_string(samples[i].size()) + ", expected " + std::to_string(d));
            }
            if (!all_finite(samples[i])) {
                throw DataError(name + ": sample " + std::to_string(i) + " has non-finite entries");
            }
            if (labels[i] < 0) {
                throw DataError(name + ": sample " + std::to_string(i) + " has negative label");
            }
        }
        const int c = num_classes();
        for (int k = 0; k < c; ++k) {
            if (class_count(k) == 0) {
                throw DataError(name + ": class " + std::to_string(k) + " is empty");
            }
        }
    }
};

/// Index view of one class of a dataset; indices are strictly increasing.
struct ClassSubset {
    const LabeledDataset* parent = nullptr;
    int class_id = 0;
    std::vector<std::size_t> indices;

    std::vector<FeatureVector> points() const {
        std::vector<FeatureVector> out;
        out.reserve(indices.size());
        for (std::size_t i : indices) out.push_back(parent->samples[i]);
        return out;
    }
};

/// Two interleaved half-circle arcs ("two moons") with isotropic Gaussian
/// noise. Class 0 sits on the upper unit half-circle centered at the origin;
/// class 1 is the mirrored arc dipping to (1, -0.5). The arcs overlap in both
/// coordinates, so no axis-aligned threshold separates the classes, while a
/// local neighborhood rule still can.
inline LabeledDataset generate_entangled_manifolds(std::size_t n_per_class, double noise_sigma,
                                                   double rotation, std::uint64_t seed) {
    if (n_per_class == 0) throw std::invalid_argument("generate_entangled_manifolds: n_per_class must be >= 1");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("generate_entangled_manifolds: noise_sigma must be >= 0");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::normal_distribution<double> gauss(0.0, 1.0);

    LabeledDataset ds;
    ds.name = "entangled-manifolds";
    ds.samples.reserve(2 * n_per_class);
    ds.labels.reserve(2 * n_per_class);

    const double cr = std::cos(rotation);
    const double sr = std::sin(rotation);
    auto emit = [&](double x, double y, int label) {
        if (noise_sigma > 0.0) {
            x += noise_sigma * gauss(rng);
            y += noise_sigma * gauss(rng);
        }
        ds.samples.push_back({cr * x - sr * y, sr * x + cr * y});
        ds.labels.push_back(label);
    };

    for (std::size_t i = 0; i < n_per_class; ++i) {
        const double t = angle(rng);
        emit(std::cos(t), std::sin(t), 0);
    }
    for (std::size_t i = 0; i < n_per_class; ++i) {
        const double t = angle(rng);
        emit(1.0 + std::cos(t), 0.5 - std::sin(t), 1);
    }
    return ds;
}

/// Stratified split: per class, round(test_fraction * N_c) samples go to the
/// test part, clamped so both parts keep at least one member of every class.
/// Sample order within each part follows the original dataset order.
inline std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& dataset,
                                                       double test_fraction, std::uint64_t seed) {
    dataset.validate();
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw std::invalid_argument("split: test_fraction must lie in (0,1)");
    }
    const int classes = dataset.num_classes();
    std::mt19937_64 rng(seed);

    std::vector<char> in_test(dataset.size(), 0);
    for (int c = 0; c < classes; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            if (dataset.labels[i] == c) idx.push_back(i);
        }
        if (idx.size() < 2) {
            throw std::invalid_argument("split: class " + std::to_string(c) +
                                        " has fewer than 2 samples, stratification impossible");
        }
        auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
        n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t k = 0; k < n_test; ++k) in_test[idx[k]] = 1;
    }

    LabeledDataset train, test;
    train.name = dataset.name + "/train";
    test.name = dataset.name + "/test";
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        LabeledDataset& part = in_test[i] ? test : train;
        part.samples.push_back(dataset.samples[i]);
        part.labels.push_back(dataset.labels[i]);
    }
    return {std::move(train), std::move(test)};
}

inline ClassSubset class_subset(const LabeledDataset& dataset, int c) {
    ClassSubset subset;
    subset.parent = &dataset;
    subset.class_id = c;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset.labels[i] == c) subset.indices.push_back(i);
    }
    if (c < 0 || subset.indices.empty()) {
        throw std::invalid_argument("class_subset: unknown class " + std::to_string(c));
    }
    return subset;
}

/// CSV layout: header `f0,...,f{d-1},label`, one sample per row, LF endings,
/// full binary64 precision (round-trip identity).
inline void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& path) {
    dataset.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_dataset: cannot open " + path.string());
    const std::size_t d = dataset.dim();
    for (std::size_t j = 0; j < d; ++j) out << 'f' << j << ',';
    out << "label\n";
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (double x : dataset.samples[i]) out << format_double(x) << ',';
        out << dataset.labels[i] << '\n';
    }
    if (!out) throw DataError("save_dataset: write failed for " + path.string());
}

inline LabeledDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_dataset: cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header.back() != "label") {
        throw DataError(path.string() + ":1: expected header f0,...,label");
    }
    const std::size_t d = header.size() - 1;

    LabeledDataset ds;
    ds.name = path.stem().string();
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        const std::string where = path.string() + ":" + std::to_string(row);
        if (fields.size() != d + 1) {
            throw DataError(where + ": expected " + std::to_string(d + 1) + " fields, got " +
                            std::to_string(fields.size()));
        }
        FeatureVector x(d);
        for (std::size_t j = 0; j < d; ++j) x[j] = parse_double(fields[j], where);
        ds.samples.push_back(std::move(x));
        ds.labels.push_back(static_cast<int>(parse_long(fields[d], where)));
    }
    ds.validate();
    return ds;
}

/// Per-coordinate affine map to zero mean / unit variance, fitted on the
/// training split only. Coordinates with zero spread are left unscaled.
class Standardizer {
public:
    Standardizer() = default;
    Standardizer(FeatureVector means, FeatureVector stds)
        : means_(std::move(means)), stds_(std::move(stds)) {}

    static Standardizer fit(const LabeledDataset& train) {
        train.validate();
        const std::size_t d = train.dim();
        const auto n = static_cast<double>(train.size());
        FeatureVector mean(d, 0.0), sd(d, 0.0);
        for (const auto& x : train.samples) {
            for (std::size_t j = 0; j < d; ++j) mean[j] += x[j];
        }
        for (std::size_t j = 0; j < d; ++j) mean[j] /= n;
        for (const auto& x : train.samples) {
            for (std::size_t j = 0; j < d; ++j) {
                const double c = x[j] - mean[j];
                sd[j] += c * c;
            }
        }
        for (std::size_t j = 0; j < d; ++j) {
            sd[j] = std::sqrt(sd[j] / n);
            if (sd[j] <= 0.0) sd[j] = 1.0;
        }
        return Standardizer(std::move(mean), std::move(sd));
    }

    FeatureVector apply(const FeatureVector& x) const {
        if (x.size() != means_.size()) throw std::invalid_argument("Standardizer: dimension mismatch");
        FeatureVector out(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - means_[j]) / stds_[j];
        return out;
    }

    LabeledDataset apply(const LabeledDataset& ds) const {
        LabeledDataset out = ds;
        for (auto& x : out.samples) x = apply(x);
        return out;
    }

    const FeatureVector& means() const { return means_; }
    const FeatureVector& stds() const { return stds_; }

private:
    FeatureVector means_;
    FeatureVector stds_;
};

} // namespace coin
