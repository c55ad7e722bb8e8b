#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>

#include "coin/dataset.hpp"
#include "coin/svm.hpp"

namespace coin {

/// Angular cosine distance 1 - a.b/(|a||b|), in [0, 2]. Equal vectors are at
/// distance exactly 0, so duplicate points are detectable by the radii code.
inline double cosine_distance(const FeatureVector& a, const FeatureVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine_distance: dimension mismatch");
    const double na2 = dot(a, a);
    const double nb2 = dot(b, b);
    if (na2 == 0.0 || nb2 == 0.0) throw std::invalid_argument("cosine_distance: zero vector");
    if (a == b) return 0.0;
    double c = dot(a, b) / std::sqrt(na2 * nb2);
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    return 1.0 - c;
}

/// Diversity/proximity radii for one class: rho is the minimum pairwise
/// cosine distance over distinct pairs of the class points, r1 = r2 = rho and
/// r3 = 3 rho. Duplicate points make rho collapse to 0, which would silently
/// disable the diversity penalties; in that case the smallest strictly
/// positive pair distance is substituted and flagged.
struct Radii {
    double rho = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
    double r3 = 0.0;
    bool degenerate_fallback = false;
};

inline Radii compute_radii(const std::vector<FeatureVector>& class_points) {
    if (class_points.size() < 2) {
        throw std::invalid_argument("compute_radii: need at least 2 samples");
    }
    double min_all = std::numeric_limits<double>::infinity();
    double min_positive = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < class_points.size(); ++i) {
        for (std::size_t j = i + 1; j < class_points.size(); ++j) {
            const double d = cosine_distance(class_points[i], class_points[j]);
            min_all = std::min(min_all, d);
            if (d > 0.0) min_positive = std::min(min_positive, d);
        }
    }
    Radii r;
    if (min_all > 0.0) {
        r.rho = min_all;
    } else if (std::isfinite(min_positive)) {
        r.rho = min_positive;
        r.degenerate_fallback = true;
    } else {
        throw DataError("compute_radii: degenerate rho, all pairwise cosine distances are zero");
    }
    r.r1 = r.rho;
    r.r2 = r.rho;
    r.r3 = 3.0 * r.rho;
    return r;
}

/// Additive isotropic Gaussian corruption; the generator involves no
/// objective of its own.
inline FeatureVector corrupt_seed(const FeatureVector& x, double noise_sigma, std::mt19937_64& rng) {
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("corrupt_seed: noise_sigma must be >= 0");
    if (noise_sigma == 0.0) return x;
    std::normal_distribution<double> gauss(0.0, noise_sigma);
    FeatureVector out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] + gauss(rng);
    return out;
}

/// P_D(x) - gamma * max(0, r1 - min distance to already accepted positives);
/// candidates maximize this. An empty accepted set contributes no penalty.
inline double score_positive_candidate(const FeatureVector& x, const LinearSvm& discriminator,
                                       const std::vector<FeatureVector>& existing_positives,
                                       const Radii& radii, double gamma) {
    double score = discriminator.real_probability(x);
    if (!existing_positives.empty()) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& p : existing_positives) nearest = std::min(nearest, cosine_distance(x, p));
        score -= gamma * std::max(0.0, radii.r1 - nearest);
    }
    return score;
}

/// P_D(x) + gamma * max(0, r2 - min distance to accepted negatives)
///        + gamma * max(0, min distance to the originals - r3);
/// candidates minimize this, so the selected point is maximally
/// distinguishable while staying within r3 of the class data and at least
/// r2 away from previously accepted negatives.
inline double score_negative_candidate(const FeatureVector& x, const LinearSvm& discriminator,
                                       const std::vector<FeatureVector>& originals,
                                       const std::vector<FeatureVector>& existing_negatives,
                                       const Radii& radii, double gamma) {
    double score = discriminator.real_probability(x);
    if (!existing_negatives.empty()) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& p : existing_negatives) nearest = std::min(nearest, cosine_distance(x, p));
        score += gamma * std::max(0.0, radii.r2 - nearest);
    }
    double nearest_orig = std::numeric_limits<double>::infinity();
    for (const auto& p : originals) nearest_orig = std::min(nearest_orig, cosine_distance(x, p));
    score += gamma * std::max(0.0, nearest_orig - radii.r3);
    return score;
}

enum class NeighborKind { positive, negative };
enum class PointKind { original, positive, negative };

struct GeneratedNeighbor {
    FeatureVector point;
    std::size_t seed_index = 0;  // index into the class originals
    std::size_t batch = 0;
};

/// Everything needed to re-score one candidate batch offline: the per-batch
/// discriminator, all T candidates and the index that was accepted.
struct CandidateBatchLog {
    LinearSvm discriminator;
    std::vector<FeatureVector> candidates;
    std::vector<std::size_t> seed_indices;
    std::vector<double> scores;
    std::size_t accepted = 0;
    std::size_t existing_count = 0;  // accepted neighbors before this batch
};

struct NeighborRun {
    std::vector<GeneratedNeighbor> accepted;
    std::vector<CandidateBatchLog> batches;
    Radii radii;
};

struct AugmentConfig {
    std::size_t batch_candidates = 200;  // T
    double gamma = 1e-2;
    double noise_sigma = 0.0;  // <= 0 selects 0.1 x mean per-coordinate std of the seeds
    std::size_t n_pos_total = 5;
    std::size_t n_neg_total = 20;
    std::uint64_t seed = 0;
    SvmTrainConfig svm;
};

namespace detail {

inline double resolve_noise_sigma(const AugmentConfig& config,
                                  const std::vector<FeatureVector>& points) {
    if (config.noise_sigma > 0.0) return config.noise_sigma;
    const std::size_t d = points.front().size();
    const auto n = static_cast<double>(points.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (const auto& x : points) mean += x[j];
        mean /= n;
        double var = 0.0;
        for (const auto& x : points) {
            const double c = x[j] - mean;
            var += c * c;
        }
        acc += std::sqrt(var / n);
    }
    return 0.1 * acc / static_cast<double>(d);
}

/// Shared batch loop for both neighbor kinds. Per batch: corrupt T randomly
/// chosen seed points, train a fresh discriminator with the class originals
/// plus previously accepted neighbors on the real side and the T candidates
/// on the generated side, then accept the score arg-extremum (ties resolved
/// toward the lowest candidate index).
inline NeighborRun generate_neighbors(const std::vector<FeatureVector>& class_points,
                                      const AugmentConfig& config, NeighborKind kind) {
    if (class_points.size() < 2) {
        throw std::invalid_argument("generate_neighbors: need at least 2 class samples");
    }
    if (config.batch_candidates < 2) {
        throw std::invalid_argument("generate_neighbors: batch_candidates must be >= 2");
    }
    if (!(config.gamma >= 0.0)) throw std::invalid_argument("generate_neighbors: gamma must be >= 0");

    const std::size_t total =
        (kind == NeighborKind::positive) ? config.n_pos_total : config.n_neg_total;
    NeighborRun run;
    if (total == 0) return run;

    run.radii = compute_radii(class_points);
    const double sigma = resolve_noise_sigma(config, class_points);
    std::mt19937_64 rng(config.seed);
    std::uniform_int_distribution<std::size_t> pick_seed(0, class_points.size() - 1);

    std::vector<FeatureVector> accepted_points;
    std::vector<FeatureVector> real_side = class_points;

    for (std::size_t batch = 0; batch < total; ++batch) {
        CandidateBatchLog log;
        log.existing_count = accepted_points.size();
        log.candidates.reserve(config.batch_candidates);
        log.seed_indices.reserve(config.batch_candidates);
        for (std::size_t t = 0; t < config.batch_candidates; ++t) {
            const std::size_t si = pick_seed(rng);
            log.seed_indices.push_back(si);
            log.candidates.push_back(corrupt_seed(class_points[si], sigma, rng));
        }

        log.discriminator = train_svm(real_side, log.candidates, config.svm);

        log.scores.reserve(config.batch_candidates);
        std::size_t best = 0;
        for (std::size_t t = 0; t < config.batch_candidates; ++t) {
            const double s =
                (kind == NeighborKind::positive)
                    ? score_positive_candidate(log.candidates[t], log.discriminator,
                                               accepted_points, run.radii, config.gamma)
                    : score_negative_candidate(log.candidates[t], log.discriminator, class_points,
                                               accepted_points, run.radii, config.gamma);
            log.scores.push_back(s);
            const bool better = (kind == NeighborKind::positive) ? (s > log.scores[best])
                                                                 : (s < log.scores[best]);
            if (better) best = t;
        }
        log.accepted = best;

        accepted_points.push_back(log.candidates[best]);
        real_side.push_back(log.candidates[best]);
        run.accepted.push_back({log.candidates[best], log.seed_indices[best], batch});
        run.batches.push_back(std::move(log));
    }
    return run;
}

} // namespace detail

inline NeighborRun generate_positive_neighbors(const std::vector<FeatureVector>& class_points,
                                               const AugmentConfig& config) {
    return detail::generate_neighbors(class_points, config, NeighborKind::positive);
}

inline NeighborRun generate_negative_neighbors(const std::vector<FeatureVector>& class_points,
                                               const AugmentConfig& config) {
    return detail::generate_neighbors(class_points, config, NeighborKind::negative);
}

/// The expanded dataset: per class, the originals plus the generated positive
/// and negative neighbors, flattened into one node table. Node order is all
/// originals in training order, then per class (ascending id) its positives
/// followed by its negatives. Generated points keep their provenance
/// (seed index within the class originals and batch number).
class AugmentedDataset {
public:
    struct Node {
        int class_id;
        PointKind kind;
        long seed_index;  // -1 for originals
        long batch;       // -1 for originals
    };

    AugmentedDataset() = default;

    static AugmentedDataset from_parts(LabeledDataset originals,
                                       std::vector<std::vector<GeneratedNeighbor>> positives,
                                       std::vector<std::vector<GeneratedNeighbor>> negatives) {
        originals.validate();
        const auto classes = static_cast<std::size_t>(originals.num_classes());
        if (positives.size() > classes || negatives.size() > classes) {
            throw DataError("AugmentedDataset: generated points reference a class with no originals");
        }
        positives.resize(classes);
        negatives.resize(classes);

        AugmentedDataset aug;
        aug.originals_ = std::move(originals);
        const std::size_t d = aug.originals_.dim();
        for (std::size_t i = 0; i < aug.originals_.size(); ++i) {
            aug.points_.push_back(aug.originals_.samples[i]);
            aug.nodes_.push_back({aug.originals_.labels[i], PointKind::original, -1, -1});
        }
        auto append = [&](const std::vector<GeneratedNeighbor>& list, int c, PointKind kind) {
            for (const auto& g : list) {
                if (g.point.size() != d) {
                    throw DataError("AugmentedDataset: generated point dimension mismatch");
                }
                if (!all_finite(g.point)) {
                    throw DataError("AugmentedDataset: generated point has non-finite entries");
                }
                aug.points_.push_back(g.point);
                aug.nodes_.push_back({c, kind, static_cast<long>(g.seed_index),
                                      static_cast<long>(g.batch)});
            }
        };
        for (std::size_t c = 0; c < classes; ++c) {
            append(positives[c], static_cast<int>(c), PointKind::positive);
            append(negatives[c], static_cast<int>(c), PointKind::negative);
        }
        aug.positives_ = std::move(positives);
        aug.negatives_ = std::move(negatives);
        return aug;
    }

    std::size_t node_count() const { return points_.size(); }
    std::size_t original_count() const { return originals_.size(); }
    std::size_t dim() const { return originals_.dim(); }
    int num_classes() const { return originals_.num_classes(); }

    const FeatureVector& point(std::size_t i) const { return points_.at(i); }
    const Node& node(std::size_t i) const { return nodes_.at(i); }
    const LabeledDataset& originals() const { return originals_; }

    const std::vector<GeneratedNeighbor>& positives(int c) const {
        return positives_.at(static_cast<std::size_t>(c));
    }
    const std::vector<GeneratedNeighbor>& negatives(int c) const {
        return negatives_.at(static_cast<std::size_t>(c));
    }

    /// Class points of the originals only, in training order.
    std::vector<FeatureVector> original_class_points(int c) const {
        std::vector<FeatureVector> out;
        for (std::size_t i = 0; i < originals_.size(); ++i) {
            if (originals_.labels[i] == c) out.push_back(originals_.samples[i]);
        }
        return out;
    }

private:
    LabeledDataset originals_;
    std::vector<std::vector<GeneratedNeighbor>> positives_;
    std::vector<std::vector<GeneratedNeighbor>> negatives_;
    std::vector<FeatureVector> points_;
    std::vector<Node> nodes_;
};

/// Per-class batch logs of a full expansion, for offline rescoring.
struct ExpansionTrace {
    std::vector<NeighborRun> positive_runs;  // indexed by class
    std::vector<NeighborRun> negative_runs;
};

/// Runs both neighbor generators for every class and assembles the expanded
/// dataset. A pure function of (train, config): per-class sub-seeds are
/// derived from config.seed, so repeated calls are identical.
inline AugmentedDataset expand_dataset(const LabeledDataset& train, const AugmentConfig& config,
                                       ExpansionTrace* trace = nullptr) {
    train.validate();
    const int classes = train.num_classes();
    for (int c = 0; c < classes; ++c) {
        if (train.class_count(c) < 2) {
            throw std::invalid_argument("expand_dataset: class " + std::to_string(c) +
                                        " needs at least 2 samples");
        }
    }

    std::vector<std::vector<GeneratedNeighbor>> positives(classes), negatives(classes);
    if (trace) {
        trace->positive_runs.assign(classes, {});
        trace->negative_runs.assign(classes, {});
    }
    for (int c = 0; c < classes; ++c) {
        const auto class_points = class_subset(train, c).points();
        AugmentConfig sub = config;
        sub.noise_sigma = detail::resolve_noise_sigma(config, train.samples);

        sub.seed = derive_seed(config.seed, 2 * static_cast<std::uint64_t>(c));
        NeighborRun pos = generate_positive_neighbors(class_points, sub);
        sub.seed = derive_seed(config.seed, 2 * static_cast<std::uint64_t>(c) + 1);
        NeighborRun neg = generate_negative_neighbors(class_points, sub);

        positives[c] = pos.accepted;
        negatives[c] = neg.accepted;
        if (trace) {
            trace->positive_runs[c] = std::move(pos);
            trace->negative_runs[c] = std::move(neg);
        }
    }
    return AugmentedDataset::from_parts(train, std::move(positives), std::move(negatives));
}

inline const char* point_kind_name(PointKind kind) {
    switch (kind) {
        case PointKind::original: return "orig";
        case PointKind::positive: return "pos";
        case PointKind::negative: return "neg";
    }
    return "?";
}

/// CSV layout: f0,...,f{d-1},class,kind,seed_index,batch with kind in
/// {orig,pos,neg}; originals carry seed_index = batch = -1.
inline void save_augmented(const AugmentedDataset& aug, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_augmented: cannot open " + path.string());
    const std::size_t d = aug.dim();
    for (std::size_t j = 0; j < d; ++j) out << 'f' << j << ',';
    out << "class,kind,seed_index,batch\n";
    for (std::size_t i = 0; i < aug.node_count(); ++i) {
        for (double x : aug.point(i)) out << format_double(x) << ',';
        const auto& n = aug.node(i);
        out << n.class_id << ',' << point_kind_name(n.kind) << ',' << n.seed_index << ',' << n.batch
            << '\n';
    }
    if (!out) throw DataError("save_augmented: write failed for " + path.string());
}

inline AugmentedDataset load_augmented(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_augmented: cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
    const auto header = split_csv_line(line);
    if (header.size() < 5 || header.back() != "batch") {
        throw DataError(path.string() + ":1: expected header f0,...,class,kind,seed_index,batch");
    }
    const std::size_t d = header.size() - 4;

    LabeledDataset originals;
    originals.name = path.stem().string();
    std::vector<std::vector<GeneratedNeighbor>> positives, negatives;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        const std::string where = path.string() + ":" + std::to_string(row);
        if (fields.size() != d + 4) {
            throw DataError(where + ": expected " + std::to_string(d + 4) + " fields, got " +
                            std::to_string(fields.size()));
        }
        FeatureVector x(d);
        for (std::size_t j = 0; j < d; ++j) x[j] = parse_double(fields[j], where);
        const int c = static_cast<int>(parse_long(fields[d], where));
        const std::string_view kind = fields[d + 1];
        const long seed_index = parse_long(fields[d + 2], where);
        const long batch = parse_long(fields[d + 3], where);
        if (c < 0) throw DataError(where + ": negative class id");
        auto ensure = [&](std::vector<std::vector<GeneratedNeighbor>>& v) -> std::vector<GeneratedNeighbor>& {
            if (v.size() <= static_cast<std::size_t>(c)) v.resize(c + 1);
            return v[c];
        };
        if (kind == "orig") {
            originals.samples.push_back(std::move(x));
            originals.labels.push_back(c);
        } else if (kind == "pos") {
            ensure(positives).push_back({std::move(x), static_cast<std::size_t>(seed_index),
                                         static_cast<std::size_t>(batch)});
        } else if (kind == "neg") {
            ensure(negatives).push_back({std::move(x), static_cast<std::size_t>(seed_index),
                                         static_cast<std::size_t>(batch)});
        } else {
            throw DataError(where + ": unknown kind '" + std::string(kind) + "'");
        }
    }
    return AugmentedDataset::from_parts(std::move(originals), std::move(positives),
                                        std::move(negatives));
}

} // namespace coin
