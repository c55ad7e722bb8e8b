#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "coin/core.hpp"

namespace coin {

inline double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.empty()) throw std::invalid_argument("accuracy: empty input");
    if (predictions.size() != labels.size()) {
        throw std::invalid_argument("accuracy: predictions/labels length mismatch");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

/// Rank-based AUC: the probability that a random class-1 score exceeds a
/// random class-0 score, ties counted half. Computed from midranks, which is
/// the Mann-Whitney U statistic scaled to [0,1].
inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("auc: scores/labels length mismatch");
    }
    std::size_t n_pos = 0, n_neg = 0;
    for (int y : labels) {
        if (y == 1) ++n_pos;
        else if (y == 0) ++n_neg;
        else throw std::invalid_argument("auc: labels must be 0 or 1");
    }
    if (n_pos == 0 || n_neg == 0) {
        throw std::invalid_argument("auc: both classes must be present");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) rank_sum_pos += midrank;
        }
        i = j;
    }
    const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

/// Mean pairwise Euclidean distances within and across classes, and their
/// ratio. A larger ratio means better-separated latent classes. Collapsed
/// classes (zero intra distance) are flagged instead of dividing by zero.
struct MarginStats {
    double intra_mean = 0.0;
    double inter_mean = 0.0;
    double margin_ratio = 0.0;
    bool degenerate = false;
};

inline MarginStats margin_stats(const std::vector<FeatureVector>& latents,
                                const std::vector<int>& labels) {
    if (latents.size() != labels.size()) {
        throw std::invalid_argument("margin_stats: latents/labels length mismatch");
    }
    int classes = 0;
    for (int y : labels) classes = std::max(classes, y + 1);
    for (int c = 0; c < classes; ++c) {
        if (std::count(labels.begin(), labels.end(), c) < 2) {
            throw std::invalid_argument("margin_stats: class " + std::to_string(c) +
                                        " needs at least 2 samples");
        }
    }
    // distances are summed in sorted order, so the stats are exactly
    // invariant under sample permutations
    std::vector<double> intra, inter;
    for (std::size_t i = 0; i < latents.size(); ++i) {
        for (std::size_t j = i + 1; j < latents.size(); ++j) {
            const double d = std::sqrt(squared_distance(latents[i], latents[j]));
            (labels[i] == labels[j] ? intra : inter).push_back(d);
        }
    }
    std::sort(intra.begin(), intra.end());
    std::sort(inter.begin(), inter.end());
    auto mean = [](const std::vector<double>& v) {
        if (v.empty()) return 0.0;
        double s = 0.0;
        for (double d : v) s += d;
        return s / static_cast<double>(v.size());
    };
    MarginStats stats;
    stats.intra_mean = mean(intra);
    stats.inter_mean = mean(inter);
    if (stats.intra_mean > 0.0) {
        stats.margin_ratio = stats.inter_mean / stats.intra_mean;
    } else {
        stats.degenerate = true;
    }
    return stats;
}

namespace detail {

/// Cyclic Jacobi eigendecomposition of a symmetric matrix (row-major n x n).
/// Returns eigenvalues and matching eigenvectors (columns), unsorted.
inline void jacobi_eigen_symmetric(std::vector<double> a, std::size_t n,
                                   std::vector<double>& eigenvalues,
                                   std::vector<double>& eigenvectors) {
    eigenvectors.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) eigenvectors[i * n + i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        }
        if (off < 1e-300) break;
        double diag = 0.0;
        for (std::size_t p = 0; p < n; ++p) diag += a[p * n + p] * a[p * n + p];
        if (off <= 1e-30 * std::max(diag, 1e-300)) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = eigenvectors[k * n + p];
                    const double vkq = eigenvectors[k * n + q];
                    eigenvectors[k * n + p] = c * vkp - s * vkq;
                    eigenvectors[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = a[i * n + i];
}

} // namespace detail

/// Projection onto the top-k principal components of the centered inputs.
/// Component signs are fixed by making each component's largest-magnitude
/// coordinate positive. Rank-deficient inputs yield fewer live components;
/// the remaining coordinates are zero and the deficiency is reported.
struct PcaProjection {
    std::vector<FeatureVector> coords;  // n x k, zero-filled beyond the live components
    std::size_t components_used = 0;
    bool rank_deficient = false;
};

inline PcaProjection pca_project(const std::vector<FeatureVector>& latents, std::size_t k = 2) {
    if (k == 0) throw std::invalid_argument("pca_project: k must be >= 1");
    if (latents.size() < k) throw std::invalid_argument("pca_project: need at least k samples");
    const std::size_t d = latents.front().size();
    if (d < k) throw std::invalid_argument("pca_project: latent dimension below k");
    for (const auto& x : latents) {
        if (x.size() != d) throw std::invalid_argument("pca_project: inconsistent dimensions");
    }

    const auto n = static_cast<double>(latents.size());
    FeatureVector mean(d, 0.0);
    for (const auto& x : latents) {
        for (std::size_t j = 0; j < d; ++j) mean[j] += x[j];
    }
    for (double& m : mean) m /= n;

    std::vector<double> cov(d * d, 0.0);
    for (const auto& x : latents) {
        for (std::size_t p = 0; p < d; ++p) {
            const double cp = x[p] - mean[p];
            for (std::size_t q = p; q < d; ++q) cov[p * d + q] += cp * (x[q] - mean[q]);
        }
    }
    const double denom = std::max(n - 1.0, 1.0);
    for (std::size_t p = 0; p < d; ++p) {
        for (std::size_t q = p; q < d; ++q) {
            cov[p * d + q] /= denom;
            cov[q * d + p] = cov[p * d + q];
        }
    }

    std::vector<double> values, vectors;
    detail::jacobi_eigen_symmetric(cov, d, values, vectors);

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

    const double top = std::max(values[order[0]], 0.0);
    const double tol = top * 1e-12;

    PcaProjection proj;
    proj.coords.assign(latents.size(), FeatureVector(k, 0.0));
    for (std::size_t comp = 0; comp < k; ++comp) {
        if (values[order[comp]] <= tol) break;
        FeatureVector v(d);
        for (std::size_t j = 0; j < d; ++j) v[j] = vectors[j * d + order[comp]];
        std::size_t arg = 0;
        for (std::size_t j = 1; j < d; ++j) {
            if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
        }
        if (v[arg] < 0.0) {
            for (double& x : v) x = -x;
        }
        for (std::size_t i = 0; i < latents.size(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += (latents[i][j] - mean[j]) * v[j];
            proj.coords[i][comp] = s;
        }
        ++proj.components_used;
    }
    proj.rank_deficient = proj.components_used < k;
    return proj;
}

struct MetricsReport {
    double accuracy = 0.0;
    double auc = 0.0;
    double intra_mean = 0.0;
    double inter_mean = 0.0;
    double margin_ratio = 0.0;
    bool margin_degenerate = false;
    std::size_t n_test = 0;
    nlohmann::json config_snapshot;

    nlohmann::json to_json() const {
        return nlohmann::json{{"accuracy", accuracy},
                              {"auc", auc},
                              {"intra_mean", intra_mean},
                              {"inter_mean", inter_mean},
                              {"margin_ratio", margin_ratio},
                              {"margin_degenerate", margin_degenerate},
                              {"n_test", n_test},
                              {"config", config_snapshot}};
    }
};

inline void save_metrics(const MetricsReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_metrics: cannot open " + path.string());
    out << report.to_json().dump(2) << '\n';
}

/// Projection CSV: x,y,label,kind rows, kind naming the population a point
/// came from (orig/pos/neg for expanded training nodes, test for held-out
/// points).
inline void save_projection(const std::vector<FeatureVector>& coords,
                            const std::vector<int>& labels, const std::vector<std::string>& kinds,
                            const std::filesystem::path& path) {
    if (coords.size() != labels.size() || coords.size() != kinds.size()) {
        throw std::invalid_argument("save_projection: length mismatch");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_projection: cannot open " + path.string());
    out << "x,y,label,kind\n";
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const double x = coords[i].empty() ? 0.0 : coords[i][0];
        const double y = coords[i].size() > 1 ? coords[i][1] : 0.0;
        out << format_double(x) << ',' << format_double(y) << ',' << labels[i] << ',' << kinds[i]
            << '\n';
    }
    if (!out) throw DataError("save_projection: write failed for " + path.string());
}

} // namespace coin
