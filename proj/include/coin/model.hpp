#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>

#include <json.hpp>

#include "coin/augment.hpp"
#include "coin/graph.hpp"

namespace coin {

struct TrainConfig {
    double lambda = 1.0;              // graph regularization weight
    double margin = 0.1;              // applies to squared Euclidean latent distance
    std::size_t epochs = 30;
    std::size_t batch_size = 200;
    double eta0 = 0.05;
    double momentum = 0.9;
    std::size_t lr_halving_period = 100;  // learning rate halves every this many epochs
    std::uint64_t seed = 0;
};

/// Feed-forward embedding network: a ReLU stack ending in the latent layer
/// h(x), followed by a linear softmax head. The latent activation is the
/// layer directly behind the softmax and is what the graph loss acts on.
class EmbeddingNetwork {
public:
    EmbeddingNetwork() = default;

    EmbeddingNetwork(std::size_t input_dim, std::vector<std::size_t> hidden_widths,
                     std::size_t latent_dim, std::size_t num_classes, std::uint64_t seed)
        : classes_(num_classes) {
        if (input_dim == 0 || latent_dim == 0 || num_classes < 2) {
            throw std::invalid_argument("EmbeddingNetwork: invalid layer widths");
        }
        widths_.push_back(input_dim);
        for (std::size_t w : hidden_widths) {
            if (w == 0) throw std::invalid_argument("EmbeddingNetwork: zero-width hidden layer");
            widths_.push_back(w);
        }
        widths_.push_back(latent_dim);

        std::mt19937_64 rng(seed);
        for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
            init_layer(widths_[l + 1], widths_[l], rng);
        }
        init_layer(classes_, latent_dim, rng);
    }

    std::size_t input_dim() const { return widths_.front(); }
    std::size_t latent_dim() const { return widths_.back(); }
    std::size_t num_classes() const { return classes_; }
    const std::vector<std::size_t>& relu_widths() const { return widths_; }

    struct Output {
        FeatureVector latent;
        FeatureVector probs;
    };

    Output forward(const FeatureVector& x) const {
        Cache cache = forward_cached(x);
        return {std::move(cache.acts.back()), std::move(cache.probs)};
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l < w_.size(); ++l) n += w_[l].size() + b_[l].size();
        return n;
    }

    std::vector<double> parameters() const {
        std::vector<double> flat;
        flat.reserve(parameter_count());
        for (std::size_t l = 0; l < w_.size(); ++l) {
            flat.insert(flat.end(), w_[l].begin(), w_[l].end());
            flat.insert(flat.end(), b_[l].begin(), b_[l].end());
        }
        return flat;
    }

    void set_parameters(std::span<const double> flat) {
        if (flat.size() != parameter_count()) {
            throw std::invalid_argument("EmbeddingNetwork: parameter vector size mismatch");
        }
        std::size_t pos = 0;
        for (std::size_t l = 0; l < w_.size(); ++l) {
            std::copy_n(flat.begin() + pos, w_[l].size(), w_[l].begin());
            pos += w_[l].size();
            std::copy_n(flat.begin() + pos, b_[l].size(), b_[l].begin());
            pos += b_[l].size();
        }
    }

    // --- internals shared with the gradient code ---

    struct Cache {
        std::vector<FeatureVector> acts;  // acts[0] = x, acts.back() = latent h
        std::vector<FeatureVector> pre;   // pre-activations of the ReLU layers
        FeatureVector logits;
        FeatureVector probs;
    };

    Cache forward_cached(const FeatureVector& x) const {
        if (x.size() != widths_.front()) {
            throw std::invalid_argument("EmbeddingNetwork: input dimension " +
                                        std::to_string(x.size()) + ", expected " +
                                        std::to_string(widths_.front()));
        }
        Cache cache;
        cache.acts.push_back(x);
        const std::size_t relu_layers = widths_.size() - 1;
        for (std::size_t l = 0; l < relu_layers; ++l) {
            FeatureVector z = affine(l, cache.acts.back());
            FeatureVector a(z.size());
            for (std::size_t r = 0; r < z.size(); ++r) a[r] = z[r] > 0.0 ? z[r] : 0.0;
            cache.pre.push_back(std::move(z));
            cache.acts.push_back(std::move(a));
        }
        cache.logits = affine(relu_layers, cache.acts.back());
        cache.probs = softmax(cache.logits);
        return cache;
    }

    std::size_t layer_count() const { return w_.size(); }
    std::size_t layer_rows(std::size_t l) const { return b_[l].size(); }
    std::size_t layer_cols(std::size_t l) const { return w_[l].size() / b_[l].size(); }
    const std::vector<double>& layer_weights(std::size_t l) const { return w_[l]; }

    static FeatureVector softmax(const FeatureVector& logits) {
        double maxv = logits.front();
        for (double v : logits) maxv = std::max(maxv, v);
        FeatureVector p(logits.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < logits.size(); ++i) {
            p[i] = std::exp(logits[i] - maxv);
            sum += p[i];
        }
        for (double& v : p) v /= sum;
        return p;
    }

private:
    void init_layer(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
        const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
        std::uniform_real_distribution<double> uniform(-limit, limit);
        std::vector<double> w(rows * cols);
        for (double& v : w) v = uniform(rng);
        w_.push_back(std::move(w));
        b_.emplace_back(rows, 0.0);
    }

    FeatureVector affine(std::size_t l, const FeatureVector& a) const {
        const std::size_t rows = b_[l].size();
        const std::size_t cols = a.size();
        FeatureVector z(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            double s = b_[l][r];
            const double* row = w_[l].data() + r * cols;
            for (std::size_t c = 0; c < cols; ++c) s += row[c] * a[c];
            z[r] = s;
        }
        return z;
    }

    std::vector<std::size_t> widths_;      // input, hidden..., latent
    std::size_t classes_ = 0;
    std::vector<std::vector<double>> w_;   // row-major, ReLU layers then head
    std::vector<FeatureVector> b_;
};

inline constexpr double kProbFloor = 1e-12;

/// Signed-graph contrastive loss over latent vectors indexed like the graph
/// nodes: attracting edges add the squared Euclidean distance, repelling
/// edges add max(0, m - distance); the sum is divided by the edge count.
inline double graph_loss(const std::vector<FeatureVector>& latents, const SignedGraph& graph,
                         double margin) {
    if (latents.size() != graph.node_count()) {
        throw std::invalid_argument("graph_loss: latent count does not match graph nodes");
    }
    if (graph.edge_count() == 0) return 0.0;
    double sum = 0.0;
    for (const auto& e : graph.edges()) {
        const double d2 = squared_distance(latents[e.anchor], latents[e.neighbor]);
        sum += e.sign > 0 ? d2 : std::max(0.0, margin - d2);
    }
    return sum / static_cast<double>(graph.edge_count());
}

/// Mean cross-entropy -log p[y] over the given items. Probabilities are
/// floored at 1e-12 before the log.
inline double classification_loss(const std::vector<FeatureVector>& probs,
                                  const std::vector<int>& labels) {
    if (probs.empty()) throw std::invalid_argument("classification_loss: empty batch");
    if (probs.size() != labels.size()) {
        throw std::invalid_argument("classification_loss: probs/labels length mismatch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const auto y = static_cast<std::size_t>(labels[i]);
        if (labels[i] < 0 || y >= probs[i].size()) {
            throw std::out_of_range("classification_loss: label out of range at item " +
                                    std::to_string(i));
        }
        sum += -std::log(std::max(probs[i][y], kProbFloor));
    }
    return sum / static_cast<double>(probs.size());
}

inline double total_loss(double j_l, double j_g, double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("total_loss: lambda must be >= 0");
    return j_l + lambda * j_g;
}

namespace detail {

/// Loss gradient wrt the latent vectors and logits of a batch, shared
/// between the analytic gradient and nothing else; the finite-difference
/// oracle in the tests goes through the public loss functions instead.
struct BatchContext {
    std::vector<std::size_t> nodes;            // sorted ascending
    std::vector<EmbeddingNetwork::Cache> caches;
    std::size_t labeled_count = 0;
    std::size_t contributing_edges = 0;
};

} // namespace detail

/// Analytic gradient of J = J_l + lambda * J_g restricted to a batch of node
/// indices: the cross-entropy term runs over the batch's labeled members
/// (originals and positive neighbors), and a graph edge contributes only when
/// both endpoints are in the batch. Accumulation order is fixed by ascending
/// node index.
inline std::vector<double> gradients(const EmbeddingNetwork& net,
                                     const std::vector<std::size_t>& batch,
                                     const AugmentedDataset& aug, const SignedGraph& graph,
                                     const TrainConfig& config) {
    if (batch.empty()) throw std::invalid_argument("gradients: empty batch");
    if (graph.node_count() != aug.node_count()) {
        throw std::invalid_argument("gradients: graph/dataset node count mismatch");
    }

    detail::BatchContext ctx;
    ctx.nodes = batch;
    std::sort(ctx.nodes.begin(), ctx.nodes.end());
    if (std::adjacent_find(ctx.nodes.begin(), ctx.nodes.end()) != ctx.nodes.end()) {
        throw std::invalid_argument("gradients: duplicate node in batch");
    }

    std::vector<long> slot_of(aug.node_count(), -1);
    for (std::size_t s = 0; s < ctx.nodes.size(); ++s) {
        const std::size_t i = ctx.nodes[s];
        if (i >= aug.node_count()) throw std::out_of_range("gradients: node index out of range");
        slot_of[i] = static_cast<long>(s);
        if (aug.node(i).kind != PointKind::negative) ++ctx.labeled_count;
    }
    ctx.caches.reserve(ctx.nodes.size());
    for (std::size_t i : ctx.nodes) ctx.caches.push_back(net.forward_cached(aug.point(i)));

    for (const auto& e : graph.edges()) {
        if (slot_of[e.anchor] >= 0 && slot_of[e.neighbor] >= 0) ++ctx.contributing_edges;
    }

    const std::size_t latent = net.latent_dim();
    std::vector<FeatureVector> d_latent(ctx.nodes.size(), FeatureVector(latent, 0.0));
    if (ctx.contributing_edges > 0) {
        const double edge_w = config.lambda / static_cast<double>(ctx.contributing_edges);
        for (const auto& e : graph.edges()) {
            const long si = slot_of[e.anchor];
            const long sj = slot_of[e.neighbor];
            if (si < 0 || sj < 0) continue;
            const FeatureVector& hi = ctx.caches[si].acts.back();
            const FeatureVector& hj = ctx.caches[sj].acts.back();
            double coeff;
            if (e.sign > 0) {
                coeff = 2.0 * edge_w;
            } else {
                const double d2 = squared_distance(hi, hj);
                if (d2 >= config.margin) continue;  // hinge inactive
                coeff = -2.0 * edge_w;
            }
            for (std::size_t k = 0; k < latent; ++k) {
                const double g = coeff * (hi[k] - hj[k]);
                d_latent[si][k] += g;
                d_latent[sj][k] -= g;
            }
        }
    }

    // backpropagate per sample, head first, then down the ReLU stack
    std::vector<double> grad(net.parameter_count(), 0.0);
    const std::size_t head = net.layer_count() - 1;
    std::vector<std::size_t> layer_offset(net.layer_count());
    {
        std::size_t pos = 0;
        for (std::size_t l = 0; l < net.layer_count(); ++l) {
            layer_offset[l] = pos;
            pos += net.layer_rows(l) * net.layer_cols(l) + net.layer_rows(l);
        }
    }

    for (std::size_t s = 0; s < ctx.nodes.size(); ++s) {
        const auto& cache = ctx.caches[s];
        const bool labeled = aug.node(ctx.nodes[s]).kind != PointKind::negative;

        FeatureVector d_logits(net.num_classes(), 0.0);
        if (labeled && ctx.labeled_count > 0) {
            const auto y = static_cast<std::size_t>(aug.node(ctx.nodes[s]).class_id);
            const double inv = 1.0 / static_cast<double>(ctx.labeled_count);
            for (std::size_t r = 0; r < d_logits.size(); ++r) {
                d_logits[r] = (cache.probs[r] - (r == y ? 1.0 : 0.0)) * inv;
            }
        }

        // head layer
        const FeatureVector& h = cache.acts.back();
        {
            double* gw = grad.data() + layer_offset[head];
            double* gb = gw + net.layer_rows(head) * net.layer_cols(head);
            for (std::size_t r = 0; r < net.layer_rows(head); ++r) {
                for (std::size_t c = 0; c < latent; ++c) gw[r * latent + c] += d_logits[r] * h[c];
                gb[r] += d_logits[r];
            }
        }
        FeatureVector d_act = d_latent[s];
        {
            const auto& w = net.layer_weights(head);
            for (std::size_t r = 0; r < net.layer_rows(head); ++r) {
                for (std::size_t c = 0; c < latent; ++c) d_act[c] += w[r * latent + c] * d_logits[r];
            }
        }

        for (std::size_t l = head; l-- > 0;) {
            const std::size_t rows = net.layer_rows(l);
            const std::size_t cols = net.layer_cols(l);
            FeatureVector dz(rows);
            for (std::size_t r = 0; r < rows; ++r) {
                dz[r] = cache.pre[l][r] > 0.0 ? d_act[r] : 0.0;
            }
            double* gw = grad.data() + layer_offset[l];
            double* gb = gw + rows * cols;
            const FeatureVector& below = cache.acts[l];
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t c = 0; c < cols; ++c) gw[r * cols + c] += dz[r] * below[c];
                gb[r] += dz[r];
            }
            if (l > 0) {
                const auto& w = net.layer_weights(l);
                FeatureVector next(cols, 0.0);
                for (std::size_t r = 0; r < rows; ++r) {
                    for (std::size_t c = 0; c < cols; ++c) next[c] += w[r * cols + c] * dz[r];
                }
                d_act = std::move(next);
            }
        }
    }
    return grad;
}

struct EpochLosses {
    double j_l = 0.0;
    double j_g = 0.0;
    double j = 0.0;
};

/// Full-dataset losses at the current parameters: J_l over every labeled node
/// (originals and positives), J_g over all graph edges.
inline EpochLosses evaluate_losses(const EmbeddingNetwork& net, const AugmentedDataset& aug,
                                   const SignedGraph& graph, const TrainConfig& config) {
    std::vector<FeatureVector> latents(aug.node_count());
    std::vector<FeatureVector> labeled_probs;
    std::vector<int> labeled_targets;
    for (std::size_t i = 0; i < aug.node_count(); ++i) {
        auto out = net.forward(aug.point(i));
        latents[i] = std::move(out.latent);
        if (aug.node(i).kind != PointKind::negative) {
            labeled_probs.push_back(std::move(out.probs));
            labeled_targets.push_back(aug.node(i).class_id);
        }
    }
    EpochLosses losses;
    losses.j_l = classification_loss(labeled_probs, labeled_targets);
    losses.j_g = graph_loss(latents, graph, config.margin);
    losses.j = total_loss(losses.j_l, losses.j_g, config.lambda);
    return losses;
}

struct TrainedModel {
    EmbeddingNetwork net;
    std::vector<EpochLosses> history;  // one entry per epoch
    TrainConfig config;
};

/// Mini-batch gradient descent with momentum over anchor blocks: each batch
/// is assembled from whole blocks (an anchor plus its graph neighbors) so
/// that every anchor's edges contribute each epoch even at small batch
/// sizes. Deterministic for a fixed seed.
inline TrainedModel train(EmbeddingNetwork net, const AugmentedDataset& aug,
                          const SignedGraph& graph, const TrainConfig& config) {
    if (graph.node_count() != aug.node_count()) {
        throw std::invalid_argument("train: graph was not built over this dataset");
    }
    if (!(config.lambda >= 0.0) || !(config.margin > 0.0)) {
        throw std::invalid_argument("train: require lambda >= 0 and margin > 0");
    }
    if (config.batch_size == 0) throw std::invalid_argument("train: batch_size must be >= 1");

    std::vector<std::size_t> anchors;
    for (std::size_t i = 0; i < aug.node_count(); ++i) {
        if (graph.is_anchor(i)) anchors.push_back(i);
    }

    TrainedModel model{std::move(net), {}, config};
    std::vector<double> theta = model.net.parameters();
    std::vector<double> velocity(theta.size(), 0.0);
    std::mt19937_64 rng(config.seed);
    std::vector<char> in_batch(aug.node_count(), 0);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto halvings = (epoch - 1) / std::max<std::size_t>(config.lr_halving_period, 1);
        const double eta = config.eta0 * std::pow(0.5, static_cast<double>(halvings));

        std::shuffle(anchors.begin(), anchors.end(), rng);

        std::vector<std::size_t> batch;
        auto flush = [&]() {
            if (batch.empty()) return;
            const std::vector<double> g = gradients(model.net, batch, aug, graph, config);
            for (std::size_t k = 0; k < theta.size(); ++k) {
                velocity[k] = config.momentum * velocity[k] - eta * g[k];
                theta[k] += velocity[k];
            }
            model.net.set_parameters(theta);
            for (std::size_t i : batch) in_batch[i] = 0;
            batch.clear();
        };

        for (std::size_t a : anchors) {
            std::vector<std::size_t> block;
            if (!in_batch[a]) block.push_back(a);
            for (const auto& e : graph.neighbors_of(a)) {
                if (!in_batch[e.neighbor] &&
                    std::find(block.begin(), block.end(), e.neighbor) == block.end()) {
                    block.push_back(e.neighbor);
                }
            }
            if (!batch.empty() && batch.size() + block.size() > config.batch_size) flush();
            for (std::size_t i : block) {
                if (!in_batch[i]) {
                    in_batch[i] = 1;
                    batch.push_back(i);
                }
            }
        }
        flush();

        EpochLosses losses = evaluate_losses(model.net, aug, graph, config);
        if (!std::isfinite(losses.j)) {
            throw DivergenceError("train: objective diverged at epoch " + std::to_string(epoch) +
                                  " (J_l=" + format_double(losses.j_l) +
                                  ", J_g=" + format_double(losses.j_g) + ")");
        }
        model.history.push_back(losses);
    }
    return model;
}

struct Prediction {
    int class_id;
    FeatureVector probs;
};

/// Argmax of the class probabilities; exact ties resolve to the lower id.
inline Prediction predict(const EmbeddingNetwork& net, const FeatureVector& x) {
    FeatureVector probs = net.forward(x).probs;
    std::size_t best = 0;
    for (std::size_t c = 1; c < probs.size(); ++c) {
        if (probs[c] > probs[best]) best = c;
    }
    return {static_cast<int>(best), std::move(probs)};
}

/// Checkpoint JSON: layer shapes plus the flat parameter vector at full
/// precision.
inline void save_checkpoint(const EmbeddingNetwork& net, const std::filesystem::path& path) {
    nlohmann::json j;
    const auto& widths = net.relu_widths();
    j["input_dim"] = widths.front();
    j["hidden"] = std::vector<std::size_t>(widths.begin() + 1, widths.end() - 1);
    j["latent"] = widths.back();
    j["classes"] = net.num_classes();
    j["params"] = net.parameters();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_checkpoint: cannot open " + path.string());
    out << j.dump(2) << '\n';
}

inline EmbeddingNetwork load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_checkpoint: cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
        EmbeddingNetwork net(j.at("input_dim").get<std::size_t>(),
                             j.at("hidden").get<std::vector<std::size_t>>(),
                             j.at("latent").get<std::size_t>(), j.at("classes").get<std::size_t>(),
                             0);
        net.set_parameters(j.at("params").get<std::vector<double>>());
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("load_checkpoint: " + path.string() + ": " + e.what());
    }
}

/// History CSV: epoch,J_l,J_g,J with epochs numbered from 1.
inline void save_history(const std::vector<EpochLosses>& history,
                         const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_history: cannot open " + path.string());
    out << "epoch,J_l,J_g,J\n";
    for (std::size_t e = 0; e < history.size(); ++e) {
        out << (e + 1) << ',' << format_double(history[e].j_l) << ','
            << format_double(history[e].j_g) << ',' << format_double(history[e].j) << '\n';
    }
    if (!out) throw DataError("save_history: write failed for " + path.string());
}

} // namespace coin
