#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <span>

#include "coin/augment.hpp"

namespace coin {

struct SignedEdge {
    std::size_t anchor;
    std::size_t neighbor;
    int sign;  // +1 attract, -1 repel
};

/// Static signed k-NN graph over an expanded dataset, built once in input
/// space. Anchors are the originals and generated positives; generated
/// negatives appear only as repulsion targets. For an anchor of class c the
/// positive pool is the same-class originals and positives (minus itself) and
/// the negative pool is the other-class originals and positives plus the
/// own-class negatives. Neighbors are the nearest by cosine distance, ties
/// broken toward the lower node index.
class SignedGraph {
public:
    SignedGraph() = default;

    static SignedGraph build(const AugmentedDataset& aug, std::size_t n_pos, std::size_t n_neg) {
        const std::size_t n = aug.node_count();
        SignedGraph g;
        g.node_count_ = n;
        g.n_pos_ = n_pos;
        g.n_neg_ = n_neg;
        g.is_anchor_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            g.is_anchor_[i] = aug.node(i).kind != PointKind::negative;
        }

        // pool membership per node, computed once
        std::vector<std::size_t> manifold_nodes;  // originals + positives, all classes
        for (std::size_t i = 0; i < n; ++i) {
            if (g.is_anchor_[i]) manifold_nodes.push_back(i);
        }

        using Entry = std::pair<double, std::size_t>;  // (distance, node index)
        std::vector<Entry> pool;
        auto select_nearest = [&](std::size_t k, std::vector<Entry>& candidates) {
            const std::size_t take = std::min(k, candidates.size());
            if (take < candidates.size()) {
                std::nth_element(candidates.begin(), candidates.begin() + take, candidates.end());
            }
            std::sort(candidates.begin(), candidates.begin() + take);
            candidates.resize(take);
        };

        g.offsets_.assign(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) {
            g.offsets_[i] = g.edges_.size();
            if (!g.is_anchor_[i]) continue;
            const int c = aug.node(i).class_id;

            if (n_pos > 0) {
                pool.clear();
                for (std::size_t j : manifold_nodes) {
                    if (j == i || aug.node(j).class_id != c) continue;
                    pool.emplace_back(cosine_distance(aug.point(i), aug.point(j)), j);
                }
                if (pool.empty()) {
                    throw std::invalid_argument("SignedGraph: empty positive pool for node " +
                                                std::to_string(i));
                }
                select_nearest(n_pos, pool);
                for (const auto& [d, j] : pool) g.edges_.push_back({i, j, +1});
            }
            if (n_neg > 0) {
                pool.clear();
                for (std::size_t j = 0; j < n; ++j) {
                    const auto& nd = aug.node(j);
                    const bool other_manifold = g.is_anchor_[j] && nd.class_id != c;
                    const bool own_negative = nd.kind == PointKind::negative && nd.class_id == c;
                    if (!other_manifold && !own_negative) continue;
                    pool.emplace_back(cosine_distance(aug.point(i), aug.point(j)), j);
                }
                if (pool.empty()) {
                    throw std::invalid_argument("SignedGraph: empty negative pool for node " +
                                                std::to_string(i));
                }
                select_nearest(n_neg, pool);
                for (const auto& [d, j] : pool) g.edges_.push_back({i, j, -1});
            }
        }
        g.offsets_[n] = g.edges_.size();
        return g;
    }

    /// Reassembles a graph from a persisted or synthetic edge list. Edges
    /// must be grouped by anchor in ascending order (the stored format).
    static SignedGraph from_edges(std::size_t node_count, std::vector<char> is_anchor,
                                  std::vector<SignedEdge> edges, std::size_t n_pos,
                                  std::size_t n_neg) {
        if (is_anchor.size() != node_count) {
            throw std::invalid_argument("SignedGraph: anchor flags size mismatch");
        }
        SignedGraph g;
        g.node_count_ = node_count;
        g.n_pos_ = n_pos;
        g.n_neg_ = n_neg;
        g.is_anchor_ = std::move(is_anchor);
        std::stable_sort(edges.begin(), edges.end(),
                         [](const SignedEdge& a, const SignedEdge& b) { return a.anchor < b.anchor; });
        for (const auto& e : edges) {
            if (e.anchor >= node_count || e.neighbor >= node_count) {
                throw DataError("SignedGraph: edge index out of range");
            }
            if (e.anchor == e.neighbor) throw DataError("SignedGraph: self-edge");
            if (e.sign != 1 && e.sign != -1) throw DataError("SignedGraph: sign must be +1 or -1");
            if (!g.is_anchor_[e.anchor]) throw DataError("SignedGraph: edge anchored at a non-anchor node");
        }
        g.edges_ = std::move(edges);
        g.offsets_.assign(node_count + 1, 0);
        std::size_t pos = 0;
        for (std::size_t i = 0; i < node_count; ++i) {
            g.offsets_[i] = pos;
            while (pos < g.edges_.size() && g.edges_[pos].anchor == i) ++pos;
        }
        g.offsets_[node_count] = pos;
        return g;
    }

    std::size_t node_count() const { return node_count_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<SignedEdge>& edges() const { return edges_; }
    std::size_t requested_positive() const { return n_pos_; }
    std::size_t requested_negative() const { return n_neg_; }

    bool is_anchor(std::size_t i) const {
        if (i >= node_count_) throw std::out_of_range("SignedGraph: node index out of range");
        return is_anchor_[i] != 0;
    }

    /// The anchor's edges in stored order (positives by distance, then
    /// negatives by distance).
    std::span<const SignedEdge> neighbors_of(std::size_t i) const {
        if (i >= node_count_) throw std::out_of_range("SignedGraph: node index out of range");
        if (!is_anchor_[i]) {
            throw std::invalid_argument("SignedGraph: node " + std::to_string(i) + " is not an anchor");
        }
        return {edges_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }

private:
    std::size_t node_count_ = 0;
    std::size_t n_pos_ = 0;
    std::size_t n_neg_ = 0;
    std::vector<SignedEdge> edges_;       // grouped by anchor
    std::vector<std::size_t> offsets_;    // CSR offsets into edges_
    std::vector<char> is_anchor_;
};

/// CSV edge list `i,j,sign`.
inline void save_graph(const SignedGraph& graph, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_graph: cannot open " + path.string());
    out << "i,j,sign\n";
    for (const auto& e : graph.edges()) {
        out << e.anchor << ',' << e.neighbor << ',' << (e.sign > 0 ? "1" : "-1") << '\n';
    }
    if (!out) throw DataError("save_graph: write failed for " + path.string());
}

/// Loads an edge list back over a known expanded dataset, which supplies the
/// node count and anchor flags the CSV does not carry.
inline SignedGraph load_graph(const std::filesystem::path& path, const AugmentedDataset& aug,
                              std::size_t n_pos, std::size_t n_neg) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_graph: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "i,j,sign") {
        throw DataError(path.string() + ":1: expected header i,j,sign");
    }
    std::vector<SignedEdge> edges;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        const std::string where = path.string() + ":" + std::to_string(row);
        if (fields.size() != 3) throw DataError(where + ": expected 3 fields");
        edges.push_back({static_cast<std::size_t>(parse_long(fields[0], where)),
                         static_cast<std::size_t>(parse_long(fields[1], where)),
                         static_cast<int>(parse_long(fields[2], where))});
    }
    std::vector<char> is_anchor(aug.node_count());
    for (std::size_t i = 0; i < aug.node_count(); ++i) {
        is_anchor[i] = aug.node(i).kind != PointKind::negative;
    }
    return SignedGraph::from_edges(aug.node_count(), std::move(is_anchor), std::move(edges), n_pos,
                                   n_neg);
}

} // namespace coin
