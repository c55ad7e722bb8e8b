#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "coin/graph.hpp"

using namespace coin;

namespace {

// Random augmented dataset on a small integer lattice so exact distance ties
// actually occur and the tie-break rule is exercised.
AugmentedDataset random_lattice_aug(std::mt19937_64& rng, std::size_t d, std::size_t orig_per_class,
                                    std::size_t pos_per_class, std::size_t neg_per_class) {
    std::uniform_int_distribution<int> coord(-2, 2);
    auto draw = [&]() {
        FeatureVector x(d);
        bool nonzero = false;
        for (auto& v : x) {
            v = coord(rng);
            if (v != 0.0) nonzero = true;
        }
        if (!nonzero) x[0] = 1.0;
        return x;
    };

    LabeledDataset originals;
    originals.name = "lattice";
    for (int c = 0; c < 2; ++c) {
        for (std::size_t i = 0; i < orig_per_class; ++i) {
            originals.samples.push_back(draw());
            originals.labels.push_back(c);
        }
    }
    std::vector<std::vector<GeneratedNeighbor>> pos(2), neg(2);
    for (int c = 0; c < 2; ++c) {
        for (std::size_t i = 0; i < pos_per_class; ++i) pos[c].push_back({draw(), 0, i});
        for (std::size_t i = 0; i < neg_per_class; ++i) neg[c].push_back({draw(), 0, i});
    }
    return AugmentedDataset::from_parts(std::move(originals), std::move(pos), std::move(neg));
}

// O(N^2) reference: full sort of each anchor's pools by (distance, index).
std::vector<SignedEdge> brute_force_edges(const AugmentedDataset& aug, std::size_t n_pos,
                                          std::size_t n_neg) {
    const std::size_t n = aug.node_count();
    auto cosine = [&](std::size_t a, std::size_t b) {
        const auto& x = aug.point(a);
        const auto& y = aug.point(b);
        if (x == y) return 0.0;
        double num = 0.0, nx = 0.0, ny = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            num += x[k] * y[k];
            nx += x[k] * x[k];
            ny += y[k] * y[k];
        }
        double c = num / std::sqrt(nx * ny);
        c = std::min(1.0, std::max(-1.0, c));
        return 1.0 - c;
    };
    std::vector<SignedEdge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        if (aug.node(i).kind == PointKind::negative) continue;
        const int c = aug.node(i).class_id;
        std::vector<std::pair<double, std::size_t>> pool;
        if (n_pos > 0) {
            pool.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                if (aug.node(j).kind == PointKind::negative) continue;
                if (aug.node(j).class_id != c) continue;
                pool.emplace_back(cosine(i, j), j);
            }
            std::sort(pool.begin(), pool.end());
            for (std::size_t k = 0; k < std::min(n_pos, pool.size()); ++k) {
                edges.push_back({i, pool[k].second, +1});
            }
        }
        if (n_neg > 0) {
            pool.clear();
            for (std::size_t j = 0; j < n; ++j) {
                const auto& nd = aug.node(j);
                const bool other_manifold = nd.kind != PointKind::negative && nd.class_id != c;
                const bool own_negative = nd.kind == PointKind::negative && nd.class_id == c;
                if (!other_manifold && !own_negative) continue;
                pool.emplace_back(cosine(i, j), j);
            }
            std::sort(pool.begin(), pool.end());
            for (std::size_t k = 0; k < std::min(n_neg, pool.size()); ++k) {
                edges.push_back({i, pool[k].second, -1});
            }
        }
    }
    return edges;
}

bool edges_equal(const std::vector<SignedEdge>& a, const std::vector<SignedEdge>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].anchor != b[k].anchor || a[k].neighbor != b[k].neighbor ||
            a[k].sign != b[k].sign) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("two same-class points form a mutual positive pair") {
    LabeledDataset ds;
    ds.name = "pair";
    ds.samples = {{1.0, 0.0}, {0.8, 0.3}, {-1.0, 0.2}, {-0.9, 0.1}};
    ds.labels = {0, 0, 1, 1};
    const auto aug = AugmentedDataset::from_parts(ds, {}, {});
    const SignedGraph g = SignedGraph::build(aug, 1, 0);
    REQUIRE(g.edge_count() == 4);
    const auto e0 = g.neighbors_of(0);
    REQUIRE(e0.size() == 1);
    CHECK(e0[0].neighbor == 1);
    CHECK(e0[0].sign == 1);
    const auto e1 = g.neighbors_of(1);
    REQUIRE(e1.size() == 1);
    CHECK(e1[0].neighbor == 0);
}

TEST_CASE("zero neighbor counts give an empty edge list") {
    LabeledDataset ds;
    ds.name = "none";
    ds.samples = {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {0.5, 1.0}};
    ds.labels = {0, 1, 0, 1};
    const auto aug = AugmentedDataset::from_parts(ds, {}, {});
    const SignedGraph g = SignedGraph::build(aug, 0, 0);
    CHECK(g.edge_count() == 0);
    CHECK(g.neighbors_of(0).empty());
}

TEST_CASE("edges match the brute-force oracle exactly, ties included") {
    std::mt19937_64 rng(2024);
    for (int round = 0; round < 40; ++round) {
        std::uniform_int_distribution<std::size_t> dim(1, 4);
        std::uniform_int_distribution<std::size_t> orig(2, 8);
        std::uniform_int_distribution<std::size_t> gen(0, 3);
        std::uniform_int_distribution<std::size_t> np(0, 2);
        std::uniform_int_distribution<std::size_t> nn(0, 3);
        const auto aug = random_lattice_aug(rng, dim(rng), orig(rng), gen(rng), gen(rng));
        const std::size_t n_pos = np(rng);
        const std::size_t n_neg = nn(rng);
        const SignedGraph g = SignedGraph::build(aug, n_pos, n_neg);
        const auto oracle = brute_force_edges(aug, n_pos, n_neg);
        REQUIRE(edges_equal(g.edges(), oracle));
    }
}

TEST_CASE("oracle agreement on a 30-node, 4-dimensional instance") {
    std::mt19937_64 rng(555);
    const auto aug = random_lattice_aug(rng, 4, 11, 2, 2);  // 30 nodes total
    REQUIRE(aug.node_count() == 30);
    const SignedGraph g = SignedGraph::build(aug, 2, 3);
    CHECK(edges_equal(g.edges(), brute_force_edges(aug, 2, 3)));
}

TEST_CASE("sign semantics: positives stay within class, negatives never join originals of one class") {
    std::mt19937_64 rng(77);
    const auto aug = random_lattice_aug(rng, 3, 6, 2, 3);
    const SignedGraph g = SignedGraph::build(aug, 2, 3);
    for (const auto& e : g.edges()) {
        const auto& a = aug.node(e.anchor);
        const auto& b = aug.node(e.neighbor);
        if (e.sign > 0) {
            CHECK(a.class_id == b.class_id);
            CHECK(b.kind != PointKind::negative);
        } else if (a.kind == PointKind::original && b.kind == PointKind::original) {
            CHECK(a.class_id != b.class_id);
        }
    }
}

TEST_CASE("graph construction is pure") {
    std::mt19937_64 rng(31);
    const auto aug = random_lattice_aug(rng, 2, 5, 1, 2);
    const SignedGraph a = SignedGraph::build(aug, 1, 2);
    const SignedGraph b = SignedGraph::build(aug, 1, 2);
    CHECK(edges_equal(a.edges(), b.edges()));
}

TEST_CASE("per-anchor edge count is bounded by the configuration") {
    const auto ds = generate_entangled_manifolds(20, 0.2, 0.0, 3);
    const auto aug = AugmentedDataset::from_parts(ds, {}, {});
    const SignedGraph g = SignedGraph::build(aug, 1, 4);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        CHECK(g.neighbors_of(i).size() <= 5);
    }
}

TEST_CASE("non-anchor and out-of-range queries are rejected") {
    LabeledDataset ds;
    ds.name = "na";
    ds.samples = {{1.0, 0.0}, {0.9, 0.1}, {-1.0, 0.0}, {-0.9, 0.2}};
    ds.labels = {0, 0, 1, 1};
    std::vector<std::vector<GeneratedNeighbor>> neg(2);
    neg[0].push_back({{0.5, -0.5}, 0, 0});
    const auto aug = AugmentedDataset::from_parts(ds, {}, std::move(neg));
    const SignedGraph g = SignedGraph::build(aug, 1, 1);
    CHECK_THROWS_AS(g.neighbors_of(4), std::invalid_argument);  // the negative node
    CHECK_THROWS_AS(g.neighbors_of(99), std::out_of_range);

    const SignedGraph empty;
    CHECK_THROWS_AS(empty.neighbors_of(0), std::out_of_range);
}

TEST_CASE("an empty pool with a positive count is an error") {
    LabeledDataset ds;
    ds.name = "single-class";
    ds.samples = {{1.0, 0.0}, {0.9, 0.3}};
    ds.labels = {0, 0};
    const auto aug = AugmentedDataset::from_parts(ds, {}, {});
    CHECK_THROWS_AS(SignedGraph::build(aug, 1, 1), std::invalid_argument);
    CHECK_NOTHROW(SignedGraph::build(aug, 1, 0));
}

TEST_CASE("from_edges validates and preserves the stored order") {
    std::vector<SignedEdge> edges = {{0, 1, 1}, {1, 0, 1}, {1, 2, -1}};
    const SignedGraph g = SignedGraph::from_edges(3, {1, 1, 0}, edges, 1, 1);
    CHECK(g.neighbors_of(1).size() == 2);
    CHECK(g.neighbors_of(1)[0].neighbor == 0);
    CHECK(g.neighbors_of(1)[1].neighbor == 2);
    CHECK_THROWS_AS(SignedGraph::from_edges(3, {1, 1, 0}, {{0, 0, 1}}, 1, 1), DataError);
    CHECK_THROWS_AS(SignedGraph::from_edges(3, {1, 1, 0}, {{0, 1, 2}}, 1, 1), DataError);
    CHECK_THROWS_AS(SignedGraph::from_edges(3, {1, 1, 0}, {{2, 1, 1}}, 1, 1), DataError);
    CHECK_THROWS_AS(SignedGraph::from_edges(3, {1, 1, 0}, {{0, 9, 1}}, 1, 1), DataError);
}

TEST_CASE("graph CSV round-trips through save and load") {
    std::mt19937_64 rng(91);
    const auto aug = random_lattice_aug(rng, 3, 5, 1, 2);
    const SignedGraph g = SignedGraph::build(aug, 2, 2);
    const auto path = std::filesystem::temp_directory_path() / "coin_test_graph.csv";
    save_graph(g, path);
    const SignedGraph back = load_graph(path, aug, 2, 2);
    CHECK(edges_equal(g.edges(), back.edges()));
    std::filesystem::remove(path);
}
