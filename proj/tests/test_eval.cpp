#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "coin/eval.hpp"

using namespace coin;

namespace {

// O(n^2) pair-counting reference for the rank-based implementation.
double auc_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / double(pairs);
}

} // namespace

TEST_CASE("accuracy on the boundary cases") {
    CHECK(accuracy({1, 0, 1}, {1, 0, 1}) == 1.0);
    CHECK(accuracy({1, 0}, {0, 1}) == 0.0);
    CHECK(accuracy({1, 1, 0, 0}, {1, 1, 0, 1}) == 0.75);
    CHECK_THROWS_AS(accuracy({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(accuracy({1}, {1, 0}), std::invalid_argument);
}

TEST_CASE("accuracy is permutation invariant") {
    std::vector<int> preds = {1, 0, 1, 0, 1, 1};
    std::vector<int> labels = {1, 1, 1, 0, 0, 1};
    const double base = accuracy(preds, labels);
    std::mt19937_64 rng(1);
    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    for (int round = 0; round < 10; ++round) {
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<int> p, l;
        for (std::size_t i : order) {
            p.push_back(preds[i]);
            l.push_back(labels[i]);
        }
        CHECK(accuracy(p, l) == base);
    }
}

TEST_CASE("auc on the canonical cases") {
    CHECK(auc({0.9, 0.8, 0.3, 0.1}, {1, 1, 0, 0}) == 1.0);
    CHECK(auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == 0.5);
    CHECK(auc({0.7, 0.4, 0.6}, {1, 1, 0}) == 0.5);  // pairs: one win, one loss
    CHECK_THROWS_AS(auc({0.1, 0.2}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(auc({0.1}, {1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(auc({0.1, 0.2}, {0, 2}), std::invalid_argument);
}

TEST_CASE("auc equals exhaustive pair counting on random tied inputs") {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> len(2, 50);
    std::uniform_int_distribution<int> quant(0, 9);  // coarse grid forces ties
    std::bernoulli_distribution label_draw(0.5);
    for (int round = 0; round < 500; ++round) {
        const int n = len(rng);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        for (int i = 0; i < n; ++i) {
            scores[i] = quant(rng) / 10.0;
            labels[i] = label_draw(rng) ? 1 : 0;
        }
        labels[0] = 0;
        labels[n - 1] = 1;  // both classes present
        CHECK(std::abs(auc(scores, labels) - auc_oracle(scores, labels)) <= 1e-12);
    }
}

TEST_CASE("auc is invariant under strictly increasing score transforms") {
    std::vector<double> scores = {0.1, 0.3, 0.3, 0.7, 0.2, 0.9, 0.5};
    std::vector<int> labels = {0, 1, 0, 1, 0, 1, 1};
    const double base = auc(scores, labels);
    auto mapped = scores;
    for (double& s : mapped) s = 3.0 * s + 2.0;
    CHECK(auc(mapped, labels) == base);
    for (double& s : mapped) s = std::exp(s);
    CHECK(auc(mapped, labels) == base);
}

TEST_CASE("margin stats on the four-point example") {
    const std::vector<FeatureVector> latents = {{0.0, 0.0}, {0.0, 1.0}, {5.0, 0.0}, {5.0, 1.0}};
    const std::vector<int> labels = {0, 0, 1, 1};
    const MarginStats s = margin_stats(latents, labels);
    CHECK(s.intra_mean == 1.0);
    // cross pairs: 5, sqrt(26), sqrt(26), 5
    const double expected_inter = (10.0 + 2.0 * std::sqrt(26.0)) / 4.0;
    CHECK(std::abs(s.inter_mean - expected_inter) <= 1e-12);
    CHECK(std::abs(s.margin_ratio - expected_inter) <= 1e-12);
    CHECK_FALSE(s.degenerate);
}

TEST_CASE("collapsed classes are flagged as degenerate") {
    const std::vector<FeatureVector> latents = {{1.0, 1.0}, {1.0, 1.0}, {4.0, 0.0}, {4.0, 0.0}};
    const std::vector<int> labels = {0, 0, 1, 1};
    const MarginStats s = margin_stats(latents, labels);
    CHECK(s.intra_mean == 0.0);
    CHECK(s.degenerate);
}

TEST_CASE("margin stats are permutation invariant and validate inputs") {
    std::vector<FeatureVector> latents = {{0.0, 1.0}, {2.0, 0.5}, {1.0, 1.5}, {3.0, -1.0}};
    std::vector<int> labels = {0, 1, 0, 1};
    const MarginStats base = margin_stats(latents, labels);
    const MarginStats shuffled =
        margin_stats({latents[3], latents[0], latents[2], latents[1]}, {1, 0, 0, 1});
    CHECK(base.intra_mean == shuffled.intra_mean);
    CHECK(base.inter_mean == shuffled.inter_mean);
    CHECK_THROWS_AS(margin_stats({{0.0}, {1.0}, {2.0}}, {0, 0, 1}), std::invalid_argument);
}

TEST_CASE("projection of centered 2-D data is an isometry") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<FeatureVector> pts;
    for (int i = 0; i < 40; ++i) pts.push_back({g(rng), 0.3 * g(rng)});
    // center them
    double m0 = 0.0, m1 = 0.0;
    for (const auto& p : pts) {
        m0 += p[0];
        m1 += p[1];
    }
    for (auto& p : pts) {
        p[0] -= m0 / 40.0;
        p[1] -= m1 / 40.0;
    }
    const PcaProjection proj = pca_project(pts, 2);
    REQUIRE(proj.components_used == 2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double before = std::sqrt(squared_distance(pts[i], pts[j]));
            const double after = std::sqrt(squared_distance(proj.coords[i], proj.coords[j]));
            CHECK(std::abs(before - after) <= 1e-9);
        }
    }
}

TEST_CASE("identical points project to zero with a rank warning") {
    const std::vector<FeatureVector> pts(5, FeatureVector{2.0, -1.0, 0.5});
    const PcaProjection proj = pca_project(pts, 2);
    CHECK(proj.components_used == 0);
    CHECK(proj.rank_deficient);
    for (const auto& c : proj.coords) {
        CHECK(c[0] == 0.0);
        CHECK(c[1] == 0.0);
    }
}

TEST_CASE("collinear points keep a single live component") {
    // three points on the line t * (1, 2, 2)
    std::vector<FeatureVector> pts;
    for (double t : {0.0, 1.0, 2.0}) pts.push_back({t, 2.0 * t, 2.0 * t});
    const PcaProjection proj = pca_project(pts, 2);
    CHECK(proj.components_used == 1);
    CHECK(proj.rank_deficient);
    bool any_nonzero = false;
    for (const auto& c : proj.coords) {
        if (std::abs(c[0]) > 1e-9) any_nonzero = true;
        CHECK(std::abs(c[1]) <= 1e-12);
    }
    CHECK(any_nonzero);
}

TEST_CASE("projection input validation") {
    CHECK_THROWS_AS(pca_project({{1.0, 2.0}}, 2), std::invalid_argument);
    CHECK_THROWS_AS(pca_project({{1.0}, {2.0}}, 2), std::invalid_argument);
    CHECK_THROWS_AS(pca_project({{1.0, 2.0}, {2.0, 1.0}}, 0), std::invalid_argument);
}

TEST_CASE("component sign follows the largest-magnitude coordinate") {
    // Strong variance along -e1; the sign rule must flip the component so its
    // dominant coordinate is positive, making the output deterministic.
    std::vector<FeatureVector> pts;
    for (double t : {-3.0, -1.0, 1.0, 3.0}) pts.push_back({-t, 0.1 * t});
    const PcaProjection proj = pca_project(pts, 2);
    REQUIRE(proj.components_used >= 1);
    // the first point has the largest positive coordinate along -e1
    CHECK(proj.coords[0][0] > 0.0);
}
