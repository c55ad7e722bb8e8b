#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>

#include "coin/dataset.hpp"

using namespace coin;
namespace fs = std::filesystem;

TEST_CASE("zero-noise class 0 lies exactly on the upper unit half-circle") {
    const auto ds = generate_entangled_manifolds(100, 0.0, 0.0, 7);
    REQUIRE(ds.size() == 200);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.labels[i] != 0) continue;
        const auto& p = ds.samples[i];
        CHECK(std::abs(norm(p) - 1.0) <= 1e-12);
        CHECK(p[1] >= -1e-12);
    }
}

TEST_CASE("zero-noise class 1 lies exactly on its analytic arc") {
    const auto ds = generate_entangled_manifolds(50, 0.0, 0.0, 11);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.labels[i] != 1) continue;
        const auto& p = ds.samples[i];
        const double dx = p[0] - 1.0;
        const double dy = p[1] - 0.5;
        CHECK(std::abs(std::sqrt(dx * dx + dy * dy) - 1.0) <= 1e-12);
        CHECK(p[1] <= 0.5 + 1e-12);
    }
}

TEST_CASE("rotation maps the arcs rigidly") {
    const double theta = 0.7;
    const auto ds = generate_entangled_manifolds(40, 0.0, theta, 5);
    const double c = std::cos(-theta), s = std::sin(-theta);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& p = ds.samples[i];
        const FeatureVector back{c * p[0] - s * p[1], s * p[0] + c * p[1]};
        if (ds.labels[i] == 0) {
            CHECK(std::abs(norm(back) - 1.0) <= 1e-12);
        } else {
            const double dx = back[0] - 1.0, dy = back[1] - 0.5;
            CHECK(std::abs(std::sqrt(dx * dx + dy * dy) - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("generator is deterministic per seed") {
    const auto a = generate_entangled_manifolds(1, 0.5, 0.0, 3);
    const auto b = generate_entangled_manifolds(1, 0.5, 0.0, 3);
    REQUIRE(a.samples == b.samples);
    REQUIRE(a.labels == b.labels);
    const auto c = generate_entangled_manifolds(1, 0.5, 0.0, 4);
    CHECK(a.samples != c.samples);
}

TEST_CASE("generator rejects invalid parameters") {
    CHECK_THROWS_AS(generate_entangled_manifolds(0, 0.1, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_entangled_manifolds(10, -0.5, 0.0, 1), std::invalid_argument);
}

namespace {

// Depth-0 stump oracle: best single-coordinate threshold on the train part.
double stump_accuracy(const LabeledDataset& train, const LabeledDataset& test) {
    double best_acc = 0.0;
    std::size_t best_dim = 0;
    double best_thr = 0.0;
    int best_pol = 0;
    for (std::size_t dim = 0; dim < train.dim(); ++dim) {
        std::vector<double> vals;
        for (const auto& x : train.samples) vals.push_back(x[dim]);
        std::sort(vals.begin(), vals.end());
        for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
            const double thr = 0.5 * (vals[k] + vals[k + 1]);
            for (int pol = 0; pol < 2; ++pol) {
                std::size_t hits = 0;
                for (std::size_t i = 0; i < train.size(); ++i) {
                    const int pred = (train.samples[i][dim] > thr ? 1 : 0) ^ pol;
                    if (pred == train.labels[i]) ++hits;
                }
                const double acc = double(hits) / double(train.size());
                if (acc > best_acc) {
                    best_acc = acc;
                    best_dim = dim;
                    best_thr = thr;
                    best_pol = pol;
                }
            }
        }
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const int pred = (test.samples[i][best_dim] > best_thr ? 1 : 0) ^ best_pol;
        if (pred == test.labels[i]) ++hits;
    }
    return double(hits) / double(test.size());
}

double knn1_accuracy(const LabeledDataset& train, const LabeledDataset& test) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int pred = -1;
        for (std::size_t j = 0; j < train.size(); ++j) {
            const double d = squared_distance(test.samples[i], train.samples[j]);
            if (d < best) {
                best = d;
                pred = train.labels[j];
            }
        }
        if (pred == test.labels[i]) ++hits;
    }
    return double(hits) / double(test.size());
}

} // namespace

TEST_CASE("benchmark is entangled for a stump yet learnable for 1-NN") {
    const auto ds = generate_entangled_manifolds(200, 0.2, 0.0, 1);
    const auto [train, test] = split(ds, 0.25, 0);
    const double stump = stump_accuracy(train, test);
    const double knn = knn1_accuracy(train, test);
    CHECK(stump < 0.9);
    CHECK(knn > 0.9);
}

TEST_CASE("split keeps one sample per class per part when forced") {
    LabeledDataset ds;
    ds.name = "four";
    ds.samples = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
    ds.labels = {0, 0, 1, 1};
    const auto [train, test] = split(ds, 0.5, 0);
    REQUIRE(train.size() == 2);
    REQUIRE(test.size() == 2);
    CHECK(train.class_count(0) == 1);
    CHECK(train.class_count(1) == 1);
    CHECK(test.class_count(0) == 1);
    CHECK(test.class_count(1) == 1);
}

TEST_CASE("split is deterministic") {
    const auto ds = generate_entangled_manifolds(30, 0.1, 0.0, 2);
    const auto [tr1, te1] = split(ds, 0.3, 9);
    const auto [tr2, te2] = split(ds, 0.3, 9);
    CHECK(tr1.samples == tr2.samples);
    CHECK(te1.samples == te2.samples);
}

TEST_CASE("split of 100 samples at 0.3 gives 30/70 with class ratios kept") {
    // 60/40 class mix; expected per-class test counts 18 and 12
    LabeledDataset ds;
    ds.name = "mix";
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        ds.samples.push_back({u(rng), u(rng)});
        ds.labels.push_back(i < 60 ? 0 : 1);
    }
    const auto [train, test] = split(ds, 0.3, 1);
    CHECK(test.size() == 30);
    CHECK(train.size() == 70);
    CHECK(test.class_count(0) == 18);
    CHECK(test.class_count(1) == 12);
}

TEST_CASE("split partitions the dataset exactly") {
    const auto ds = generate_entangled_manifolds(25, 0.3, 0.0, 13);
    const auto [train, test] = split(ds, 0.4, 3);
    REQUIRE(train.size() + test.size() == ds.size());
    std::multiset<std::string> all, parts;
    auto key = [](const FeatureVector& x, int y) {
        return format_double(x[0]) + "," + format_double(x[1]) + "," + std::to_string(y);
    };
    for (std::size_t i = 0; i < ds.size(); ++i) all.insert(key(ds.samples[i], ds.labels[i]));
    for (std::size_t i = 0; i < train.size(); ++i) parts.insert(key(train.samples[i], train.labels[i]));
    for (std::size_t i = 0; i < test.size(); ++i) parts.insert(key(test.samples[i], test.labels[i]));
    CHECK(all == parts);
}

TEST_CASE("split rejects impossible stratification") {
    LabeledDataset ds;
    ds.name = "tiny";
    ds.samples = {{0.0}, {1.0}, {2.0}};
    ds.labels = {0, 0, 1};  // class 1 has a single member
    CHECK_THROWS_AS(split(ds, 0.5, 0), std::invalid_argument);
    LabeledDataset ok;
    ok.name = "ok";
    ok.samples = {{0.0}, {1.0}, {2.0}, {3.0}};
    ok.labels = {0, 0, 1, 1};
    CHECK_THROWS_AS(split(ok, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(split(ok, 1.0, 0), std::invalid_argument);
}

TEST_CASE("class_subset picks exactly the matching indices in order") {
    LabeledDataset ds;
    ds.name = "subset";
    ds.samples = {{0.0}, {1.0}, {2.0}};
    ds.labels = {0, 1, 0};
    CHECK(class_subset(ds, 0).indices == std::vector<std::size_t>{0, 2});

    LabeledDataset ds2;
    ds2.name = "five";
    ds2.samples = {{0.0}, {1.0}, {2.0}, {3.0}, {4.0}};
    ds2.labels = {0, 1, 1, 0, 1};
    CHECK(class_subset(ds2, 1).indices == std::vector<std::size_t>{1, 2, 4});
}

TEST_CASE("class_subset rejects an unknown class") {
    LabeledDataset ds;
    ds.name = "ones";
    ds.samples = {{0.0}, {1.0}};
    ds.labels = {1, 1};
    CHECK_THROWS_AS(class_subset(ds, 0), std::invalid_argument);
}

TEST_CASE("save/load round-trips at full precision") {
    auto ds = generate_entangled_manifolds(20, 0.7, 0.3, 21);
    ds.samples[0][0] = 1e-17;
    ds.samples[1][1] = -123456.789012345678;
    const auto path = fs::temp_directory_path() / "coin_test_roundtrip.csv";
    save_dataset(ds, path);
    const auto back = load_dataset(path);
    CHECK(back.samples == ds.samples);
    CHECK(back.labels == ds.labels);
    fs::remove(path);
}

TEST_CASE("load reports malformed rows with their location") {
    const auto path = fs::temp_directory_path() / "coin_test_malformed.csv";
    {
        std::ofstream out(path);
        out << "f0,f1,label\n1.0,2.0,0\nbad,2.0,1\n";
    }
    try {
        load_dataset(path);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
    {
        std::ofstream out(path);
        out << "f0,f1,label\n1.0,2.0,0\n1.0,1\n";
    }
    CHECK_THROWS_AS(load_dataset(path), DataError);
    {
        std::ofstream out(path);
        out << "not,a,header\n";
    }
    CHECK_THROWS_AS(load_dataset(path), DataError);
    fs::remove(path);
}

TEST_CASE("standardizer centers and scales on the fitted split only") {
    const auto ds = generate_entangled_manifolds(50, 0.2, 0.0, 8);
    const auto scaler = Standardizer::fit(ds);
    const auto std_ds = scaler.apply(ds);
    for (std::size_t j = 0; j < 2; ++j) {
        double mean = 0.0, var = 0.0;
        for (const auto& x : std_ds.samples) mean += x[j];
        mean /= double(std_ds.size());
        for (const auto& x : std_ds.samples) var += (x[j] - mean) * (x[j] - mean);
        var /= double(std_ds.size());
        CHECK(std::abs(mean) <= 1e-12);
        CHECK(std::abs(var - 1.0) <= 1e-9);
    }
}

TEST_CASE("standardizer leaves constant coordinates unscaled") {
    LabeledDataset ds;
    ds.name = "const";
    ds.samples = {{2.0, 1.0}, {2.0, 3.0}, {2.0, 5.0}, {2.0, 7.0}};
    ds.labels = {0, 0, 1, 1};
    const auto scaler = Standardizer::fit(ds);
    CHECK(scaler.stds()[0] == 1.0);
    const auto out = scaler.apply(ds);
    for (const auto& x : out.samples) CHECK(x[0] == 0.0);
}
