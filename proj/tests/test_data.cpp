#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "bdp/data.hpp"
#include "bdp/pruning.hpp"

using namespace bdp;

namespace {

// Full-batch multinomial logistic regression on raw features: the best-affine
// oracle used to certify that XorRings defeats linear classifiers.
double affine_classifier_accuracy(const Dataset& ds, int iters = 600, double lr = 0.5) {
    const int d = ds.dim();
    const int M = ds.num_classes;
    Mat64 W(M, d);
    Vec64 b(M, 0.0);

    const double inv_n = 1.0 / ds.size();
    for (int it = 0; it < iters; ++it) {
        Mat64 gW(M, d);
        Vec64 gb(M, 0.0);
        for (int i = 0; i < ds.size(); ++i) {
            const Vec64 x = ds.sample(i);
            Vec64 logits(M, 0.0);
            for (int r = 0; r < M; ++r) {
                double acc = b[r];
                for (int c = 0; c < d; ++c) acc += W(r, c) * x[c];
                logits[r] = acc;
            }
            const Vec64 p = softmax(logits);
            for (int r = 0; r < M; ++r) {
                const double diff = (p[r] - (r == ds.labels[i] ? 1.0 : 0.0)) * inv_n;
                gb[r] += diff;
                for (int c = 0; c < d; ++c) gW(r, c) += diff * x[c];
            }
        }
        for (int r = 0; r < M; ++r) {
            b[r] -= lr * gb[r];
            for (int c = 0; c < d; ++c) W(r, c) -= lr * gW(r, c);
        }
    }

    int hits = 0;
    for (int i = 0; i < ds.size(); ++i) {
        const Vec64 x = ds.sample(i);
        Vec64 logits(M, 0.0);
        for (int r = 0; r < M; ++r) {
            double acc = b[r];
            for (int c = 0; c < d; ++c) acc += W(r, c) * x[c];
            logits[r] = acc;
        }
        if (argmax(logits) == ds.labels[i]) ++hits;
    }
    return static_cast<double>(hits) / ds.size();
}

std::string temp_path(const char* name) {
    return std::string("bdp_test_") + name + ".csv";
}

}  // namespace

TEST_CASE("gen_blobs: balanced by construction and seed-deterministic") {
    const Dataset ds = gen_blobs(3, 200, 2, 0.3, BlobLayout::Separable, 42);
    CHECK(ds.size() == 600);
    CHECK(ds.num_classes == 3);

    std::vector<int> counts(3, 0);
    for (int y : ds.labels) ++counts[y];
    CHECK(balance_degree(counts) == 1.0);

    const Dataset again = gen_blobs(3, 200, 2, 0.3, BlobLayout::Separable, 42);
    for (size_t i = 0; i < ds.features.data.size(); ++i)
        CHECK(ds.features.data[i] == again.features.data[i]);

    const Dataset other = gen_blobs(3, 200, 2, 0.3, BlobLayout::Separable, 43);
    bool differs = false;
    for (size_t i = 0; i < ds.features.data.size() && !differs; ++i)
        differs = ds.features.data[i] != other.features.data[i];
    CHECK(differs);
}

TEST_CASE("gen_blobs: invalid arguments are rejected") {
    CHECK_THROWS_AS(gen_blobs(1, 10, 2, 0.1, BlobLayout::Separable, 0), std::invalid_argument);
    CHECK_THROWS_AS(gen_blobs(2, 0, 2, 0.1, BlobLayout::Separable, 0), std::invalid_argument);
    CHECK_THROWS_AS(gen_blobs(2, 10, 1, 0.1, BlobLayout::Separable, 0), std::invalid_argument);
}

TEST_CASE("gen_blobs: separable layout is nearly solved by an affine classifier") {
    const Dataset ds = gen_blobs(3, 150, 2, 0.4, BlobLayout::Separable, 7);
    CHECK(affine_classifier_accuracy(ds) >= 0.95);
}

TEST_CASE("gen_blobs: xor_rings defeats the best affine classifier on 10 seeds") {
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        CAPTURE(seed);
        const Dataset ds = gen_blobs(2, 200, 2, 0.15, BlobLayout::XorRings, seed);
        CHECK(affine_classifier_accuracy(ds) <= 0.60);
    }
}

TEST_CASE("csv: save then load reproduces the dataset exactly") {
    const Dataset ds = gen_blobs(3, 20, 4, 0.5, BlobLayout::XorRings, 11);
    const std::string path = temp_path("roundtrip");
    save_csv(ds, path);
    const Dataset back = load_csv(path);
    std::remove(path.c_str());

    CHECK(back.size() == ds.size());
    CHECK(back.dim() == ds.dim());
    CHECK(back.num_classes == ds.num_classes);
    for (size_t i = 0; i < ds.features.data.size(); ++i)
        CHECK(back.features.data[i] == ds.features.data[i]);
    for (int i = 0; i < ds.size(); ++i) CHECK(back.labels[i] == ds.labels[i]);
}

TEST_CASE("csv: two data rows with labels {0, 1} give two classes") {
    const std::string path = temp_path("two_rows");
    {
        std::ofstream out(path);
        out << "f0,f1,label\n1.0,2.0,0\n3.0,4.0,1\n";
    }
    const Dataset ds = load_csv(path);
    std::remove(path.c_str());
    CHECK(ds.size() == 2);
    CHECK(ds.num_classes == 2);
    CHECK(ds.features(1, 1) == 4.0);
}

TEST_CASE("csv: malformed inputs carry line numbers") {
    const std::string path = temp_path("bad");

    {
        std::ofstream out(path);
    }
    CHECK_THROWS_AS(load_csv(path), std::runtime_error);

    {
        std::ofstream out(path);
        out << "f0,f1,label\n1.0,2.0,0\n1.0,0\n";
    }
    CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("line 3"), std::runtime_error);

    {
        std::ofstream out(path);
        out << "f0,f1,label\n1.0,abc,0\n";
    }
    CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("line 2"), std::runtime_error);

    {
        std::ofstream out(path);
        out << "f0,f1,target\n1.0,2.0,0\n";
    }
    CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("line 1"), std::runtime_error);

    std::remove(path.c_str());
}

TEST_CASE("split: the classic equal pool split") {
    // 250 samples, test 20% held aside first; 0.4/0.4 of the whole is the
    // familiar 5:5 split of the remaining pool
    const Dataset ds = gen_blobs(2, 125, 2, 0.3, BlobLayout::Separable, 3);
    SplitSpec spec;
    spec.train_fraction = 0.4;
    spec.test_fraction = 0.2;
    spec.seed = 5;
    const Split parts = split(ds, spec);
    CHECK(parts.train.size() == 100);
    CHECK(parts.val.size() == 100);
    CHECK(parts.test_ids.size() == 50);
}

TEST_CASE("split: a 9:1 pool ratio") {
    const Dataset ds = gen_blobs(2, 125, 2, 0.3, BlobLayout::Separable, 3);
    SplitSpec spec;
    spec.train_fraction = 0.72;  // 9:1 over the 80% pool
    spec.test_fraction = 0.2;
    spec.seed = 5;
    const Split parts = split(ds, spec);
    CHECK(parts.train.size() == 180);
    CHECK(parts.val.size() == 20);
    CHECK(parts.test_ids.size() == 50);
}

TEST_CASE("split: stratified split of a balanced dataset keeps b == 1") {
    const Dataset ds = gen_blobs(4, 50, 2, 0.3, BlobLayout::Separable, 9);
    SplitSpec spec;
    spec.train_fraction = 0.4;
    spec.test_fraction = 0.2;
    spec.seed = 1;
    const Split parts = split(ds, spec);
    CHECK(balance_degree(parts.train.class_counts()) == 1.0);
    CHECK(balance_degree(parts.val.class_counts()) == 1.0);
}

TEST_CASE("split: partitions the dataset exactly, with and without stratification") {
    const Dataset ds = gen_blobs(3, 67, 2, 0.3, BlobLayout::XorRings, 13);
    for (bool stratified : {true, false}) {
        SplitSpec spec;
        spec.train_fraction = 0.37;
        spec.test_fraction = 0.21;
        spec.seed = 8;
        spec.stratified = stratified;
        const Split parts = split(ds, spec);

        std::set<int> seen;
        for (int id : parts.train.active_ids()) CHECK(seen.insert(id).second);
        for (int id : parts.val.active_ids()) CHECK(seen.insert(id).second);
        for (int id : parts.test_ids) CHECK(seen.insert(id).second);
        CHECK(static_cast<int>(seen.size()) == ds.size());

        // class_counts agree with a recount
        std::vector<int> recount(ds.num_classes, 0);
        for (int id : parts.train.active_ids()) ++recount[ds.labels[id]];
        CHECK(recount == parts.train.class_counts());
    }
}

TEST_CASE("split: determinism and fraction validation") {
    const Dataset ds = gen_blobs(2, 50, 2, 0.3, BlobLayout::Separable, 2);
    SplitSpec spec;
    spec.train_fraction = 0.5;
    spec.test_fraction = 0.2;
    spec.seed = 33;
    const Split a = split(ds, spec);
    const Split b = split(ds, spec);
    CHECK(a.train.active_ids() == b.train.active_ids());
    CHECK(a.test_ids == b.test_ids);

    spec.train_fraction = 0.9;  // train + test >= 1
    CHECK_THROWS_AS(split(ds, spec), std::invalid_argument);
    spec.train_fraction = 0.0;
    CHECK_THROWS_AS(split(ds, spec), std::invalid_argument);
}

TEST_CASE("split: an empty resulting set is an error") {
    const Dataset ds = gen_blobs(2, 3, 2, 0.3, BlobLayout::Separable, 2);  // 6 samples
    SplitSpec spec;
    spec.train_fraction = 0.78;
    spec.test_fraction = 0.2;
    spec.seed = 1;
    // validation would round to zero samples
    CHECK_THROWS_AS(split(ds, spec), std::runtime_error);
}
