#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "bdp/numcore.hpp"
#include "bdp/pruning.hpp"
#include "oracles.hpp"

using namespace bdp;

namespace {

// A pool of n samples with the given per-class sizes, ids 0..n-1 assigned
// class-major.
SetState make_pool(const std::vector<int>& per_class) {
    std::vector<int> labels;
    for (size_t cls = 0; cls < per_class.size(); ++cls)
        labels.insert(labels.end(), per_class[cls], static_cast<int>(cls));
    std::vector<int> ids(labels.size());
    for (size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    return SetState::create(std::move(ids), labels, static_cast<int>(per_class.size()));
}

std::vector<long> no_caps(const SetState& s) {
    return std::vector<long>(s.class_counts().size(), 1L << 40);
}

}  // namespace

TEST_CASE("el2n: passes the recorded error through") {
    CHECK(el2n(0.0) == 0.0);
    CHECK(el2n(std::sqrt(0.5)) == doctest::Approx(std::sqrt(0.5)));
    CHECK(el2n(1.2) <= std::sqrt(2.0) + 1e-12);  // simplex-to-vertex diameter
    CHECK_THROWS_AS(el2n(-0.1), std::invalid_argument);
}

TEST_CASE("voe: constant history has zero variance") {
    CHECK(voe({0.3, 0.3, 0.3}, 3) == 0.0);
}

TEST_CASE("voe: hand-computed two-entry window") {
    CHECK(voe({0.2, 0.4}, 2) == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("voe: incomplete window is an error") {
    CHECK_THROWS_AS(voe({0.1, 0.2}, 3), std::invalid_argument);
}

TEST_CASE("voe: matches the two-pass variance oracle on 1000 random histories") {
    RngStream rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const int window = 1 + static_cast<int>(rng.uniform_below(12));
        std::vector<double> h(window);
        for (double& e : h) e = rng.uniform(0.0, std::sqrt(2.0));
        const double got = voe(h, window);
        const double want = oracles::variance_two_pass(h);
        CHECK(std::abs(got - want) <= 1e-12);
    }
}

TEST_CASE("balance_degree: equal counts are perfectly balanced") {
    CHECK(balance_degree({7, 7, 7, 7}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("balance_degree: hand-computed pairs") {
    CHECK(balance_degree({10, 5}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(balance_degree({8, 4, 2}) ==
          doctest::Approx((4.0 / 8 + 2.0 / 8 + 2.0 / 4) / 3.0).epsilon(1e-15));
}

TEST_CASE("balance_degree: zero-count pair rules") {
    CHECK(balance_degree({0, 0}) == 1.0);          // both empty
    CHECK(balance_degree({5, 0}) == 0.0);          // one empty
    CHECK(balance_degree({5, 5, 0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(balance_degree({3}), std::invalid_argument);
}

TEST_CASE("balance_degree: scale invariance and the b == 1 characterization") {
    RngStream rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 2 + static_cast<int>(rng.uniform_below(6));
        std::vector<int> counts(m);
        for (int& c : counts) c = static_cast<int>(rng.uniform_below(40));
        const double b = balance_degree(counts);

        std::vector<int> scaled = counts;
        for (int& c : scaled) c *= 3;
        CHECK(balance_degree(scaled) == doctest::Approx(b).epsilon(1e-12));

        const bool all_equal = std::all_of(counts.begin(), counts.end(),
                                           [&](int c) { return c == counts[0]; });
        CHECK((b == 1.0) == all_equal);
    }
}

TEST_CASE("balance_degree: matches a brute-force pairwise sum on random vectors") {
    RngStream rng(6);
    for (int trial = 0; trial < 500; ++trial) {
        const int m = 2 + static_cast<int>(rng.uniform_below(9));
        std::vector<int> counts(m);
        for (int& c : counts) c = static_cast<int>(rng.uniform_below(100));
        double sum = 0.0;
        int pairs = 0;
        for (int i = 0; i < m; ++i) {
            for (int j = i + 1; j < m; ++j) {
                ++pairs;
                const double lo = std::min(counts[i], counts[j]);
                const double hi = std::max(counts[i], counts[j]);
                sum += hi == 0.0 ? 1.0 : lo / hi;
            }
        }
        CHECK(std::abs(balance_degree(counts) - sum / pairs) <= 1e-12);
    }
}

TEST_CASE("constraint_intensity: every family is exactly 1 at b == 1") {
    for (ConstraintFamily f : {ConstraintFamily::None, ConstraintFamily::A, ConstraintFamily::B,
                               ConstraintFamily::C, ConstraintFamily::D, ConstraintFamily::E,
                               ConstraintFamily::F}) {
        for (int n : {1, 2, 5, 10, 30}) CHECK(constraint_intensity(1.0, n, f) == 1.0);
    }
}

TEST_CASE("constraint_intensity: hand-evaluated points") {
    CHECK(constraint_intensity(0.5, 10, ConstraintFamily::A) == doctest::Approx(8.5).epsilon(1e-15));
    CHECK(constraint_intensity(0.0, 10, ConstraintFamily::E) == doctest::Approx(11.0).epsilon(1e-15));
    CHECK(constraint_intensity(0.5, 4, ConstraintFamily::B) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(constraint_intensity(0.0, 3, ConstraintFamily::C) ==
          doctest::Approx(std::exp(3.0)).epsilon(1e-12));
    CHECK(std::isinf(constraint_intensity(0.0, 5, ConstraintFamily::D)));
    CHECK(constraint_intensity(0.5, 2, ConstraintFamily::D) ==
          doctest::Approx(1.0 - 2.0 * std::log(0.5)).epsilon(1e-12));
    CHECK(constraint_intensity(0.5, 8, ConstraintFamily::F) ==
          doctest::Approx(8.0 * 0.875 + 1.0).epsilon(1e-12));
    CHECK_THROWS_AS(constraint_intensity(-0.1, 5, ConstraintFamily::A), std::invalid_argument);
    CHECK_THROWS_AS(constraint_intensity(0.5, 0, ConstraintFamily::A), std::invalid_argument);
}

TEST_CASE("constraint_intensity: non-increasing in b on the grid") {
    for (ConstraintFamily f : {ConstraintFamily::A, ConstraintFamily::B, ConstraintFamily::C,
                               ConstraintFamily::D, ConstraintFamily::E, ConstraintFamily::F,
                               ConstraintFamily::None}) {
        for (int n : {2, 5, 10, 30}) {
            double prev = constraint_intensity(0.01, n, f);
            for (int i = 2; i <= 100; ++i) {
                const double cur = constraint_intensity(i / 100.0, n, f);
                CHECK(cur <= prev + 1e-12);
                prev = cur;
            }
        }
    }
}

TEST_CASE("class_limits: unconstrained round, fractional divisor, empty class") {
    CHECK(class_limits({50, 7, 0}, 1.0) == std::vector<long>{50, 7, 0});
    CHECK(class_limits({50}, 8.5) == std::vector<long>{5});
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(class_limits({50, 20}, inf) == std::vector<long>{0, 0});
    CHECK_THROWS_AS(class_limits({10}, 0.5), std::invalid_argument);
}

TEST_CASE("prune_round: zero percent removes nothing") {
    SetState pool = make_pool({10, 10});
    ScoreTable scores;
    for (int id : pool.active_ids()) scores[id] = id * 0.1;
    const PruneOutcome out = prune_round(pool, scores, 0.0, Criterion::Low, no_caps(pool));
    CHECK(out.pruned_ids.empty());
    CHECK(pool.size() == 20);
}

TEST_CASE("prune_round: non-binding caps remove exactly the scored prefix") {
    SetState pool = make_pool({50, 50});
    ScoreTable scores;
    for (int id : pool.active_ids()) scores[id] = static_cast<double>(id);  // id order = score order
    const PruneOutcome out = prune_round(pool, scores, 20.0, Criterion::Low, no_caps(pool));
    REQUIRE(out.pruned_ids.size() == 20);
    CHECK(out.target == 20);
    CHECK_FALSE(out.cap_limited);
    for (int i = 0; i < 20; ++i) CHECK(out.pruned_ids[i] == i);  // 20 lowest scores
    CHECK(pool.size() == 80);

    // High criterion removes from the other end
    SetState pool2 = make_pool({50, 50});
    const PruneOutcome out2 = prune_round(pool2, scores, 10.0, Criterion::High, no_caps(pool2));
    REQUIRE(out2.pruned_ids.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(out2.pruned_ids[i] == 99 - i);
}

TEST_CASE("prune_round: caps limit each class and the walk under-prunes") {
    // two classes of 10; caps (2, 2); p = 50% => target 10, only 4 removable
    SetState pool = make_pool({10, 10});
    ScoreTable scores;
    for (int id : pool.active_ids()) scores[id] = static_cast<double>(id);
    const std::vector<long> caps{2, 2};
    const PruneOutcome out = prune_round(pool, scores, 50.0, Criterion::Low, caps);
    CHECK(out.target == 10);
    CHECK(out.cap_limited);
    REQUIRE(out.pruned_ids.size() == 4);
    // cap-respecting prefix of the ascending walk: 0,1 from class 0 then 10,11 from class 1
    CHECK(out.pruned_ids == std::vector<int>{0, 1, 10, 11});
    CHECK(pool.class_counts()[0] == 8);
    CHECK(pool.class_counts()[1] == 8);
}

TEST_CASE("prune_round: ties break by ascending id and the result is deterministic") {
    SetState a = make_pool({6, 6});
    SetState b = make_pool({6, 6});
    ScoreTable scores;
    for (int id : a.active_ids()) scores[id] = 1.0;  // all tied
    const auto ra = prune_round(a, scores, 50.0, Criterion::High, no_caps(a));
    const auto rb = prune_round(b, scores, 50.0, Criterion::High, no_caps(b));
    CHECK(ra.pruned_ids == rb.pruned_ids);
    CHECK(ra.pruned_ids == std::vector<int>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("prune_round: missing score for an active id is an error") {
    SetState pool = make_pool({4, 4});
    ScoreTable scores;
    for (int id : pool.active_ids()) {
        if (id != 3) scores[id] = 0.5;
    }
    CHECK_THROWS_AS(prune_round(pool, scores, 25.0, Criterion::Low, no_caps(pool)),
                    std::invalid_argument);
}

TEST_CASE("prune_round: property test, caps are never exceeded and ids stay valid") {
    RngStream rng(777);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 2 + static_cast<int>(rng.uniform_below(4));
        std::vector<int> per_class(m);
        for (int& c : per_class) c = 1 + static_cast<int>(rng.uniform_below(30));
        SetState pool = make_pool(per_class);
        const std::vector<int> before = pool.class_counts();

        ScoreTable scores;
        for (int id : pool.active_ids()) scores[id] = rng.uniform(0.0, 1.0);

        const double b = balance_degree(pool.class_counts());
        const int n = 1 + static_cast<int>(rng.uniform_below(10));
        const double N = constraint_intensity(b, n, ConstraintFamily::A);
        const auto caps = class_limits(pool.class_counts(), N);

        const double pct = rng.uniform(0.0, 100.0);
        const Criterion crit = rng.uniform01() < 0.5 ? Criterion::Low : Criterion::High;
        const std::set<int> active_before(pool.active_ids().begin(), pool.active_ids().end());

        const PruneOutcome out = prune_round(pool, scores, pct, crit, caps);

        std::vector<long> removed_per_class(m, 0);
        std::set<int> unique(out.pruned_ids.begin(), out.pruned_ids.end());
        CHECK(unique.size() == out.pruned_ids.size());
        for (int id : out.pruned_ids) {
            CHECK(active_before.count(id) == 1);
            ++removed_per_class[pool.label_of(id)];
        }
        for (int cls = 0; cls < m; ++cls) {
            CHECK(removed_per_class[cls] <= caps[cls]);
            CHECK(pool.class_counts()[cls] == before[cls] - removed_per_class[cls]);
        }
        CHECK(static_cast<long>(out.pruned_ids.size()) <= out.target);
    }
}

TEST_CASE("one_shot_el2n_prune: discards exactly half and partitions the set") {
    SetState pool = make_pool({50, 50});
    ScoreTable scores;
    for (int id : pool.active_ids()) scores[id] = static_cast<double>(id);
    const std::set<int> original(pool.active_ids().begin(), pool.active_ids().end());

    const auto pruned = one_shot_el2n_prune(pool, scores, Criterion::Low);
    CHECK(pruned.size() == 50);
    CHECK(pool.size() == 50);
    // Low-discard keeps the highest-score half
    for (int id : pool.active_ids()) CHECK(id >= 50);

    std::set<int> rebuilt(pruned.begin(), pruned.end());
    for (int id : pool.active_ids()) CHECK(rebuilt.insert(id).second);
    CHECK(rebuilt == original);
}

TEST_CASE("one_shot_el2n_prune: missing score is an error") {
    SetState pool = make_pool({3, 3});
    ScoreTable scores;
    scores[0] = 0.1;
    CHECK_THROWS_AS(one_shot_el2n_prune(pool, scores, Criterion::High), std::invalid_argument);
}

TEST_CASE("criterion and family names round-trip") {
    CHECK(criterion_from_name("low") == Criterion::Low);
    CHECK(criterion_from_name("high") == Criterion::High);
    CHECK_THROWS_AS(criterion_from_name("middling"), std::invalid_argument);
    for (ConstraintFamily f : {ConstraintFamily::None, ConstraintFamily::A, ConstraintFamily::F})
        CHECK(family_from_name(family_name(f)) == f);
    CHECK_THROWS_AS(family_from_name("G"), std::invalid_argument);
}
