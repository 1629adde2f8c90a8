#include <doctest.h>

#include <cmath>
#include <numeric>

#include "stratshrink/errors.hpp"
#include "stratshrink/hierarchy.hpp"
#include "stratshrink/rng.hpp"

using namespace stratshrink;

TEST_CASE("param tree from leaf rates") {
    SUBCASE("two equal leaves") {
        const auto t = build_param_tree(HierarchySpec({2}), {1, 1});
        CHECK(t.total() == doctest::Approx(2));
        CHECK(t.theta(1, 0) == doctest::Approx(0.5));
        CHECK(t.theta(1, 1) == doctest::Approx(0.5));
    }
    SUBCASE("two levels") {
        const auto t = build_param_tree(HierarchySpec({2, 2}), {1, 2, 3, 4});
        CHECK(t.total() == doctest::Approx(10));
        CHECK(t.rate(1, 0) == doctest::Approx(3));
        CHECK(t.rate(1, 1) == doctest::Approx(7));
        CHECK(t.theta(1, 0) == doctest::Approx(0.3));
        CHECK(t.theta(1, 1) == doctest::Approx(0.7));
        CHECK(t.rho()[0] == doctest::Approx(1.0 / 3));
        CHECK(t.rho()[1] == doctest::Approx(2.0 / 3));
    }
    SUBCASE("three leaves") {
        const auto t = build_param_tree(HierarchySpec({3}), {0.5, 1.5, 2});
        CHECK(t.total() == doctest::Approx(4));
        CHECK(t.theta(1, 0) == doctest::Approx(0.125));
        CHECK(t.theta(1, 1) == doctest::Approx(0.375));
        CHECK(t.theta(1, 2) == doctest::Approx(0.5));
    }
    CHECK_THROWS_AS(build_param_tree(HierarchySpec({2}), {1, 2, 3}), ShapeError);
    CHECK_THROWS_AS(build_param_tree(HierarchySpec({2}), {1, 0}), DomainError);
    CHECK_THROWS_AS(build_param_tree(HierarchySpec({2}), {1, -2}), DomainError);
    CHECK_THROWS_AS(HierarchySpec(std::vector<int>{}), ShapeError);
    CHECK_THROWS_AS(HierarchySpec({2, 0}), ShapeError);
}

TEST_CASE("param tree invariants on random trees") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> br;
        const int D = 1 + static_cast<int>(rng.next() % 3);
        for (int d = 0; d < D; ++d) br.push_back(1 + static_cast<int>(rng.next() % 4));
        const HierarchySpec spec(br);
        std::vector<double> leaves(spec.leaf_count());
        for (auto& v : leaves) v = 0.01 + 10 * rng.uniform();
        const auto t = build_param_tree(spec, leaves);

        std::size_t nodes = 0;
        for (int d = 0; d <= D; ++d) nodes += spec.width(d);
        CHECK(spec.node_count() == nodes);

        for (int d = 0; d < D; ++d)
            for (std::size_t k = 0; k < spec.width(d); ++k) {
                const auto n = static_cast<std::size_t>(spec.n(d + 1));
                double sum = 0, tsum = 0;
                for (std::size_t j = k * n; j < (k + 1) * n; ++j) {
                    sum += t.rate(d + 1, j);
                    tsum += t.theta(d + 1, j);
                }
                CHECK(std::abs(sum - t.rate(d, k)) <= 1e-12 * t.rate(d, k));
                CHECK(tsum == doctest::Approx(1).epsilon(1e-12));
            }
        for (std::size_t leaf = 0; leaf < spec.leaf_count(); ++leaf) {
            double v = t.total();
            std::size_t idx = leaf;
            std::vector<std::size_t> path(static_cast<std::size_t>(D) + 1);
            for (int d = D; d >= 1; --d) {
                path[static_cast<std::size_t>(d)] = idx;
                idx /= static_cast<std::size_t>(spec.n(d));
            }
            for (int d = 1; d <= D; ++d) v *= t.theta(d, path[static_cast<std::size_t>(d)]);
            CHECK(v == doctest::Approx(t.leaves()[leaf]).epsilon(1e-12));
        }
    }
}

TEST_CASE("addresses") {
    const HierarchySpec spec({2, 3});
    CHECK(spec.node_count() == 1 + 2 + 6);
    for (int d = 0; d <= 2; ++d)
        for (std::size_t k = 0; k < spec.width(d); ++k) CHECK(spec.index(spec.address(d, k)) == k);
    CHECK(spec.address(2, 4) == std::vector<int>{2, 2});
    CHECK(spec.address_string(2, 4) == "(2 2)");
    CHECK_THROWS_AS(spec.index({3}), ShapeError);
}

TEST_CASE("aggregation") {
    SUBCASE("one level from the root") {
        ObservationSet obs(HierarchySpec({2}), 0);
        obs.set_count(0, 0, 5);
        obs.set_count(1, 0, 2);
        obs.set_count(1, 1, 3);
        const auto agg = aggregate(obs);
        CHECK(agg[0][0] == 10);
        CHECK(agg[1][0] == 2);
        CHECK(agg[1][1] == 3);
    }
    SUBCASE("all zero") {
        ObservationSet obs(HierarchySpec({2, 3}), 0);
        for (const auto& row : aggregate(obs))
            for (auto v : row) CHECK(v == 0);
    }
    SUBCASE("two levels from depth 1") {
        ObservationSet obs(HierarchySpec({2, 2}), 1);
        obs.set_count(1, 0, 1);
        obs.set_count(1, 1, 2);
        const std::vector<std::int64_t> leaves{0, 1, 1, 1};
        for (std::size_t k = 0; k < 4; ++k) obs.set_count(2, k, leaves[k]);
        const auto agg = aggregate(obs);
        CHECK(agg[0][0] == 6);
        CHECK(agg[1][0] == 2);
        CHECK(agg[1][1] == 4);
        CHECK_THROWS_AS(obs.set_count(0, 0, 1), ShapeError);
    }
    SUBCASE("re-summation and restriction") {
        const HierarchySpec spec({3, 2});
        const auto t = build_param_tree(spec, {1, 2, 3, 4, 5, 6});
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto obs = sample_observations(t, 0, seed);
            for (int start = 0; start <= 2; ++start) {
                const auto r = obs.restrict_to(start);
                const auto agg = aggregate(r);
                // brute force: every observed count contributes to each ancestor
                std::vector<std::vector<std::int64_t>> ref(3);
                for (int d = 0; d <= 2; ++d) ref[static_cast<std::size_t>(d)].assign(spec.width(d), 0);
                for (int d = start; d <= 2; ++d)
                    for (std::size_t k = 0; k < spec.width(d); ++k) {
                        const auto addr = spec.address(d, k);
                        for (int up = 0; up <= d; ++up) {
                            std::vector<int> prefix(addr.begin(), addr.begin() + up);
                            ref[static_cast<std::size_t>(up)][spec.index(prefix)] += r.count(d, k);
                        }
                    }
                CHECK(agg == ref);
                for (int d = 0; d < start; ++d)
                    for (auto v : r.counts(d)) CHECK(v == 0);
            }
        }
    }
}

TEST_CASE("sampling is deterministic per seed") {
    const auto t = build_param_tree(HierarchySpec({2, 3}), {0.5, 1, 2, 3, 4, 20});
    const auto a = sample_observations(t, 0, 1234), b = sample_observations(t, 0, 1234);
    for (int d = 0; d <= 2; ++d) CHECK(a.counts(d) == b.counts(d));
    const auto c = sample_observations(t, 0, 1235);
    bool differs = false;
    for (int d = 0; d <= 2; ++d) differs = differs || a.counts(d) != c.counts(d);
    CHECK(differs);
}

TEST_CASE("sampling marginals") {
    SUBCASE("root mean over 10^6 seeds") {
        const auto t = build_param_tree(HierarchySpec({2}), {1.5, 2.5});
        const int R = 1000000;
        double sum = 0;
        for (int s = 0; s < R; ++s) sum += static_cast<double>(sample_observations(t, 0, static_cast<std::uint64_t>(s)).count(0, 0));
        const double mean = sum / R;
        CHECK(std::abs(mean - 4) < 4 * 5 * std::sqrt(1.0 / (4.0 * R)));
    }
    SUBCASE("zero fraction for a tiny rate") {
        const auto t = build_param_tree(HierarchySpec({1}), {0.001});
        Rng rng(7);
        ObservationSet obs(t.spec(), 1);
        const int R = 100000;
        int zeros = 0;
        for (int i = 0; i < R; ++i) {
            sample_into(t, rng, obs);
            zeros += obs.count(1, 0) == 0;
        }
        const double p = std::exp(-0.001);
        CHECK(std::abs(zeros / double(R) - p) < 3 * std::sqrt(p * (1 - p) / R));
    }
    SUBCASE("node means at all depths, including large rates") {
        const auto t = build_param_tree(HierarchySpec({2, 2}), {0.3, 7, 12, 40});
        Rng rng(11);
        ObservationSet obs(t.spec(), 0);
        const int R = 100000;
        std::vector<std::vector<double>> sums(3);
        for (int d = 0; d <= 2; ++d) sums[static_cast<std::size_t>(d)].assign(t.spec().width(d), 0.0);
        for (int i = 0; i < R; ++i) {
            sample_into(t, rng, obs);
            for (int d = 0; d <= 2; ++d)
                for (std::size_t k = 0; k < t.spec().width(d); ++k)
                    sums[static_cast<std::size_t>(d)][k] += static_cast<double>(obs.count(d, k));
        }
        for (int d = 0; d <= 2; ++d)
            for (std::size_t k = 0; k < t.spec().width(d); ++k) {
                const double lam = t.rate(d, k);
                CHECK(std::abs(sums[static_cast<std::size_t>(d)][k] / R - lam) < 5 * std::sqrt(lam / R));
            }
    }
    SUBCASE("thinning: sum of child draws against direct parent draws") {
        const auto t = build_param_tree(HierarchySpec({3}), {0.7, 2.2, 9.1});
        Rng rng(21);
        ObservationSet obs(t.spec(), 0);
        const int R = 100000;
        double s1 = 0, s2 = 0, p1 = 0, p2 = 0;
        for (int i = 0; i < R; ++i) {
            sample_into(t, rng, obs);
            const double kids = static_cast<double>(obs.count(1, 0) + obs.count(1, 1) + obs.count(1, 2));
            const double parent = static_cast<double>(obs.count(0, 0));
            s1 += kids;
            s2 += kids * kids;
            p1 += parent;
            p2 += parent * parent;
        }
        const double mk = s1 / R, mp = p1 / R, vk = s2 / R - mk * mk, vp = p2 / R - mp * mp;
        const double lam = t.total();
        CHECK(std::abs(mk - mp) < 5 * std::sqrt(2 * lam / R));
        // var of a sample variance of Po(lam) is about (lam + 2 lam^2)/R
        CHECK(std::abs(vk - vp) < 5 * std::sqrt(2 * (lam + 2 * lam * lam) / R));
    }
}

TEST_CASE("single-child levels are allowed") {
    const auto t = build_param_tree(HierarchySpec({1, 2}), {1, 3});
    CHECK(t.theta(1, 0) == doctest::Approx(1));
    CHECK(t.rate(1, 0) == doctest::Approx(4));
}

TEST_CASE("views and csv dump") {
    ObservationSet obs(HierarchySpec({2}), 0);
    obs.set_count(0, 0, 5);
    obs.set_count(1, 0, 2);
    obs.set_count(1, 1, 3);
    const auto b = basic_view(obs);
    CHECK(b.y == 5);
    CHECK(b.x == std::vector<std::int64_t>{2, 3});
    CHECK(observations_csv(obs) == "depth,address,count\n0,(),5\n1,(1),2\n1,(2),3\n");

    ObservationSet m(HierarchySpec({2, 2}), 1);
    m.set_count(1, 1, 4);
    m.set_count(2, 3, 6);
    const auto mv = multi_view(m);
    CHECK(!mv.z);
    CHECK(mv.y == std::vector<std::int64_t>{0, 4});
    CHECK(mv.x[1] == std::vector<std::int64_t>{0, 6});
    CHECK_THROWS_AS(basic_view(m), ShapeError);
}
