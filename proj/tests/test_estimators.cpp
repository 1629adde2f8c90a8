#include <doctest.h>

#include <cmath>
#include <numeric>

#include "stratshrink/errors.hpp"
#include "stratshrink/estimators.hpp"
#include "stratshrink/rng.hpp"

using namespace stratshrink;

namespace {

void check_vec(const std::vector<double>& got, const std::vector<double>& want, double eps = 1e-14) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(eps));
}

ObservationSet basic_obs(const std::vector<std::int64_t>& x, std::int64_t y) {
    ObservationSet o(HierarchySpec({static_cast<int>(x.size())}), 0);
    o.set_count(0, 0, y);
    for (std::size_t i = 0; i < x.size(); ++i) o.set_count(1, i, x[i]);
    return o;
}

// Two-level set; z < 0 means no root count.
ObservationSet multi_obs(int m, int n, const std::vector<std::int64_t>& x, const std::vector<std::int64_t>& y,
                         std::int64_t z) {
    ObservationSet o(HierarchySpec({m, n}), z < 0 ? 1 : 0);
    if (z >= 0) o.set_count(0, 0, z);
    for (std::size_t i = 0; i < y.size(); ++i) o.set_count(1, i, y[i]);
    for (std::size_t k = 0; k < x.size(); ++k) o.set_count(2, k, x[k]);
    return o;
}

}  // namespace

TEST_CASE("basic-model rules") {
    const BasicObs o{{2, 3}, 5};
    check_vec(estimate_basic(o, EstimatorRule::basic_ml()), {2, 3});
    check_vec(estimate_basic(o, EstimatorRule::basic_flat()), {11.0 / 6, 11.0 / 4});
    check_vec(estimate_basic(o, EstimatorRule::basic_shrink()), {5.0 / 3, 5.0 / 2});
    check_vec(estimate_basic(o, EstimatorRule::xonly_cz()), {5.0 / 3, 5.0 / 2});
    check_vec(estimate_basic(o, EstimatorRule::xonly_ml()), {2, 3});
    CHECK_THROWS_AS(estimate_basic(o, EstimatorRule::half_sum()), CapabilityError);
    check_vec(estimate_basic(BasicObs{{3}, 4}, EstimatorRule::half_sum()), {3.5});
    CHECK_THROWS_AS(estimate_basic(o, EstimatorRule::multi_ml()), CapabilityError);
    CHECK_THROWS_AS(EstimatorRule::beta_bayes(0), DomainError);
    CHECK_THROWS_AS(EstimatorRule::blyth(0), DomainError);
}

TEST_CASE("shrink is flat scaled toward the origin") {
    Rng rng(1);
    for (int t = 0; t < 200; ++t) {
        const int m = 1 + static_cast<int>(rng.next() % 6);
        BasicObs o;
        for (int i = 0; i < m; ++i) o.x.push_back(static_cast<std::int64_t>(rng.next() % 7));
        o.y = static_cast<std::int64_t>(rng.next() % 9);
        const double s = static_cast<double>(std::accumulate(o.x.begin(), o.x.end(), std::int64_t{0}) + o.y);
        const auto flat = estimate_basic(o, EstimatorRule::basic_flat());
        const auto shrink = estimate_basic(o, EstimatorRule::basic_shrink());
        if (s + m - 1 == 0) continue;
        const double factor = 1.0 - (m - 1) / (s + m - 1);
        for (int i = 0; i < m; ++i) {
            CHECK(shrink[i] == doctest::Approx(factor * flat[i]).epsilon(1e-13));
            CHECK(shrink[i] <= flat[i]);
        }
    }
}

TEST_CASE("permutation equivariance of the basic rules") {
    Rng rng(2);
    const std::vector<EstimatorRule> rules{EstimatorRule::basic_ml(), EstimatorRule::basic_flat(),
                                           EstimatorRule::basic_shrink(), EstimatorRule::xonly_cz(),
                                           EstimatorRule::beta_bayes(0.7), EstimatorRule::blyth(3)};
    for (int t = 0; t < 50; ++t) {
        BasicObs o{{}, static_cast<std::int64_t>(rng.next() % 9)};
        for (int i = 0; i < 4; ++i) o.x.push_back(static_cast<std::int64_t>(rng.next() % 7));
        BasicObs p = o;
        std::swap(p.x[0], p.x[3]);
        std::swap(p.x[1], p.x[2]);
        for (const auto& r : rules) {
            const auto a = estimate_basic(o, r), b = estimate_basic(p, r);
            CHECK(a[0] == doctest::Approx(b[3]));
            CHECK(a[1] == doctest::Approx(b[2]));
            CHECK(a[2] == doctest::Approx(b[1]));
            CHECK(a[3] == doctest::Approx(b[0]));
        }
    }
}

TEST_CASE("blyth rule") {
    CHECK(blyth_h(1, 0.0) == doctest::Approx(1));
    CHECK(blyth_h(1, std::exp(1.0) - 1) == doctest::Approx(1 - 1 / std::log(std::exp(1.0) + 1)).epsilon(1e-14));
    CHECK(blyth_h(1, std::exp(1.0) - 1) == doctest::Approx(0.23854).epsilon(1e-4));
    for (int k : {1, 5, 50})
        for (double L = 0; L < 200; L += 0.37) {
            const double h = blyth_h(k, L);
            CHECK(h > 0);
            CHECK(h <= 1);
            // derivative against a central difference
            const double e = 1e-5 * (1 + L);
            if (L > e) CHECK(blyth_h_prime(k, L) == doctest::Approx((blyth_h(k, L + e) - blyth_h(k, L - e)) / (2 * e)).epsilon(1e-6));
        }
    bool flagged = false;
    const auto z = estimate_basic(BasicObs{{0, 0}, 0}, EstimatorRule::blyth(2), &flagged);
    CHECK(flagged);
    check_vec(z, {0, 0});
    // h_k decreasing keeps the ratio below w/2; h_k -> 1 as k grows pushes it up toward w/2
    double prev = 0;
    for (int k : {1, 10, 1000, 1000000}) {
        const double r = blyth_ratio(k, 12);
        CHECK(r < 6);
        CHECK(r > prev);
        prev = r;
    }
}

TEST_CASE("multi-set rules") {
    MultiObs single{{{2, 3}}, {5}, std::nullopt};
    const auto ms = estimate_multi(single, EstimatorRule::multi_shrink());
    check_vec(ms[0], {5.0 / 3, 5.0 / 2});
    check_vec(ms[0], estimate_basic(BasicObs{{2, 3}, 5}, EstimatorRule::basic_shrink()));

    MultiObs two{{{1, 1}, {2, 2}}, {2, 4}, std::nullopt};
    const auto mf = estimate_multi(two, EstimatorRule::multi_flat());
    check_vec(mf[0], {5.0 / 6, 5.0 / 6});
    check_vec(mf[1], {9.0 / 5, 9.0 / 5});

    MultiObs zero{{{0, 0}, {0, 0, 0}}, {0, 0}, std::nullopt};
    for (const auto& g : estimate_multi(zero, EstimatorRule::multi_ml()))
        for (double v : g) CHECK(v == 0);
    CHECK_THROWS_AS(estimate_multi(MultiObs{{{1}}, {1, 2}, std::nullopt}, EstimatorRule::multi_ml()), ShapeError);
}

TEST_CASE("entropy rules") {
    MultiObs o{{{1, 2}}, {3}, std::nullopt};
    check_vec(estimate_entropy_jeffreys(o, false)[0], {1.3125, 2.1875});

    MultiObs z{{{0}}, {0}, std::int64_t{0}};
    check_vec(estimate_entropy(z, 1, {1}, true)[0], {1.0 / 3});
    CHECK_THROWS_AS(estimate_entropy(o, 1, {1}, true), ShapeError);

    Rng rng(4);
    for (int t = 0; t < 100; ++t) {
        MultiObs g{{{}, {}, {}}, {}, std::nullopt};
        std::vector<double> a;
        double tot = 0;
        for (auto& grp : g.x) {
            const int n = 1 + static_cast<int>(rng.next() % 4);
            for (int j = 0; j < n; ++j) {
                grp.push_back(static_cast<std::int64_t>(rng.next() % 6));
                tot += static_cast<double>(grp.back());
            }
            g.y.push_back(static_cast<std::int64_t>(rng.next() % 6));
            tot += static_cast<double>(g.y.back());
            a.push_back(0.5 + 3 * rng.uniform());
        }
        const double alpha = a[0] + a[1] + a[2];
        const auto est = flatten(estimate_entropy(g, alpha, a, false));
        double sum = 0;
        for (double v : est) {
            CHECK(v > 0);
            sum += v;
        }
        CHECK(sum == doctest::Approx((tot + alpha) / 2).epsilon(1e-13));
    }
}

TEST_CASE("general rule") {
    const auto o = basic_obs({2, 3}, 5);
    const HierarchySpec spec({2});
    check_vec(estimate_general(o, uniform_exponents(spec, {1, 0.5})), {5.5 * 2.5 / 6, 5.5 * 3.5 / 6});

    ObservationSet leaves(spec, 1);
    leaves.set_count(1, 0, 2);
    leaves.set_count(1, 1, 3);
    check_vec(estimate_general(leaves, uniform_exponents(spec, {1, 1})), {18.0 / 7, 24.0 / 7});

    const HierarchySpec deep({2, 3});
    for (int dp = 0; dp <= 2; ++dp) {
        ObservationSet empty(deep, dp);
        const auto prior = uniform_exponents(deep, {1.7, 0.4, 2.5});
        const auto est = estimate_general(empty, prior);
        for (double v : est) CHECK(v == doctest::Approx(1.7 / (3 - dp) / 6).epsilon(1e-14));
    }
}

TEST_CASE("conjugate engine reproduces the closed forms") {
    const HierarchySpec spec({2});
    const auto o = basic_obs({2, 3}, 5);
    check_vec(conjugate_engine(o, flat_lambda(spec), LossKind::SSE), {11.0 / 6, 11.0 / 4});
    check_vec(conjugate_engine(o, flat_theta_lambda(spec), LossKind::SSE), {5.0 / 3, 5.0 / 2});
    check_vec(conjugate_engine(o, beta_exponents(spec, BetaPrior{0.4}), LossKind::SSE),
              estimate_basic(basic_view(o), EstimatorRule::beta_bayes(0.4)));

    Rng rng(6);
    for (int t = 0; t < 300; ++t) {
        const int n = 1 + static_cast<int>(rng.next() % 4);
        std::vector<std::int64_t> x(2 * static_cast<std::size_t>(n)), y(2);
        for (auto& v : x) v = 1 + static_cast<std::int64_t>(rng.next() % 6);
        for (auto& v : y) v = static_cast<std::int64_t>(rng.next() % 6);
        const std::int64_t zc = static_cast<std::int64_t>(rng.next() % 6);
        const HierarchySpec two({2, n});

        const auto noz = multi_obs(2, n, x, y, -1);
        const auto mv = multi_view(noz);
        check_vec(conjugate_engine(noz, flat_lambda(two), LossKind::SSE),
                  flatten(estimate_multi(mv, EstimatorRule::multi_flat())), 1e-12);
        check_vec(conjugate_engine(noz, flat_theta_lambda(two), LossKind::SSE),
                  flatten(estimate_multi(mv, EstimatorRule::multi_shrink())), 1e-12);

        const auto withz = multi_obs(2, n, x, y, zc);
        const std::vector<double> a{0.5 + rng.uniform(), 0.5 + rng.uniform()};
        const double alpha = 0.5 + 2 * rng.uniform();
        check_vec(conjugate_engine(withz, stick_breaking(two, alpha, a), LossKind::Entropy),
                  flatten(estimate_entropy(multi_view(withz), alpha, a, true)), 1e-12);
        check_vec(conjugate_engine(withz, jeffreys_exponents(two), LossKind::Entropy),
                  flatten(estimate_entropy_jeffreys(multi_view(withz), true)), 1e-12);
        check_vec(conjugate_engine(noz, jeffreys_exponents(two), LossKind::Entropy),
                  flatten(estimate_entropy_jeffreys(mv, false)), 1e-12);

        for (int D0 = 1; D0 <= 2; ++D0)
            for (int dp = 0; dp <= D0; ++dp) {
                const auto r = withz.restrict_to(dp);
                const auto prior = build_a_family(two, D0, dp);
                check_vec(conjugate_engine(r, prior, LossKind::BalancedEntropy), estimate_general(r, prior), 1e-12);
            }
    }
}

TEST_CASE("conjugate engine domain errors") {
    const HierarchySpec spec({2});
    CHECK_THROWS_AS(conjugate_engine(basic_obs({0, 3}, 5), flat_theta_lambda(spec), LossKind::SSE), DomainError);
    CHECK_THROWS_AS(conjugate_engine(basic_obs({0, 0}, 0), flat_theta_lambda(spec), LossKind::SSE), DomainError);
    CHECK_THROWS_AS(conjugate_engine(basic_obs({1, 1}, 1), flat_theta_lambda(HierarchySpec({2, 2})), LossKind::SSE),
                    ShapeError);
}

TEST_CASE("rule metadata") {
    const HierarchySpec spec({2, 2});
    CHECK(EstimatorRule::entropy_jeffreys(true).start_depth(spec) == 0);
    CHECK(EstimatorRule::entropy_jeffreys(false).start_depth(spec) == 1);
    CHECK(EstimatorRule::general(jeffreys_exponents(spec), 2).start_depth(spec) == 2);
    CHECK(EstimatorRule::multi_shrink().start_depth(spec) == 1);
    CHECK(!EstimatorRule::basic_ml().always_positive());
    CHECK(EstimatorRule::entropy_stick(1, {1, 1}, false).always_positive());
    CHECK(EstimatorRule::beta_bayes(0.5).name() == "BetaBayes(0.5)");
}
