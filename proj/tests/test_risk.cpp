#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "stratshrink/errors.hpp"
#include "stratshrink/risk.hpp"

using namespace stratshrink;

namespace {

std::function<double(double, double)> oracle_factor(const EstimatorRule& r, int m) {
    const double md = m;
    switch (r.tag) {
        case RuleTag::BasicML: return [](double s, double y) { return (s + y) / (2 * s); };
        case RuleTag::BasicFlatGB: return [md](double s, double y) { return (s + y + md - 1) / (2 * (s + md - 1)); };
        case RuleTag::BasicShrinkGB: return [md](double s, double y) { return (s + y) / (2 * (s + md - 1)); };
        case RuleTag::XOnlyCZ: return [md](double s, double) { return s / (s + md - 1); };
        case RuleTag::XOnlyML: return [](double, double) { return 1.0; };
        case RuleTag::BetaBayes: {
            const double b = r.beta;
            return [md, b](double s, double y) { return (s + y + md - 1) / ((2 + b) * (s + md - 1)); };
        }
        default: return {};
    }
}

ParamTree basic_tree(const std::vector<double>& theta, double Lambda) {
    std::vector<double> leaves;
    for (double t : theta) leaves.push_back(t * Lambda);
    return build_param_tree(HierarchySpec({static_cast<int>(theta.size())}), leaves);
}

}  // namespace

TEST_CASE("exact basic risks against the double-series oracle") {
    const std::vector<EstimatorRule> rules{EstimatorRule::basic_ml(), EstimatorRule::basic_flat(),
                                           EstimatorRule::basic_shrink(), EstimatorRule::xonly_cz(),
                                           EstimatorRule::xonly_ml(), EstimatorRule::beta_bayes(0.3)};
    for (int m : {1, 2, 3, 5})
        for (double L : {0.1, 1.0, 5.0, 20.0, 50.0})
            for (const auto& r : rules) {
                const auto ex = exact_risk_basic(r, m, L, 1e-12);
                const double ref = oracle::basic_risk_double_series(oracle_factor(r, m), m, L);
                CHECK_MESSAGE(std::abs(ex.value - ref) < 1e-9 * std::max(1.0, ref), r.name(), " m=", m, " L=", L);
                CHECK(ex.truncation_bound <= 1e-12);
            }
}

TEST_CASE("exact risk examples") {
    CHECK(exact_risk_basic(EstimatorRule::xonly_ml(), 4, 7.5, 1e-10).value == 4.0);
    CHECK(exact_risk_basic(EstimatorRule::basic_flat(), 1, 1.0, 1e-12).value ==
          doctest::Approx(0.5 + 0.5 * std::exp(-1.0)).epsilon(1e-12));
    // m = 2 value against 1/2 + E[X/(X+1)]/4 + 3(1-e^-L)/4, X ~ Po(L)
    const double L = 100;
    long double e = 0;
    for (int x = 0; x < 400; ++x) e += oracle::pois_pmf(x, L) * x / (x + 1.0);
    const double want = 0.5 + 0.25 * static_cast<double>(e) + 0.75 * (1 - std::exp(-L));
    const double got = exact_risk_basic(EstimatorRule::basic_flat(), 2, L, 1e-12).value;
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
    CHECK(got == doctest::Approx(1.49752).epsilon(1e-5));
    CHECK(got < 1.5);
    CHECK_THROWS_AS(exact_risk_basic(EstimatorRule::basic_flat(), 2, 1.0, 1e-3), DomainError);
}

TEST_CASE("exact risk differences") {
    CHECK(exact_risk_diff_basic(BasicDiff::ShrinkMinusFlat, 2, 1e-6, 1e-12).value == doctest::Approx(-0.375).epsilon(1e-5));
    CHECK(exact_risk_diff_basic(BasicDiff::ShrinkMinusFlat, 2, 5, 1e-12).value < 0);
    CHECK(exact_risk_diff_basic(BasicDiff::ShrinkMinusCZ, 2, 5, 1e-12).value < 0);
    CHECK(exact_risk_diff_basic(BasicDiff::ShrinkMinusCZ, 3, 50, 1e-12).value < 0);
    for (int m : {2, 3, 5})
        for (double L : {0.1, 2.0, 20.0}) {
            const double a = exact_risk_basic(EstimatorRule::basic_shrink(), m, L, 1e-13).value;
            CHECK(exact_risk_diff_basic(BasicDiff::ShrinkMinusFlat, m, L, 1e-12).value ==
                  doctest::Approx(a - exact_risk_basic(EstimatorRule::basic_flat(), m, L, 1e-13).value).epsilon(1e-9));
            CHECK(exact_risk_diff_basic(BasicDiff::ShrinkMinusCZ, m, L, 1e-12).value ==
                  doctest::Approx(a - exact_risk_basic(EstimatorRule::xonly_cz(), m, L, 1e-13).value).epsilon(1e-9));
        }
    CHECK_THROWS_AS(exact_risk_diff_basic(BasicDiff::ShrinkMinusFlat, 1, 1, 1e-12), CapabilityError);
}

TEST_CASE("Monte Carlo risk") {
    SUBCASE("constant risk of (X1+Y)/2") {
        for (double L : {0.3, 4.0}) {
            const auto r = mc_risk(basic_tree({1}, L), EstimatorRule::half_sum(), LossKind::SSE, 200000, 7);
            CHECK(std::abs(r.mean - 0.5) < 3.5 * r.std_error);
        }
    }
    SUBCASE("agrees with the exact series, whatever theta") {
        for (const auto& theta : {std::vector<double>{0.4, 0.6}, std::vector<double>{0.05, 0.95}}) {
            const auto t = basic_tree(theta, 3);
            const auto r = mc_risk(t, EstimatorRule::basic_flat(), LossKind::SSE, 1000000, 19);
            const double ex = exact_risk_basic(EstimatorRule::basic_flat(), 2, 3, 1e-12).value;
            CHECK(std::abs(r.mean - ex) < 3.5 * r.std_error);
        }
    }
    SUBCASE("identical rules give an exact zero difference") {
        const auto d = mc_risk_diff(basic_tree({0.5, 0.5}, 2), EstimatorRule::basic_shrink(),
                                    EstimatorRule::basic_shrink(), LossKind::SSE, 10000, 3);
        CHECK(d.mean == 0.0);
        CHECK(d.std_error == 0.0);
    }
    SUBCASE("paired difference against the exact difference") {
        const auto d = mc_risk_diff(basic_tree({0.5, 0.5}, 5), EstimatorRule::basic_shrink(), EstimatorRule::basic_flat(),
                                    LossKind::SSE, 1000000, 5);
        const double ex = exact_risk_diff_basic(BasicDiff::ShrinkMinusFlat, 2, 5, 1e-12).value;
        CHECK(d.mean < 0);
        CHECK(std::abs(d.mean - ex) < 3.5 * d.std_error);
    }
    SUBCASE("pair is consistent with its parts") {
        const auto t = basic_tree({0.2, 0.3, 0.5}, 4);
        const auto p = mc_risk_pair(t, EstimatorRule::basic_shrink(), EstimatorRule::xonly_cz(), LossKind::SSE, 50000, 9);
        CHECK(p.diff.mean == doctest::Approx(p.a.mean - p.b.mean).epsilon(1e-10));
        const auto a = mc_risk(t, EstimatorRule::basic_shrink(), LossKind::SSE, 50000, 9);
        CHECK(a.mean == doctest::Approx(p.a.mean).epsilon(1e-12));
    }
    SUBCASE("result does not depend on the thread count") {
        const auto t = build_param_tree(HierarchySpec({2, 3}), {0.5, 1, 2, 0.3, 0.7, 4});
        const auto rule = EstimatorRule::entropy_jeffreys(true);
        const auto one = mc_risk(t, rule, LossKind::Entropy, 30001, 11, McOptions{1});
        const auto three = mc_risk(t, rule, LossKind::Entropy, 30001, 11, McOptions{3});
        const auto eight = mc_risk(t, rule, LossKind::Entropy, 30001, 11, McOptions{8});
        CHECK(one.mean == doctest::Approx(three.mean).epsilon(1e-13));
        CHECK(one.mean == doctest::Approx(eight.mean).epsilon(1e-13));
        CHECK(one.std_error == doctest::Approx(eight.std_error).epsilon(1e-10));
    }
    SUBCASE("seed determinism") {
        const auto t = basic_tree({0.5, 0.5}, 2);
        CHECK(mc_risk(t, EstimatorRule::basic_ml(), LossKind::SSE, 20000, 4).mean ==
              mc_risk(t, EstimatorRule::basic_ml(), LossKind::SSE, 20000, 4).mean);
    }
    SUBCASE("entropy loss refuses rules that can return zero") {
        CHECK_THROWS_AS(mc_risk(basic_tree({0.5, 0.5}, 2), EstimatorRule::basic_ml(), LossKind::Entropy, 1000, 1), DomainError);
    }
    SUBCASE("shape mismatch") {
        CHECK_THROWS_AS(mc_risk(build_param_tree(HierarchySpec({2, 2}), {1, 1, 1, 1}), EstimatorRule::basic_ml(),
                                LossKind::SSE, 1000, 1),
                        ShapeError);
    }
}

TEST_CASE("Hudson identities") {
    const auto one = hudson_check([](std::int64_t) { return 1.0; }, 2, 1e-13);
    CHECK(one.shift.lhs == doctest::Approx(2));
    CHECK(one.shift.rhs == doctest::Approx(2));
    CHECK(!one.reciprocal_applies);
    const auto id = hudson_check([](std::int64_t x) { return static_cast<double>(x); }, 3, 1e-13);
    CHECK(id.shift.lhs == doctest::Approx(9));
    CHECK(id.shift.rhs == doctest::Approx(9));
    CHECK(id.reciprocal_applies);
    const auto r = hudson_check([](std::int64_t x) { return x / (x + 1.0); }, 1.7, 1e-13);
    CHECK(std::abs(r.shift.diff) < 1e-10);
    CHECK(std::abs(r.reciprocal.diff) < 1e-10);
    CHECK_THROWS_AS(hudson_check([](std::int64_t) { return 1.0; }, 0, 1e-12), DomainError);
}

TEST_CASE("Bayes risk of the beta rules") {
    const double r1 = bayes_risk_beta(1, 2, 1e-10).value;
    const double r01 = bayes_risk_beta(0.1, 2, 1e-10).value;
    const double r001 = bayes_risk_beta(0.01, 2, 1e-10).value;
    CHECK(r1 < r01);
    CHECK(r01 < r001);
    CHECK(std::abs(r001 - 1.5) < 0.05);
    CHECK(std::abs(bayes_risk_beta(0.01, 1, 1e-10).value - 0.5) < 0.05);
    CHECK(std::abs(bayes_risk_beta(0.01, 3, 1e-10).value - 2.5) < 0.05);
}

TEST_CASE("Blyth bound terms against frozen high-precision values") {
    // computed once with mpmath quadrature, independent of this library
    struct Frozen {
        int k;
        long w;
        double value;
    };
    const std::vector<Frozen> frozen{
        {1, 1, 0.05621024505186886},      {1, 2, 0.046599746877913656},  {1, 5, 0.013142992300856152},
        {1, 20, 0.00021539693102297632}, {1, 100, 7.436792230222664e-07}, {10, 1, 0.01964051602992201},
        {10, 2, 0.024582864406252326},   {10, 5, 0.019695118573517252},  {10, 20, 0.0031546054873082215},
        {10, 100, 4.701797966096327e-05}, {100, 1, 0.0065416632791378436}, {100, 2, 0.008596099187026394},
        {100, 5, 0.0082605079061552},    {100, 20, 0.003303372897319816}, {100, 100, 0.00041368342658037126},
    };
    for (const auto& f : frozen) CHECK(blyth_term(f.k, f.w) == doctest::Approx(f.value).epsilon(1e-9));

    double partial = 0;
    for (long w = 1; w <= 300; ++w) partial += blyth_term(1, w);
    CHECK(partial == doctest::Approx(0.19952805284040262).epsilon(1e-9));
    const auto b1 = blyth_delta_bound(1, 2, blyth_w_max(1, 1e-6), 1e-6);
    CHECK(b1.value == doctest::Approx(0.19953).epsilon(1e-4));
    CHECK(b1.truncation_bound <= 1e-6);
    CHECK_THROWS_AS(blyth_delta_bound(10, 2, 50, 1e-9), TruncationError);
}
