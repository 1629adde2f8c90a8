#include "stratshrink/risk.hpp"

#include <algorithm>
#include <cmath>

#include "stratshrink/errors.hpp"

namespace stratshrink {

namespace {

void check_m_lambda(int m, double Lambda) {
    if (m < 1) throw DomainError("m must be >= 1");
    if (!(Lambda > 0.0) || !std::isfinite(Lambda)) throw DomainError("Lambda must be positive and finite");
}

ExactValue beta_bayes_risk(double beta, int m, double L, double tol) {
    const double c = 1.0 / (2.0 + beta);
    const double md = m;
    auto f = [&](std::int64_t xi) {
        const double x = static_cast<double>(xi);
        const double q = xi == 0 ? 0.0 : x / (x + md - 1.0);
        return c * c * (3.0 * L + md + L / (x + md)) - (2.0 * c - c * c) * L * q + (1.0 - 2.0 * c) * L;
    };
    return poisson_expectation(f, L, tol, 3.0 * L + md + 1.0, 0);
}

ExactValue delta2(int m, double L, double tol) {
    const double md = m;
    auto f = [&](std::int64_t xi) {
        const double x = static_cast<double>(xi);
        const double q = xi == 0 ? 0.0 : (x / 2.0) / (x + md - 1.0);
        return (md - 1.0) * ((md - 1.0) / 4.0 / (x + md) - 0.5 + q);
    };
    return poisson_expectation(f, L, tol, 2.0 * md, 0);
}

ExactValue delta3(int m, double L, double tol) {
    const double md = m;
    auto J = [&](std::int64_t xi) {
        if (xi == 0) return -0.75 / md;  // only the (x+1)^2/(x+m) term survives
        const double x = static_cast<double>(xi);
        return 0.25 * x / (x + md - 1.0) + 1.5 * x * x / (x + md - 1.0) - 0.75 * (x + 1.0) * (x + 1.0) / (x + md) -
               0.75 * x * (x - 1.0) / (x + md - 2.0);
    };
    return poisson_expectation(J, L, tol, 4.0, 1);
}

}  // namespace

ExactValue exact_risk_basic(const EstimatorRule& rule, int m, double Lambda, double tol) {
    check_m_lambda(m, Lambda);
    if (!(tol > 0.0) || tol > 1e-8) throw DomainError("series tolerance must lie in (0, 1e-8]");
    const double md = m;
    const double L = Lambda;
    switch (rule.tag) {
        case RuleTag::XOnlyML: return {md, 0.0};
        case RuleTag::BasicFlatGB: return beta_bayes_risk(0.0, m, L, tol / 2.0);
        case RuleTag::BetaBayes: return beta_bayes_risk(rule.beta, m, L, tol / 2.0);
        case RuleTag::BasicShrinkGB: {
            auto flat = beta_bayes_risk(0.0, m, L, tol / 2.0);
            if (m == 1) return flat;
            auto d2 = delta2(m, L, tol / 2.0);
            return {flat.value + d2.value, flat.truncation_bound + d2.truncation_bound};
        }
        case RuleTag::XOnlyCZ: {
            const double s = (md - 1.0) * (md - 1.0);
            auto f = [&](std::int64_t xi) {
                if (m == 1) return 0.0;
                const double x = static_cast<double>(xi);
                return s / (x + md) - 2.0 * s / (x + md - 1.0);
            };
            auto r = poisson_expectation(f, L, tol, 3.0 * (md - 1.0) + 1.0, 0);
            return {md + r.value, r.truncation_bound};
        }
        case RuleTag::BasicML: {
            auto f = [&](std::int64_t xi) {
                const double x = static_cast<double>(xi);
                const double head = (x + md) / 4.0 * (1.0 + 2.0 * L / (x + 1.0) + (L + L * L) / ((x + 1.0) * (x + 1.0)));
                return head - (xi >= 1 ? x + L : 0.0) + L;
            };
            const double growth = md * (1.0 + 3.0 * L + L * L) / 4.0 + 1.0 + 2.0 * L;
            return poisson_expectation(f, L, tol, growth, 1);
        }
        default: throw CapabilityError("no exact risk series for " + rule.name());
    }
}

ExactValue exact_risk_diff_basic(BasicDiff which, int m, double Lambda, double tol) {
    check_m_lambda(m, Lambda);
    if (m < 2) throw CapabilityError("risk-difference series are derived for m >= 2 only");
    if (!(tol > 0.0)) throw DomainError("tolerance must be > 0");
    return which == BasicDiff::ShrinkMinusFlat ? delta2(m, Lambda, tol) : delta3(m, Lambda, tol);
}

HudsonReport hudson_check(const std::function<double(std::int64_t)>& phi, double lambda, double tol, double growth,
                          int degree) {
    if (!(lambda > 0.0)) throw DomainError("lambda must be > 0");
    auto capped = [&](std::int64_t x) {
        const double v = phi(x);
        if (!std::isfinite(v) || std::abs(v) > growth * std::pow(1.0 + static_cast<double>(x), degree))
            throw CapabilityError("phi exceeds its growth cap at x = " + std::to_string(x));
        return v;
    };
    HudsonReport rep;
    auto l1 = poisson_expectation([&](std::int64_t x) { return lambda * capped(x); }, lambda, tol, lambda * growth, degree);
    auto r1 = poisson_expectation(
        [&](std::int64_t x) { return x == 0 ? 0.0 : static_cast<double>(x) * capped(x - 1); }, lambda, tol, growth,
        degree + 1);
    rep.shift = {l1.value, r1.value, std::abs(l1.value - r1.value), l1.truncation_bound + r1.truncation_bound};
    rep.reciprocal_applies = capped(0) == 0.0;
    if (rep.reciprocal_applies) {
        auto l2 = poisson_expectation([&](std::int64_t x) { return capped(x) / lambda; }, lambda, tol, growth / lambda,
                                      degree);
        auto r2 = poisson_expectation(
            [&](std::int64_t x) { return capped(x + 1) / (static_cast<double>(x) + 1.0); }, lambda, tol,
            growth * std::pow(2.0, degree), degree);
        rep.reciprocal = {l2.value, r2.value, std::abs(l2.value - r2.value),
                          l2.truncation_bound + r2.truncation_bound};
    }
    return rep;
}

ExactValue bayes_risk_beta(double beta, int m, double tol) {
    if (!(beta > 0.0)) throw DomainError("beta must be > 0");
    if (m < 1) throw DomainError("m must be >= 1");
    const double series_tol = std::min(tol, 1e-10);
    auto log_risk = [&](double L) { return std::log(beta_bayes_risk(beta, m, L, series_tol).value); };
    double rel = 0.0;
    const double v = gamma_expectation_log(log_risk, m, beta, &rel, 1e-10, 10);
    return {v, series_tol + rel * v};
}

namespace {

double blyth_c(int k) {
    const double l = std::log1p(static_cast<double>(k));
    return k * (1.0 + 1.0 / l) / l;
}

// (1/2) E_{Bin(w,1/2)}[x(x+1)/(x+m-1)^2]: the factor the refined bound keeps.
double binomial_weight(long w, int m) {
    const double wd = static_cast<double>(w);
    const double spread = 20.0 * std::sqrt(wd) + 5.0;
    const long lo = std::max(0L, static_cast<long>(wd / 2.0 - spread));
    const long hi = std::min(w, static_cast<long>(wd / 2.0 + spread) + 1);
    const double lw = std::lgamma(wd + 1.0) - wd * std::log(2.0);
    double s = 0.0;
    for (long x = std::max(lo, 1L); x <= hi; ++x) {
        const double xd = static_cast<double>(x);
        const double p = std::exp(lw - std::lgamma(xd + 1.0) - std::lgamma(wd - xd + 1.0));
        s += p * xd * (xd + 1.0) / ((xd + m - 1.0) * (xd + m - 1.0));
    }
    return 0.5 * s;
}

}  // namespace

double blyth_term(int k, long w) {
    if (w < 1) throw DomainError("w must be >= 1");
    auto log_hhp = [k](double L) { return std::log(blyth_h(k, L)) + std::log(-blyth_h_prime(k, L)); };
    auto log_h2 = [k](double L) { return 2.0 * std::log(blyth_h(k, L)); };
    double r1 = 0.0, r2 = 0.0;
    const double e1 = gamma_expectation_log(log_hhp, static_cast<double>(w) + 1.0, 2.0, &r1, 1e-11);
    const double e2 = gamma_expectation_log(log_h2, static_cast<double>(w), 2.0, &r2, 1e-11);
    if (r1 > 1e-8 || r2 > 1e-8) throw NumericError("Blyth quadrature did not converge at w = " + std::to_string(w));
    return 0.5 * static_cast<double>(w) * e1 * e1 / e2;
}

long blyth_w_max(int k, double tol) {
    const double c = blyth_c(k);
    // tail beyond W is at most 4 C^2 / ((W-1)(W-2))
    const double need = 4.0 * c * c / tol;
    long W = 4;
    while (static_cast<double>(W - 1) * static_cast<double>(W - 2) <= need) W = std::max(W + 1, static_cast<long>(W * 1.05));
    return W;
}

ExactValue blyth_delta_bound(int k, int m, long w_max, double tol, bool refined) {
    if (k < 1) throw DomainError("k must be >= 1");
    if (m < 1) throw DomainError("m must be >= 1");
    if (w_max < 4) throw DomainError("w_max must be >= 4");
    const double c = blyth_c(k);
    const double tail = 4.0 * c * c / (static_cast<double>(w_max - 1) * static_cast<double>(w_max - 2));
    if (tail >= tol)
        throw TruncationError("Blyth tail bound at w_max = " + std::to_string(w_max) + " exceeds tolerance", tail);
    long double sum = 0.0L;
    for (long w = 1; w <= w_max; ++w) {
        double t = blyth_term(k, w);
        if (refined) t *= binomial_weight(w, m);
        sum += t;
    }
    return {static_cast<double>(sum) + tail, tail};
}

}  // namespace stratshrink
