#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "stratshrink/estimators.hpp"
#include "stratshrink/hierarchy.hpp"
#include "stratshrink/series.hpp"

namespace stratshrink {

struct RiskEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t reps = 0;
    std::uint64_t seed = 0;
};

struct PairedRisk {
    RiskEstimate a, b, diff;
};

struct McOptions {
    // Worker threads; 0 means hardware concurrency. Results do not depend on it.
    unsigned threads = 0;
};

RiskEstimate mc_risk(const ParamTree& tree, const EstimatorRule& rule, LossKind loss, std::uint64_t reps,
                     std::uint64_t seed, const McOptions& opt = {});
RiskEstimate mc_risk_diff(const ParamTree& tree, const EstimatorRule& a, const EstimatorRule& b, LossKind loss,
                          std::uint64_t reps, std::uint64_t seed, const McOptions& opt = {});
// Both risks and their paired difference from the same draws.
PairedRisk mc_risk_pair(const ParamTree& tree, const EstimatorRule& a, const EstimatorRule& b, LossKind loss,
                        std::uint64_t reps, std::uint64_t seed, const McOptions& opt = {});

// Exact SSE risk of a basic-model rule as a series over X. ~ Po(Lambda).
ExactValue exact_risk_basic(const EstimatorRule& rule, int m, double Lambda, double tol);

enum class BasicDiff { ShrinkMinusFlat, ShrinkMinusCZ };
ExactValue exact_risk_diff_basic(BasicDiff which, int m, double Lambda, double tol);

struct HudsonSide {
    double lhs = 0.0;
    double rhs = 0.0;
    double diff = 0.0;
    double truncation_bound = 0.0;
};

struct HudsonReport {
    HudsonSide shift;               // E[lambda phi(X)] vs E[X phi(X-1)]
    HudsonSide reciprocal;          // E[phi(X)/lambda] vs E[phi(X+1)/(X+1)]
    bool reciprocal_applies = false;  // needs phi(0) = 0
};

// |phi(x)| <= growth * (1+x)^degree is enforced on the summed support.
HudsonReport hudson_check(const std::function<double(std::int64_t)>& phi, double lambda, double tol,
                          double growth = 1.0, int degree = 2);

// Bayes risk of BetaBayes(beta) under its own prior: the exact risk
// integrated over Lambda ~ Ga(m, beta).
ExactValue bayes_risk_beta(double beta, int m, double tol);

struct BlythTerm {
    long w;
    double value;
};

// 2 sum_w 2^w/Gamma(w+1) {int h h' L^w e^{-2L}}^2 / int h^2 L^{w-1} e^{-2L},
// summed to w_max plus a rigorous tail bound. m only enters the refined
// variant, which keeps the binomial weight the simple bound drops.
ExactValue blyth_delta_bound(int k, int m, long w_max, double tol, bool refined = false);
// Smallest w_max whose tail bound is below tol.
long blyth_w_max(int k, double tol);
double blyth_term(int k, long w);

}  // namespace stratshrink
