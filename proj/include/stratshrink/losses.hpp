#pragma once

#include <vector>

#include "stratshrink/estimators.hpp"
#include "stratshrink/hierarchy.hpp"
#include "stratshrink/priors.hpp"

namespace stratshrink {

double sse_loss(const RateEstimate& d, const std::vector<double>& lambda);
double entropy_loss(const RateEstimate& delta, const std::vector<double>& lambda);
// Entropy loss summed over every depth, with estimate aggregates rebuilt from the leaves.
double balanced_entropy_loss(const RateEstimate& delta, const ParamTree& lambda);
// Per-depth terms of the balanced loss (index d = 0..D).
std::vector<double> balanced_entropy_terms(const RateEstimate& delta, const ParamTree& lambda);

// Training exposure r and prediction exposure s per node, and the
// interpolation t(tau) = r + s * tau^power (power > 0 keeps it monotone).
struct PredictiveWeights {
    std::vector<std::vector<double>> r;
    std::vector<std::vector<double>> s;
    double path_power = 1.0;

    static PredictiveWeights uniform(const HierarchySpec& spec, double r, double s, double power = 1.0);
    double t(int d, std::size_t k, double tau) const;
    double dt(int d, std::size_t k, double tau) const;
    void validate(const HierarchySpec& spec) const;
};

double plugin_predictive_kl(const RateEstimate& delta, const ParamTree& lambda, const PredictiveWeights& w);

struct PredictiveCheck {
    double direct = 0.0;
    double path = 0.0;
    double truncation_bound = 0.0;
};

// Bayes predictive KL for hierarchies with a single leaf (n_d = 1 everywhere,
// at most 3 nodes), computed two independent ways.
PredictiveCheck bayes_predictive_kl_check(const PriorExponents& prior, const ParamTree& lambda,
                                          const PredictiveWeights& w, int tau_panels, double tol = 1e-12);

// E over Y ~ prod Po(s lambda) of log p(Y|lambda)/p(Y|delta), by enumeration
// of each node's count; returns (value, tail bound).
std::pair<double, double> plugin_kl_by_enumeration(const RateEstimate& delta, const ParamTree& lambda,
                                                   const PredictiveWeights& w, double tol);

}  // namespace stratshrink
