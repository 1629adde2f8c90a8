#pragma once

#include <string>
#include <vector>

#include "stratshrink/hierarchy.hpp"
#include "stratshrink/priors.hpp"

namespace stratshrink {

enum class RuleTag {
    BasicML,
    BasicFlatGB,
    BasicShrinkGB,
    XOnlyML,
    XOnlyCZ,
    BetaBayes,
    BlythK,
    // (X_1 + Y)/2, the usual m = 1 estimator
    HalfSum,
    MultiML,
    MultiFlatGB,
    MultiShrinkGB,
    EntropyStick,
    EntropyJeffreys,
    GeneralGB,
};

struct EstimatorRule {
    RuleTag tag = RuleTag::BasicML;
    double beta = 0.0;
    int k = 1;
    double alpha = 0.0;
    std::vector<double> a;
    bool with_z = false;
    PriorExponents prior;
    int dprime = 0;

    static EstimatorRule of(RuleTag t) {
        EstimatorRule r;
        r.tag = t;
        return r;
    }
    static EstimatorRule basic_ml() { return of(RuleTag::BasicML); }
    static EstimatorRule basic_flat() { return of(RuleTag::BasicFlatGB); }
    static EstimatorRule basic_shrink() { return of(RuleTag::BasicShrinkGB); }
    static EstimatorRule xonly_ml() { return of(RuleTag::XOnlyML); }
    static EstimatorRule xonly_cz() { return of(RuleTag::XOnlyCZ); }
    static EstimatorRule half_sum() { return of(RuleTag::HalfSum); }
    static EstimatorRule beta_bayes(double beta);
    static EstimatorRule blyth(int k);
    static EstimatorRule multi_ml() { return of(RuleTag::MultiML); }
    static EstimatorRule multi_flat() { return of(RuleTag::MultiFlatGB); }
    static EstimatorRule multi_shrink() { return of(RuleTag::MultiShrinkGB); }
    static EstimatorRule entropy_stick(double alpha, std::vector<double> a, bool with_z);
    static EstimatorRule entropy_jeffreys(bool with_z);
    static EstimatorRule general(PriorExponents prior, int dprime);

    std::string name() const;
    // Shallowest depth the rule reads.
    int start_depth(const HierarchySpec& spec) const;
    // True when every output is strictly positive for every input.
    bool always_positive() const;
};

using RateEstimate = std::vector<double>;
using RaggedEstimate = std::vector<std::vector<double>>;

// `flagged` is set when BlythK meets X.+Y = 0 and returns its zero limit.
RateEstimate estimate_basic(const BasicObs& obs, const EstimatorRule& rule, bool* flagged = nullptr);
RaggedEstimate estimate_multi(const MultiObs& obs, const EstimatorRule& rule);
RaggedEstimate estimate_entropy(const MultiObs& obs, double alpha, const std::vector<double>& a, bool with_z);
RaggedEstimate estimate_entropy_jeffreys(const MultiObs& obs, bool with_z);
// Uses obs.start_depth() as D'.
RateEstimate estimate_general(const ObservationSet& obs, const PriorExponents& prior);

// I_k(w) / I_k(w-1) with I_k(w) = int h_k^2 L^w e^{-2L} dL, for w >= 1.
double blyth_ratio(int k, long w);
double blyth_h(int k, double lambda);
double blyth_h_prime(int k, double lambda);

enum class LossKind { SSE, Entropy, BalancedEntropy };

// Bayes rule from the Gamma/Dirichlet posterior: posterior mean for the
// entropy losses, 1/E[1/lambda | data] for SSE.
RateEstimate conjugate_engine(const ObservationSet& obs, const PriorExponents& prior, LossKind loss);

std::vector<double> flatten(const RaggedEstimate& r);

}  // namespace stratshrink
