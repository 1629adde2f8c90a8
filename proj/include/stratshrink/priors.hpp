#pragma once

#include <vector>

#include "stratshrink/hierarchy.hpp"

namespace stratshrink {

// Prior density proportional to
//   Lambda^{root-1} exp(-root_rate*Lambda) * prod_nodes theta_node^{a_node-1}
// in the (Lambda, theta) chart. Exponents are stored per node so that the
// two-level stick-breaking family with group-specific a_i fits the same type.
struct PriorExponents {
    double root = 1.0;
    double root_rate = 0.0;
    // node[d][k] for d = 1..D; node[0] is unused.
    std::vector<std::vector<double>> node;

    double a(int d, std::size_t k) const { return node[static_cast<std::size_t>(d)][k]; }
    // Per-depth exponents (a_0, a_1, ..., a_D); throws if some depth is not uniform.
    std::vector<double> per_depth() const;
    bool operator==(const PriorExponents&) const = default;
};

struct BetaPrior {
    double beta = 1.0;
};

PriorExponents uniform_exponents(const HierarchySpec& spec, const std::vector<double>& a);
PriorExponents jeffreys_exponents(const HierarchySpec& spec);
PriorExponents build_a_family(const HierarchySpec& spec, int D0, int Dprime);
// Two-level stick-breaking prior: alpha on Lambda, a_i on theta_i, 1/2 on rho.
PriorExponents stick_breaking(const HierarchySpec& spec, double alpha, const std::vector<double>& a);
// Flat in the leaf rates, written in the (Lambda, theta) chart.
PriorExponents flat_lambda(const HierarchySpec& spec);
// Flat in (Lambda, theta).
PriorExponents flat_theta_lambda(const HierarchySpec& spec);
// Product of exponentials beta^m exp(-beta sum lambda), in the (Lambda, theta) chart.
PriorExponents beta_exponents(const HierarchySpec& spec, const BetaPrior& prior);

double log_prior_density(const PriorExponents& prior, const ParamTree& point);
// m log beta - beta Lambda, density in the leaf rates.
double log_prior_density(const BetaPrior& prior, const ParamTree& point);

// Coordinates: Lambda, then for every internal node (depth-major order) the
// theta of its children except the last one.
std::size_t chart_dimension(const HierarchySpec& spec);

using Matrix = std::vector<std::vector<double>>;

Matrix fisher_information_numeric(const ParamTree& tree, int Dprime, double tail_tol);

// log of sqrt(det I) via Cholesky; throws if I is not positive definite.
double log_sqrt_det(const Matrix& m);

}  // namespace stratshrink
