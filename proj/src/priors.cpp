#include "stratshrink/priors.hpp"

#include <algorithm>
#include <cmath>

#include "stratshrink/errors.hpp"
#include "stratshrink/rng.hpp"

namespace stratshrink {

std::vector<double> PriorExponents::per_depth() const {
    std::vector<double> out{root};
    for (std::size_t d = 1; d < node.size(); ++d) {
        const auto& row = node[d];
        for (double v : row)
            if (v != row.front()) throw ShapeError("prior exponents differ within depth " + std::to_string(d));
        out.push_back(row.front());
    }
    return out;
}

PriorExponents uniform_exponents(const HierarchySpec& spec, const std::vector<double>& a) {
    if (a.size() != static_cast<std::size_t>(spec.depth()) + 1)
        throw ShapeError("need one exponent per depth 0..D");
    for (double v : a)
        if (!(v > 0.0)) throw DomainError("prior exponents must be > 0");
    PriorExponents p;
    p.root = a[0];
    p.node.resize(a.size());
    for (int d = 1; d <= spec.depth(); ++d) p.node[static_cast<std::size_t>(d)].assign(spec.width(d), a[static_cast<std::size_t>(d)]);
    return p;
}

namespace {

double tail_product(const HierarchySpec& spec, int d) {
    double prod = 1.0;
    for (int l = d + 1; l <= spec.depth(); ++l) prod *= spec.n(l);
    return prod;
}

}  // namespace

PriorExponents jeffreys_exponents(const HierarchySpec& spec) {
    std::vector<double> a;
    for (int d = 0; d <= spec.depth(); ++d) a.push_back(tail_product(spec, d) / 2.0);
    return uniform_exponents(spec, a);
}

PriorExponents build_a_family(const HierarchySpec& spec, int D0, int Dprime) {
    const int D = spec.depth();
    if (D0 < 1 || D0 > D) throw ShapeError("D0 must lie in 1..D");
    if (Dprime < 0 || Dprime > D0) throw ShapeError("D' must lie in 0..D0");
    std::vector<double> a;
    for (int d = 0; d <= D; ++d) {
        double prod = 1.0;
        for (int l = d + 1; l <= D; ++l)
            if (d >= D0 || l <= Dprime || l >= D0 + 1) prod *= spec.n(l);
        a.push_back(prod / 2.0);
    }
    return uniform_exponents(spec, a);
}

PriorExponents stick_breaking(const HierarchySpec& spec, double alpha, const std::vector<double>& a) {
    if (spec.depth() != 2) throw ShapeError("stick-breaking family is defined for D=2");
    if (a.size() != spec.width(1)) throw ShapeError("need one a_i per group");
    if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
    for (double v : a)
        if (!(v > 0.0)) throw DomainError("a_i must be > 0");
    PriorExponents p;
    p.root = alpha;
    p.node.resize(3);
    p.node[1] = a;
    p.node[2].assign(spec.width(2), 0.5);
    return p;
}

PriorExponents flat_lambda(const HierarchySpec& spec) {
    std::vector<double> a;
    for (int d = 0; d <= spec.depth(); ++d) a.push_back(tail_product(spec, d));
    return uniform_exponents(spec, a);
}

PriorExponents flat_theta_lambda(const HierarchySpec& spec) {
    return uniform_exponents(spec, std::vector<double>(static_cast<std::size_t>(spec.depth()) + 1, 1.0));
}

PriorExponents beta_exponents(const HierarchySpec& spec, const BetaPrior& prior) {
    if (!(prior.beta > 0.0)) throw DomainError("beta must be > 0");
    PriorExponents p = flat_lambda(spec);
    p.root_rate = prior.beta;
    return p;
}

double log_prior_density(const PriorExponents& prior, const ParamTree& point) {
    const auto& spec = point.spec();
    if (prior.node.size() != static_cast<std::size_t>(spec.depth()) + 1)
        throw ShapeError("prior depth does not match the tree");
    double out = (prior.root - 1.0) * std::log(point.total()) - prior.root_rate * point.total();
    for (int d = 1; d <= spec.depth(); ++d) {
        if (spec.n(d) == 1) continue;
        for (std::size_t k = 0; k < spec.width(d); ++k) {
            const double th = point.theta(d, k);
            if (!(th > 0.0)) throw DomainError("zero coordinate in prior evaluation");
            out += (prior.a(d, k) - 1.0) * std::log(th);
        }
    }
    return out;
}

double log_prior_density(const BetaPrior& prior, const ParamTree& point) {
    if (!(prior.beta > 0.0)) throw DomainError("beta must be > 0");
    const double m = static_cast<double>(point.spec().leaf_count());
    return m * std::log(prior.beta) - prior.beta * point.total();
}

std::size_t chart_dimension(const HierarchySpec& spec) {
    std::size_t dim = 1;
    for (int d = 1; d <= spec.depth(); ++d) dim += spec.width(d - 1) * static_cast<std::size_t>(spec.n(d) - 1);
    return dim;
}

namespace {

// E[X] for X ~ Po(mean) by direct summation until the remaining mass is below tol.
double truncated_mean(double mean, double tol) {
    const double cap = mean + 40.0 * std::sqrt(mean) + 200.0;
    double sum = 0.0;
    double tail = 1.0;
    for (std::uint64_t x = 0;; ++x) {
        const double xd = static_cast<double>(x);
        const double p = std::exp(-mean + xd * std::log(mean) - log_factorial(x));
        sum += xd * p;
        if (xd > mean) {
            // remaining mass of x*p(x) is geometric beyond here
            const double next = p * mean / (xd + 1.0);
            const double ratio = mean / (xd + 2.0) * (xd + 2.0) / (xd + 1.0);
            tail = (xd + 1.0) * next / (1.0 - ratio);
            if (ratio < 1.0 && tail < tol) return sum;
        }
        if (xd > cap) throw TruncationError("Poisson mean summation hit its cap", tail);
    }
}

}  // namespace

Matrix fisher_information_numeric(const ParamTree& tree, int Dprime, double tail_tol) {
    const auto& spec = tree.spec();
    const int D = spec.depth();
    if (Dprime < 0 || Dprime > D) throw ShapeError("D' out of range");
    if (!(tail_tol > 0.0 && tail_tol <= 1e-6)) throw DomainError("tail_tol must lie in (0, 1e-6]");

    // offset of the coordinate block for each internal node
    std::vector<std::vector<std::size_t>> block(static_cast<std::size_t>(D) + 1);
    std::size_t next = 1;
    for (int d = 1; d <= D; ++d) {
        auto& b = block[static_cast<std::size_t>(d - 1)];
        b.resize(spec.width(d - 1));
        for (auto& off : b) {
            off = next;
            next += static_cast<std::size_t>(spec.n(d) - 1);
        }
    }
    const std::size_t dim = next;
    Matrix info(dim, std::vector<double>(dim, 0.0));

    // f[c] = d log(mu)/d coord_c, tagged with its factor (0 = Lambda, l = depth-l simplex)
    std::vector<double> f(dim);
    std::vector<int> factor(dim);
    for (int d = Dprime; d <= D; ++d) {
        for (std::size_t k = 0; k < spec.width(d); ++k) {
            std::fill(f.begin(), f.end(), 0.0);
            std::fill(factor.begin(), factor.end(), -1);
            f[0] = 1.0 / tree.total();
            factor[0] = 0;
            std::size_t idx = k;
            for (int l = d; l >= 1; --l) {
                const auto nl = static_cast<std::size_t>(spec.n(l));
                const std::size_t parent = idx / nl;
                const std::size_t child = idx % nl;
                const std::size_t off = block[static_cast<std::size_t>(l - 1)][parent];
                if (nl > 1) {
                    if (child + 1 < nl) {
                        f[off + child] = 1.0 / tree.theta(l, idx);
                        factor[off + child] = l;
                    } else {
                        for (std::size_t j = 0; j + 1 < nl; ++j) {
                            f[off + j] = -1.0 / tree.theta(l, idx);
                            factor[off + j] = l;
                        }
                    }
                }
                idx = parent;
            }
            const double mu = tree.rate(d, k);
            const double ex = truncated_mean(mu, tail_tol);
            // E[X] grad grad^T / mu^2 with grad = mu f, minus (E[X]/mu - 1) * Hessian of mu
            for (std::size_t a = 0; a < dim; ++a) {
                if (factor[a] < 0) continue;
                for (std::size_t b = 0; b < dim; ++b) {
                    if (factor[b] < 0) continue;
                    double v = ex * f[a] * f[b];
                    if (factor[a] != factor[b]) v -= (ex / mu - 1.0) * mu * f[a] * f[b];
                    info[a][b] += v;
                }
            }
        }
    }
    return info;
}

double log_sqrt_det(const Matrix& m) {
    const std::size_t n = m.size();
    Matrix l(n, std::vector<double>(n, 0.0));
    double logdet = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double s = m[j][j];
        for (std::size_t p = 0; p < j; ++p) s -= l[j][p] * l[j][p];
        if (!(s > 0.0)) throw NumericError("matrix is not positive definite");
        l[j][j] = std::sqrt(s);
        logdet += std::log(l[j][j]);
        for (std::size_t i = j + 1; i < n; ++i) {
            double t = m[i][j];
            for (std::size_t p = 0; p < j; ++p) t -= l[i][p] * l[j][p];
            l[i][j] = t / l[j][j];
        }
    }
    return logdet;
}

}  // namespace stratshrink
