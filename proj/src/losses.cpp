#include "stratshrink/losses.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <algorithm>
#include <cmath>
#include <map>

#include "stratshrink/errors.hpp"
#include "stratshrink/series.hpp"

namespace stratshrink {

namespace {

void check_sizes(std::size_t a, std::size_t b) {
    if (a != b) throw ShapeError("estimate and rate vectors differ in length");
}

double entropy_term(double delta, double lambda) {
    if (!(delta > 0.0)) throw DomainError("entropy loss needs strictly positive estimates; risk not well defined");
    return delta - lambda - lambda * (std::log(delta) - std::log(lambda));
}

std::vector<std::vector<double>> aggregate_estimate(const RateEstimate& delta, const HierarchySpec& spec) {
    check_sizes(delta.size(), spec.leaf_count());
    const int D = spec.depth();
    std::vector<std::vector<double>> agg(static_cast<std::size_t>(D) + 1);
    agg[static_cast<std::size_t>(D)] = delta;
    for (int d = D - 1; d >= 0; --d) {
        const auto nc = static_cast<std::size_t>(spec.n(d + 1));
        auto& cur = agg[static_cast<std::size_t>(d)];
        cur.assign(spec.width(d), 0.0);
        for (std::size_t k = 0; k < cur.size(); ++k)
            for (std::size_t j = 0; j < nc; ++j) cur[k] += agg[static_cast<std::size_t>(d + 1)][k * nc + j];
    }
    return agg;
}

}  // namespace

double sse_loss(const RateEstimate& d, const std::vector<double>& lambda) {
    check_sizes(d.size(), lambda.size());
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double e = d[i] - lambda[i];
        s += e * e / lambda[i];
    }
    return s;
}

double entropy_loss(const RateEstimate& delta, const std::vector<double>& lambda) {
    check_sizes(delta.size(), lambda.size());
    double s = 0.0;
    for (std::size_t i = 0; i < delta.size(); ++i) s += entropy_term(delta[i], lambda[i]);
    return s;
}

std::vector<double> balanced_entropy_terms(const RateEstimate& delta, const ParamTree& lambda) {
    for (double v : delta)
        if (!(v > 0.0)) throw DomainError("entropy loss needs strictly positive estimates; risk not well defined");
    const auto agg = aggregate_estimate(delta, lambda.spec());
    std::vector<double> terms;
    for (int d = 0; d <= lambda.spec().depth(); ++d)
        terms.push_back(entropy_loss(agg[static_cast<std::size_t>(d)], lambda.rates(d)));
    return terms;
}

double balanced_entropy_loss(const RateEstimate& delta, const ParamTree& lambda) {
    double s = 0.0;
    for (double t : balanced_entropy_terms(delta, lambda)) s += t;
    return s;
}

PredictiveWeights PredictiveWeights::uniform(const HierarchySpec& spec, double r, double s, double power) {
    PredictiveWeights w;
    w.path_power = power;
    for (int d = 0; d <= spec.depth(); ++d) {
        w.r.emplace_back(spec.width(d), r);
        w.s.emplace_back(spec.width(d), s);
    }
    return w;
}

double PredictiveWeights::t(int d, std::size_t k, double tau) const {
    return r[static_cast<std::size_t>(d)][k] + s[static_cast<std::size_t>(d)][k] * std::pow(tau, path_power);
}

double PredictiveWeights::dt(int d, std::size_t k, double tau) const {
    const double sv = s[static_cast<std::size_t>(d)][k];
    if (sv == 0.0) return 0.0;
    return sv * path_power * std::pow(tau, path_power - 1.0);
}

void PredictiveWeights::validate(const HierarchySpec& spec) const {
    if (r.size() != static_cast<std::size_t>(spec.depth()) + 1 || s.size() != r.size())
        throw ShapeError("predictive weights need one row per depth");
    for (int d = 0; d <= spec.depth(); ++d) {
        const auto dd = static_cast<std::size_t>(d);
        if (r[dd].size() != spec.width(d) || s[dd].size() != spec.width(d))
            throw ShapeError("predictive weights do not match the node count");
        for (std::size_t k = 0; k < spec.width(d); ++k)
            if (!(r[dd][k] >= 0.0) || !(s[dd][k] >= 0.0)) throw DomainError("exposures must be >= 0");
    }
    if (!(path_power > 0.0)) throw DomainError("path power must be > 0 for a monotone path");
}

double plugin_predictive_kl(const RateEstimate& delta, const ParamTree& lambda, const PredictiveWeights& w) {
    const auto& spec = lambda.spec();
    w.validate(spec);
    for (double v : delta)
        if (!(v > 0.0)) throw DomainError("entropy loss needs strictly positive estimates; risk not well defined");
    const auto agg = aggregate_estimate(delta, spec);
    double total = 0.0;
    for (int d = 0; d <= spec.depth(); ++d)
        for (std::size_t k = 0; k < spec.width(d); ++k) {
            const double sv = w.s[static_cast<std::size_t>(d)][k];
            if (sv != 0.0) total += sv * entropy_term(agg[static_cast<std::size_t>(d)][k], lambda.rate(d, k));
        }
    return total;
}

std::pair<double, double> plugin_kl_by_enumeration(const RateEstimate& delta, const ParamTree& lambda,
                                                   const PredictiveWeights& w, double tol) {
    const auto& spec = lambda.spec();
    w.validate(spec);
    const auto agg = aggregate_estimate(delta, spec);
    double value = 0.0, bound = 0.0;
    for (int d = 0; d <= spec.depth(); ++d)
        for (std::size_t k = 0; k < spec.width(d); ++k) {
            const double mean = w.s[static_cast<std::size_t>(d)][k] * lambda.rate(d, k);
            if (mean == 0.0) continue;
            const double lam = lambda.rate(d, k);
            const double del = agg[static_cast<std::size_t>(d)][k];
            const double sv = w.s[static_cast<std::size_t>(d)][k];
            // log p(y|lambda) - log p(y|delta) for one node's count
            auto f = [&](std::int64_t y) {
                return static_cast<double>(y) * (std::log(lam) - std::log(del)) - sv * (lam - del);
            };
            const double growth = std::abs(std::log(lam) - std::log(del)) + sv * std::abs(lam - del);
            auto r = poisson_expectation(f, mean, tol, growth, 1);
            value += r.value;
            bound += r.truncation_bound;
        }
    return {value, bound};
}

namespace {

// Single-parameter view of a single-leaf hierarchy: all node means equal lambda.
struct SingleLeaf {
    double lambda;
    double a0;
    double rate0;
    std::vector<double> r, s;
};

SingleLeaf single_leaf_view(const PriorExponents& prior, const ParamTree& tree, const PredictiveWeights& w) {
    const auto& spec = tree.spec();
    if (spec.leaf_count() != 1 || spec.node_count() > 3)
        throw CapabilityError("predictive check is limited to single-leaf hierarchies with at most 3 nodes");
    w.validate(spec);
    SingleLeaf v{tree.total(), prior.root, prior.root_rate, {}, {}};
    for (int d = 0; d <= spec.depth(); ++d) {
        v.r.push_back(w.r[static_cast<std::size_t>(d)][0]);
        v.s.push_back(w.s[static_cast<std::size_t>(d)][0]);
    }
    return v;
}

// Posterior integral log int l^{c+a0-1} exp(-b l) dl by quadrature in log l.
double log_posterior_integral(double c, double a0, double b) {
    const double shape = c + a0;
    auto g = [&](double u) { return shape * u - b * std::exp(u); };
    return log_integrate_exp(g, std::log(shape / b)).log_value;
}

}  // namespace

PredictiveCheck bayes_predictive_kl_check(const PriorExponents& prior, const ParamTree& lambda,
                                          const PredictiveWeights& w, int tau_panels, double tol) {
    const auto v = single_leaf_view(prior, lambda, w);
    if (tau_panels < 1) throw DomainError("need at least one tau panel");
    // below 1 the path derivative blows up at tau = 0 and the panel rule is not accurate
    if (w.path_power < 1.0) throw DomainError("predictive check needs path power >= 1");
    double R = 0.0, S = 0.0;
    for (std::size_t i = 0; i < v.r.size(); ++i) {
        R += v.r[i];
        S += v.s[i];
    }
    PredictiveCheck out;
    if (S == 0.0) return out;
    if (!(R + v.rate0 > 0.0)) throw DomainError("posterior is improper at tau = 0 (no training exposure)");
    const double lam = v.lambda;

    // Direct side: enumerate the training total x and the prediction total y.
    // log p(y|lam) - log p_hat(y|x) = y log lam - S lam - log[J(x+y, R+S) / J(x, R)]
    std::map<std::int64_t, double> cache_num, cache_den;
    auto jnum = [&](std::int64_t c) {
        auto it = cache_num.find(c);
        if (it != cache_num.end()) return it->second;
        return cache_num[c] = log_posterior_integral(static_cast<double>(c), v.a0, R + S + v.rate0);
    };
    auto jden = [&](std::int64_t c) {
        auto it = cache_den.find(c);
        if (it != cache_den.end()) return it->second;
        return cache_den[c] = log_posterior_integral(static_cast<double>(c), v.a0, R + v.rate0);
    };
    auto cap_for = [&](double mean) {
        if (mean == 0.0) return std::int64_t{0};
        std::int64_t n = 0;
        double tail = 1.0;
        while (true) {
            const double p = std::exp(poisson_log_pmf(n + 1, mean));
            const double ratio = mean / (static_cast<double>(n) + 2.0);
            if (ratio < 0.5) {
                tail = p / (1.0 - ratio);
                if (tail * (1.0 + static_cast<double>(n)) * (1.0 + static_cast<double>(n)) < tol) return n;
            }
            ++n;
        }
    };
    const std::int64_t nx = cap_for(R * lam), ny = cap_for(S * lam);
    long double direct = 0.0L;
    for (std::int64_t x = 0; x <= nx; ++x) {
        const double px = R == 0.0 ? (x == 0 ? 1.0 : 0.0) : std::exp(poisson_log_pmf(x, R * lam));
        if (px == 0.0) continue;
        const double den = jden(x);
        for (std::int64_t y = 0; y <= ny; ++y) {
            const double py = std::exp(poisson_log_pmf(y, S * lam));
            const double f = static_cast<double>(y) * std::log(lam) - S * lam - (jnum(x + y) - den);
            direct += static_cast<long double>(px * py * f);
        }
    }
    out.direct = static_cast<double>(direct);
    out.truncation_bound = tol * 4.0;

    // Path side: integral over tau of T'(tau) * E[entropy term of the posterior mean under Z(tau)].
    auto inner = [&](double tau) {
        double T = 0.0, dT = 0.0;
        for (std::size_t i = 0; i < v.r.size(); ++i) {
            T += v.r[i] + v.s[i] * std::pow(tau, w.path_power);
            if (v.s[i] != 0.0) dT += v.s[i] * w.path_power * std::pow(tau, w.path_power - 1.0);
        }
        if (dT == 0.0) return 0.0;
        const double b = T + v.rate0;
        auto f = [&](std::int64_t z) {
            const double est = (static_cast<double>(z) + v.a0) / b;
            return est - lam - lam * (std::log(est) - std::log(lam));
        };
        // |f(z)| <= (1+z) * growth, using |log(z+a0)| <= z + a0 + |log a0|
        const double growth = std::max(1.0, v.a0) / b + 2.0 * lam +
                              lam * (1.0 + v.a0 + std::abs(std::log(v.a0)) + std::abs(std::log(b)) +
                                     std::abs(std::log(lam)));
        double risk;
        if (T == 0.0) {
            risk = f(0);
        } else {
            risk = poisson_expectation(f, T * lam, tol, growth, 1).value;
        }
        return dT * risk;
    };
    long double path = 0.0L;
    const double h = 1.0 / tau_panels;
    for (int p = 0; p < tau_panels; ++p)
        path += boost::math::quadrature::gauss<double, 20>::integrate(inner, p * h, (p + 1) * h);
    out.path = static_cast<double>(path);
    return out;
}

}  // namespace stratshrink
