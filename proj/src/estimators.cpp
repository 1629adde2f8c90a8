#include "stratshrink/estimators.hpp"

#include <cmath>
#include <numeric>

#include "stratshrink/errors.hpp"
#include "stratshrink/series.hpp"

namespace stratshrink {

EstimatorRule EstimatorRule::beta_bayes(double beta) {
    if (!(beta > 0.0)) throw DomainError("beta must be > 0");
    auto r = of(RuleTag::BetaBayes);
    r.beta = beta;
    return r;
}

EstimatorRule EstimatorRule::blyth(int k) {
    if (k < 1) throw DomainError("k must be >= 1");
    auto r = of(RuleTag::BlythK);
    r.k = k;
    return r;
}

EstimatorRule EstimatorRule::entropy_stick(double alpha, std::vector<double> a, bool with_z) {
    if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
    for (double v : a)
        if (!(v > 0.0)) throw DomainError("a_i must be > 0");
    auto r = of(RuleTag::EntropyStick);
    r.alpha = alpha;
    r.a = std::move(a);
    r.with_z = with_z;
    return r;
}

EstimatorRule EstimatorRule::entropy_jeffreys(bool with_z) {
    auto r = of(RuleTag::EntropyJeffreys);
    r.with_z = with_z;
    return r;
}

EstimatorRule EstimatorRule::general(PriorExponents prior, int dprime) {
    auto r = of(RuleTag::GeneralGB);
    r.prior = std::move(prior);
    r.dprime = dprime;
    return r;
}

namespace {

std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

std::string EstimatorRule::name() const {
    switch (tag) {
        case RuleTag::BasicML: return "BasicML";
        case RuleTag::BasicFlatGB: return "BasicFlatGB";
        case RuleTag::BasicShrinkGB: return "BasicShrinkGB";
        case RuleTag::XOnlyML: return "XOnlyML";
        case RuleTag::XOnlyCZ: return "XOnlyCZ";
        case RuleTag::HalfSum: return "HalfSum";
        case RuleTag::BetaBayes: return "BetaBayes(" + fmt_num(beta) + ")";
        case RuleTag::BlythK: return "BlythK(" + std::to_string(k) + ")";
        case RuleTag::MultiML: return "MultiML";
        case RuleTag::MultiFlatGB: return "MultiFlatGB";
        case RuleTag::MultiShrinkGB: return "MultiShrinkGB";
        case RuleTag::EntropyStick: {
            std::string s = "EntropyStick(" + fmt_num(alpha) + ";";
            for (std::size_t i = 0; i < a.size(); ++i) s += (i ? " " : "") + fmt_num(a[i]);
            return s + (with_z ? ";Z)" : ")");
        }
        case RuleTag::EntropyJeffreys: return with_z ? "EntropyJeffreys(Z)" : "EntropyJeffreys";
        case RuleTag::GeneralGB: {
            std::string s = "GeneralGB(";
            for (std::size_t i = 0; i < prior.node.size(); ++i) {
                const double v = i == 0 ? prior.root : (prior.node[i].empty() ? 0.0 : prior.node[i].front());
                s += (i ? " " : "") + fmt_num(v);
            }
            return s + ";D'=" + std::to_string(dprime) + ")";
        }
    }
    return "?";
}

int EstimatorRule::start_depth(const HierarchySpec& spec) const {
    switch (tag) {
        case RuleTag::XOnlyML:
        case RuleTag::XOnlyCZ: return 1;
        case RuleTag::MultiML:
        case RuleTag::MultiFlatGB:
        case RuleTag::MultiShrinkGB: return 1;
        case RuleTag::EntropyStick:
        case RuleTag::EntropyJeffreys: return with_z ? 0 : 1;
        case RuleTag::GeneralGB: return dprime;
        default: (void)spec; return 0;
    }
}

bool EstimatorRule::always_positive() const {
    return tag == RuleTag::EntropyStick || tag == RuleTag::EntropyJeffreys || tag == RuleTag::GeneralGB;
}

double blyth_h(int k, double lambda) {
    // 1 - log(1+L)/log(1+k+L) rewritten without cancellation
    return std::log1p(k / (1.0 + lambda)) / std::log1p(k + lambda);
}

double blyth_h_prime(int k, double lambda) {
    const double h = blyth_h(k, lambda);
    return -(k / (1.0 + lambda) + h) / ((1.0 + k + lambda) * std::log1p(k + lambda));
}

double blyth_ratio(int k, long w) {
    if (w < 1) throw DomainError("Blyth ratio needs w >= 1");
    // I(w)/I(w-1) = (w/2) E_{Ga(w+1,2)}[h^2] / E_{Ga(w,2)}[h^2]
    auto log_h2 = [k](double lam) { return 2.0 * std::log(blyth_h(k, lam)); };
    double e1 = 0.0, e2 = 0.0, r1 = 0.0, r2 = 0.0;
    e1 = gamma_expectation_log(log_h2, static_cast<double>(w) + 1.0, 2.0, &r1);
    e2 = gamma_expectation_log(log_h2, static_cast<double>(w), 2.0, &r2);
    if (r1 > 1e-9 || r2 > 1e-9) throw NumericError("Blyth quadrature did not converge");
    return 0.5 * static_cast<double>(w) * e1 / e2;
}

RateEstimate estimate_basic(const BasicObs& obs, const EstimatorRule& rule, bool* flagged) {
    const auto& x = obs.x;
    const std::size_t m = x.size();
    if (m == 0) throw ShapeError("basic model needs m >= 1");
    const double md = static_cast<double>(m);
    const double xs = static_cast<double>(std::accumulate(x.begin(), x.end(), std::int64_t{0}));
    const double y = static_cast<double>(obs.y);
    if (flagged) *flagged = false;
    RateEstimate out(m, 0.0);
    auto scaled = [&](double num, double den) {
        // num * X_i / den, with 0/0 read as 0
        for (std::size_t i = 0; i < m; ++i)
            out[i] = x[i] == 0 ? 0.0 : num * static_cast<double>(x[i]) / den;
    };
    switch (rule.tag) {
        case RuleTag::BasicML: scaled((xs + y) / 2.0, xs); break;
        case RuleTag::BasicFlatGB: scaled((xs + y + md - 1.0) / 2.0, xs + md - 1.0); break;
        case RuleTag::BasicShrinkGB: scaled((xs + y) / 2.0, xs + md - 1.0); break;
        case RuleTag::XOnlyML:
            for (std::size_t i = 0; i < m; ++i) out[i] = static_cast<double>(x[i]);
            break;
        case RuleTag::XOnlyCZ: scaled(xs, xs + md - 1.0); break;
        case RuleTag::BetaBayes: scaled((xs + y + md - 1.0) / (2.0 + rule.beta), xs + md - 1.0); break;
        case RuleTag::HalfSum:
            if (m != 1) throw CapabilityError("(X_1+Y)/2 is the m=1 estimator");
            out[0] = (static_cast<double>(x[0]) + y) / 2.0;
            break;
        case RuleTag::BlythK: {
            const long w = static_cast<long>(xs + y);
            if (w == 0) {
                if (flagged) *flagged = true;
                break;
            }
            scaled(blyth_ratio(rule.k, w), xs + md - 1.0);
            break;
        }
        default: throw CapabilityError(rule.name() + " is not a basic-model rule");
    }
    return out;
}

RaggedEstimate estimate_multi(const MultiObs& obs, const EstimatorRule& rule) {
    const std::size_t m = obs.x.size();
    if (obs.y.size() != m) throw ShapeError("need one Y per group");
    std::vector<double> xi(m);
    double xall = 0.0, yall = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        xi[i] = static_cast<double>(std::accumulate(obs.x[i].begin(), obs.x[i].end(), std::int64_t{0}));
        xall += xi[i];
        yall += static_cast<double>(obs.y[i]);
    }
    const double md = static_cast<double>(m);
    RaggedEstimate out(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& g = obs.x[i];
        const double ni = static_cast<double>(g.size());
        const double yi = static_cast<double>(obs.y[i]);
        double num = 0.0, den = 1.0;
        switch (rule.tag) {
            case RuleTag::MultiML: num = (xi[i] + yi) / 2.0; den = xi[i]; break;
            case RuleTag::MultiFlatGB: num = (xi[i] + yi + ni - 1.0) / 2.0; den = xi[i] + ni - 1.0; break;
            case RuleTag::MultiShrinkGB: {
                const double top = xall + yall;
                const double share = top == 0.0 ? 0.0 : (xi[i] + yi) / (top + md - 1.0);
                num = top / 2.0 * share;
                den = xi[i] + ni - 1.0;
                break;
            }
            default: throw CapabilityError(rule.name() + " is not a multi-set rule");
        }
        out[i].resize(g.size());
        for (std::size_t j = 0; j < g.size(); ++j)
            out[i][j] = g[j] == 0 ? 0.0 : num * static_cast<double>(g[j]) / den;
    }
    return out;
}

RaggedEstimate estimate_entropy(const MultiObs& obs, double alpha, const std::vector<double>& a, bool with_z) {
    const std::size_t m = obs.x.size();
    if (obs.y.size() != m || a.size() != m) throw ShapeError("need one Y and one a_i per group");
    if (!(alpha > 0.0)) throw DomainError("alpha must be > 0");
    if (with_z && !obs.z) throw ShapeError("with_Z requested but the observation carries no Z");
    std::vector<double> xi(m);
    double xall = 0.0, yall = 0.0, adot = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (!(a[i] > 0.0)) throw DomainError("a_i must be > 0");
        xi[i] = static_cast<double>(std::accumulate(obs.x[i].begin(), obs.x[i].end(), std::int64_t{0}));
        xall += xi[i];
        yall += static_cast<double>(obs.y[i]);
        adot += a[i];
    }
    const double z = with_z ? static_cast<double>(*obs.z) : 0.0;
    const double root = (xall + yall + z + alpha) / (with_z ? 3.0 : 2.0);
    RaggedEstimate out(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double ni = static_cast<double>(obs.x[i].size());
        const double group = (xi[i] + static_cast<double>(obs.y[i]) + a[i]) / (xall + yall + adot);
        out[i].resize(obs.x[i].size());
        for (std::size_t j = 0; j < obs.x[i].size(); ++j)
            out[i][j] = root * group * (static_cast<double>(obs.x[i][j]) + 0.5) / (xi[i] + ni / 2.0);
    }
    return out;
}

RaggedEstimate estimate_entropy_jeffreys(const MultiObs& obs, bool with_z) {
    std::vector<double> a;
    double ndot = 0.0;
    for (const auto& g : obs.x) {
        a.push_back(static_cast<double>(g.size()) / 2.0);
        ndot += static_cast<double>(g.size());
    }
    return estimate_entropy(obs, ndot / 2.0, a, with_z);
}

RateEstimate estimate_general(const ObservationSet& obs, const PriorExponents& prior) {
    const auto& spec = obs.spec();
    const int D = spec.depth();
    const int Dp = obs.start_depth();
    if (prior.node.size() != static_cast<std::size_t>(D) + 1) throw ShapeError("prior depth does not match");
    if (prior.root_rate != 0.0) throw DomainError("the closed form has no root rate");
    const auto agg = aggregate(obs);
    RateEstimate out(spec.leaf_count());
    for (std::size_t leaf = 0; leaf < out.size(); ++leaf) {
        double v = (static_cast<double>(agg[0][0]) + prior.root) / (1.0 + D - Dp);
        std::size_t idx = leaf;
        for (int d = D; d >= 1; --d) {
            const auto nd = static_cast<std::size_t>(spec.n(d));
            const std::size_t first = (idx / nd) * nd;
            double den = 0.0;
            for (std::size_t s = first; s < first + nd; ++s)
                den += static_cast<double>(agg[static_cast<std::size_t>(d)][s]) + prior.a(d, s);
            v *= (static_cast<double>(agg[static_cast<std::size_t>(d)][idx]) + prior.a(d, idx)) / den;
            idx /= nd;
        }
        out[leaf] = v;
    }
    return out;
}

RateEstimate conjugate_engine(const ObservationSet& obs, const PriorExponents& prior, LossKind loss) {
    const auto& spec = obs.spec();
    const int D = spec.depth();
    if (prior.node.size() != static_cast<std::size_t>(D) + 1) throw ShapeError("prior depth does not match");

    // Posterior: Lambda ~ Ga(shape, rate); each sibling group ~ Dirichlet(param).
    // Every observed count feeds Lambda and each theta on its path to the root.
    double shape = prior.root;
    double rate = prior.root_rate;
    std::vector<std::vector<double>> param(static_cast<std::size_t>(D) + 1);
    for (int d = 1; d <= D; ++d) param[static_cast<std::size_t>(d)] = prior.node[static_cast<std::size_t>(d)];
    for (int d = obs.start_depth(); d <= D; ++d) {
        rate += 1.0;  // the depth-d rates sum to Lambda
        for (std::size_t k = 0; k < spec.width(d); ++k) {
            const double c = static_cast<double>(obs.count(d, k));
            shape += c;
            std::size_t idx = k;
            for (int l = d; l >= 1; --l) {
                param[static_cast<std::size_t>(l)][idx] += c;
                idx /= static_cast<std::size_t>(spec.n(l));
            }
        }
    }
    if (!(rate > 0.0)) throw DomainError("posterior for Lambda is improper (zero exposure)");

    const bool sse = loss == LossKind::SSE;
    if (sse && !(shape > 1.0))
        throw DomainError("E[1/Lambda] does not exist: posterior shape " + std::to_string(shape) + " at the root");
    const double root_factor = sse ? (shape - 1.0) / rate : shape / rate;

    RateEstimate out(spec.leaf_count());
    for (std::size_t leaf = 0; leaf < out.size(); ++leaf) {
        double v = root_factor;
        std::size_t idx = leaf;
        for (int l = D; l >= 1; --l) {
            const auto nl = static_cast<std::size_t>(spec.n(l));
            const std::size_t parent = idx / nl;
            if (nl > 1) {
                const auto& p = param[static_cast<std::size_t>(l)];
                double total = 0.0;
                for (std::size_t j = parent * nl; j < (parent + 1) * nl; ++j) total += p[j];
                if (sse) {
                    if (!(p[idx] > 1.0))
                        throw DomainError("E[1/theta] does not exist at node " + spec.address_string(l, idx));
                    v *= (p[idx] - 1.0) / (total - 1.0);
                } else {
                    v *= p[idx] / total;
                }
            }
            idx = parent;
        }
        out[leaf] = v;
    }
    return out;
}

std::vector<double> flatten(const RaggedEstimate& r) {
    std::vector<double> out;
    for (const auto& g : r) out.insert(out.end(), g.begin(), g.end());
    return out;
}

}  // namespace stratshrink
