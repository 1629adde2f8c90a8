#include "stratshrink/conditions.hpp"

#include <boost/rational.hpp>
#include <cmath>
#include <sstream>

#include "stratshrink/errors.hpp"

namespace stratshrink {

namespace {

using Q = boost::rational<long long>;

Q exact(double v) {
    for (long long den = 1; den <= 1'000'000; den *= 10) {
        const double num = v * static_cast<double>(den);
        if (std::abs(num - std::round(num)) < 1e-9 * std::max(1.0, std::abs(num)))
            return Q(static_cast<long long>(std::llround(num)), den);
    }
    // dyadic fallback
    for (long long den = 1; den <= (1LL << 40); den *= 2) {
        const double num = v * static_cast<double>(den);
        if (num == std::round(num)) return Q(static_cast<long long>(num), den);
    }
    throw ConfigError("hypothesis input " + std::to_string(v) + " is not a short rational");
}

std::string str(const Q& q) {
    std::ostringstream os;
    os << q.numerator();
    if (q.denominator() != 1) os << '/' << q.denominator();
    return os.str();
}

ConditionCheck cmp(std::string name, const Q& lhs, const char* op, const Q& rhs) {
    bool ok = false;
    const std::string o = op;
    if (o == "<=") ok = lhs <= rhs;
    else if (o == ">=") ok = lhs >= rhs;
    else if (o == "<") ok = lhs < rhs;
    else if (o == ">") ok = lhs > rhs;
    else if (o == "==") ok = lhs == rhs;
    return {std::move(name), str(lhs) + " " + o + " " + str(rhs), ok};
}

}  // namespace

bool ConditionReport::all() const {
    for (const auto& c : checks)
        if (!c.holds) return false;
    return true;
}

ConditionReport multi_shrink_conditions(const std::vector<int>& n) {
    ConditionReport r{"multi shrink dominance", {}};
    const long long m = static_cast<long long>(n.size());
    r.checks.push_back(cmp("m>=2", Q(m), ">=", Q(2)));
    int nmin = n.empty() ? 0 : n[0];
    for (int v : n) nmin = std::min(nmin, v);
    r.checks.push_back(cmp("min n_i>=4", Q(nmin), ">=", Q(4)));
    if (m < 1) return r;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const Q ni(n[i]);
        const Q lhs = Q((m - 1) * (m - 1), 2 * m) + Q(m - 1, m * m) + (Q(2) * ni - 3) / Q(m);
        const Q rhs = (ni - 1) * (ni - 3) / Q(2);
        r.checks.push_back(cmp("group " + std::to_string(i + 1) + " inequality", lhs, "<=", rhs));
    }
    return r;
}

ConditionReport entropy_stick_conditions(const std::vector<int>& n, const std::vector<double>& a, double alpha) {
    if (n.size() != a.size()) throw ConfigError("need one a_i per group");
    ConditionReport r{"entropy stick dominance", {}};
    Q adot(0), ndot(0);
    for (std::size_t i = 0; i < n.size(); ++i) {
        const Q ai = exact(a[i]);
        adot += ai;
        ndot += n[i];
        r.checks.push_back(cmp("n_" + std::to_string(i + 1) + "/2>=a_" + std::to_string(i + 1), Q(n[i], 2), ">=", ai));
        r.checks.push_back(cmp("a_" + std::to_string(i + 1) + ">=1", ai, ">=", Q(1)));
    }
    const Q al = exact(alpha);
    r.checks.push_back(cmp("a_dot>=alpha", adot, ">=", al));
    r.checks.push_back(cmp("alpha>=1", al, ">=", Q(1)));
    r.checks.push_back(cmp("alpha<n_dot/2", al, "<", ndot / 2));
    return r;
}

ConditionReport entropy_stick_root_conditions(const std::vector<int>& n, const std::vector<double>& a, double alpha) {
    if (n.size() != a.size() || n.empty()) throw ConfigError("need one a_i per group");
    ConditionReport r{"entropy stick dominance with root count", {}};
    const long long m = static_cast<long long>(n.size());
    bool equal_n = true, equal_a = true;
    for (std::size_t i = 1; i < n.size(); ++i) {
        equal_n = equal_n && n[i] == n[0];
        equal_a = equal_a && exact(a[i]) == exact(a[0]);
    }
    r.checks.push_back({"n_i all equal", "", equal_n});
    r.checks.push_back(cmp("n_1>2", Q(n[0]), ">", Q(2)));
    r.checks.push_back({"a_i all equal", "", equal_a});
    Q ndot(0), adot(0);
    for (std::size_t i = 0; i < n.size(); ++i) {
        ndot += n[i];
        adot += exact(a[i]);
    }
    const Q al = exact(alpha);
    const Q a1 = exact(a[0]);
    const Q half = ndot / 2;
    r.checks.push_back(cmp("alpha>1", al, ">", Q(1)));
    r.checks.push_back(cmp("alpha<n_dot/2", al, "<", half));
    r.checks.push_back(cmp("a_1>=(m+1)/m", a1, ">=", Q(m + 1, m)));
    r.checks.push_back(cmp("a_1<n_1/2", a1, "<", Q(n[0], 2)));
    r.checks.push_back(cmp("root exponent bound", Q(2, 3) * (half - al) * (al - 1), ">=", Q(3, 2) * Q(m - 1) * (half - adot)));
    r.checks.push_back(cmp("level exponent bound", (half - al) * (half - 1) / Q(3), ">=", Q(m - 1) * (half - adot) / Q(2)));
    return r;
}

ConditionReport observation_chain_conditions(const HierarchySpec& spec) {
    ConditionReport r{"observation chain", {}};
    r.checks.push_back(cmp("n_D>=2", Q(spec.n(spec.depth())), ">=", Q(2)));
    return r;
}

ConditionReport prior_chain_conditions(const HierarchySpec& spec, int D0) {
    const int D = spec.depth();
    if (D0 < 1 || D0 > D) throw ConfigError("D0 must lie in 1..D");
    ConditionReport r{"prior chain", {}};
    for (int d = 1; d <= D0; ++d) r.checks.push_back(cmp("n_" + std::to_string(d) + ">=2", Q(spec.n(d)), ">=", Q(2)));
    Q a(1, 2);
    for (int l = D0 + 1; l <= D; ++l) a *= spec.n(l);
    r.checks.push_back(cmp("a_D0^(D0)>=2", a, ">=", Q(2)));
    for (int dp = 2; dp <= D0; ++dp) {
        const Q prev = Q(spec.n(dp - 1)) * a;
        const std::string name = "inequality at D'=" + std::to_string(dp);
        if (prev - 2 <= 0) {
            r.checks.push_back({name, "n_{D'-1} a - 2 <= 0", false});
            continue;
        }
        const Q lhs = Q(2 + D - D0, D0 - 1) * (a - 1) / a;
        const Q rhs = Q(spec.n(dp)) * prev / (prev - 2);
        r.checks.push_back(cmp(name, lhs, ">=", rhs));
    }
    return r;
}

}  // namespace stratshrink
