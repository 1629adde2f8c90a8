#include "stratshrink/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stratshrink/errors.hpp"

namespace stratshrink {

HierarchySpec::HierarchySpec(std::vector<int> branching) : branching_(std::move(branching)) {
    if (branching_.empty()) throw ShapeError("hierarchy needs depth >= 1");
    widths_.assign(1, 1);
    for (int n : branching_) {
        if (n < 1) throw ShapeError("branching factors must be >= 1");
        widths_.push_back(widths_.back() * static_cast<std::size_t>(n));
    }
}

std::size_t HierarchySpec::node_count() const {
    std::size_t total = 0;
    for (auto w : widths_) total += w;
    return total;
}

std::vector<int> HierarchySpec::address(int d, std::size_t index) const {
    if (d < 0 || d > depth() || index >= width(d)) throw ShapeError("node index out of range");
    std::vector<int> addr(static_cast<std::size_t>(d));
    for (int level = d; level >= 1; --level) {
        const auto n_l = static_cast<std::size_t>(n(level));
        addr[static_cast<std::size_t>(level - 1)] = static_cast<int>(index % n_l) + 1;
        index /= n_l;
    }
    return addr;
}

std::size_t HierarchySpec::index(const std::vector<int>& address) const {
    if (address.size() > branching_.size()) throw ShapeError("address deeper than hierarchy");
    std::size_t idx = 0;
    for (std::size_t l = 0; l < address.size(); ++l) {
        if (address[l] < 1 || address[l] > branching_[l]) throw ShapeError("address component out of range");
        idx = idx * static_cast<std::size_t>(branching_[l]) + static_cast<std::size_t>(address[l] - 1);
    }
    return idx;
}

std::string HierarchySpec::address_string(int d, std::size_t index) const {
    auto addr = address(d, index);
    std::string out = "(";
    for (std::size_t i = 0; i < addr.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(addr[i]);
    }
    return out + ")";
}

ParamTree build_param_tree(const HierarchySpec& spec, const std::vector<double>& leaf_rates) {
    if (leaf_rates.size() != spec.leaf_count())
        throw ShapeError("leaf rate count " + std::to_string(leaf_rates.size()) + " != " +
                         std::to_string(spec.leaf_count()));
    for (double r : leaf_rates)
        if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("leaf rates must be finite and > 0");

    ParamTree t;
    t.spec_ = spec;
    const int D = spec.depth();
    t.rates_.resize(static_cast<std::size_t>(D) + 1);
    t.rates_[static_cast<std::size_t>(D)] = leaf_rates;
    for (int d = D - 1; d >= 0; --d) {
        const auto& child = t.rates_[static_cast<std::size_t>(d + 1)];
        auto& cur = t.rates_[static_cast<std::size_t>(d)];
        const auto nc = static_cast<std::size_t>(spec.n(d + 1));
        cur.assign(spec.width(d), 0.0);
        for (std::size_t k = 0; k < cur.size(); ++k)
            for (std::size_t j = 0; j < nc; ++j) cur[k] += child[k * nc + j];
    }
    t.thetas_.resize(static_cast<std::size_t>(D) + 1);
    t.thetas_[0] = {1.0};
    for (int d = 1; d <= D; ++d) {
        const auto& cur = t.rates_[static_cast<std::size_t>(d)];
        const auto& par = t.rates_[static_cast<std::size_t>(d - 1)];
        const auto nc = static_cast<std::size_t>(spec.n(d));
        auto& th = t.thetas_[static_cast<std::size_t>(d)];
        th.resize(cur.size());
        for (std::size_t k = 0; k < cur.size(); ++k) th[k] = cur[k] / par[k / nc];
    }
    return t;
}

ObservationSet::ObservationSet(HierarchySpec spec, int start_depth)
    : spec_(std::move(spec)), start_depth_(start_depth) {
    if (start_depth < 0 || start_depth > spec_.depth()) throw ShapeError("start depth out of range");
    counts_.resize(static_cast<std::size_t>(spec_.depth()) + 1);
    for (int d = 0; d <= spec_.depth(); ++d) counts_[static_cast<std::size_t>(d)].assign(spec_.width(d), 0);
}

void ObservationSet::set_count(int d, std::size_t k, std::int64_t value) {
    if (d < start_depth_) throw ShapeError("depth " + std::to_string(d) + " is not observed");
    if (value < 0) throw DomainError("counts must be nonnegative");
    counts_.at(static_cast<std::size_t>(d)).at(k) = value;
}

ObservationSet ObservationSet::restrict_to(int start_depth) const {
    if (start_depth < start_depth_) throw ShapeError("cannot observe depths that were not sampled");
    ObservationSet out = *this;
    out.start_depth_ = start_depth;
    for (int d = 0; d < start_depth; ++d)
        std::fill(out.counts_[static_cast<std::size_t>(d)].begin(), out.counts_[static_cast<std::size_t>(d)].end(), 0);
    return out;
}

void aggregate_into(const ObservationSet& obs, AggregateTable& out) {
    const auto& spec = obs.spec();
    const int D = spec.depth();
    out.resize(static_cast<std::size_t>(D) + 1);
    out[static_cast<std::size_t>(D)] = obs.counts(D);
    if (D < obs.start_depth()) std::fill(out.back().begin(), out.back().end(), 0);
    for (int d = D - 1; d >= 0; --d) {
        auto& cur = out[static_cast<std::size_t>(d)];
        const auto& child = out[static_cast<std::size_t>(d + 1)];
        const auto nc = static_cast<std::size_t>(spec.n(d + 1));
        cur.resize(spec.width(d));
        const bool observed = d >= obs.start_depth();
        const auto& own = obs.counts(d);
        for (std::size_t k = 0; k < cur.size(); ++k) {
            std::int64_t s = observed ? own[k] : 0;
            for (std::size_t j = 0; j < nc; ++j) s += child[k * nc + j];
            cur[k] = s;
        }
    }
}

AggregateTable aggregate(const ObservationSet& obs) {
    AggregateTable out;
    aggregate_into(obs, out);
    return out;
}

void sample_into(const ParamTree& tree, Rng& rng, ObservationSet& obs) {
    const int D = tree.spec().depth();
    for (int d = obs.start_depth(); d <= D; ++d) {
        const auto& rates = tree.rates(d);
        auto& c = obs.mutable_counts(d);
        for (std::size_t k = 0; k < rates.size(); ++k) c[k] = static_cast<std::int64_t>(rng.poisson(rates[k]));
    }
}

ObservationSet sample_observations(const ParamTree& tree, int start_depth, std::uint64_t seed) {
    ObservationSet obs(tree.spec(), start_depth);
    Rng rng(seed);
    sample_into(tree, rng, obs);
    return obs;
}

BasicObs basic_view(const ObservationSet& obs) {
    if (obs.spec().depth() != 1 || obs.start_depth() != 0)
        throw ShapeError("basic model needs D=1 observed from the root");
    return BasicObs{obs.counts(1), obs.count(0, 0)};
}

MultiObs multi_view(const ObservationSet& obs) {
    const auto& spec = obs.spec();
    if (spec.depth() != 2 || obs.start_depth() > 1)
        throw ShapeError("multi-set model needs D=2 observed from depth 0 or 1");
    MultiObs m;
    const auto n2 = static_cast<std::size_t>(spec.n(2));
    const auto& leaves = obs.counts(2);
    for (std::size_t i = 0; i < spec.width(1); ++i) {
        m.x.emplace_back(leaves.begin() + static_cast<std::ptrdiff_t>(i * n2),
                         leaves.begin() + static_cast<std::ptrdiff_t>((i + 1) * n2));
        m.y.push_back(obs.count(1, i));
    }
    if (obs.start_depth() == 0) m.z = obs.count(0, 0);
    return m;
}

std::string observations_csv(const ObservationSet& obs) {
    std::ostringstream os;
    os << "depth,address,count\n";
    for (int d = obs.start_depth(); d <= obs.spec().depth(); ++d)
        for (std::size_t k = 0; k < obs.spec().width(d); ++k)
            os << d << ',' << obs.spec().address_string(d, k) << ',' << obs.count(d, k) << '\n';
    return os.str();
}

}  // namespace stratshrink
