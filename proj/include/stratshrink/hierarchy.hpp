#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stratshrink/rng.hpp"

namespace stratshrink {

// D-level branching structure. Nodes at depth d are stored in mixed-radix
// order, so the children of node k at depth d are k*n_{d+1} + j.
class HierarchySpec {
public:
    HierarchySpec() = default;
    explicit HierarchySpec(std::vector<int> branching);

    int depth() const { return static_cast<int>(branching_.size()); }
    const std::vector<int>& branching() const { return branching_; }
    int n(int d) const { return branching_.at(static_cast<std::size_t>(d - 1)); }
    std::size_t width(int d) const { return widths_.at(static_cast<std::size_t>(d)); }
    std::size_t leaf_count() const { return widths_.back(); }
    std::size_t node_count() const;

    // 1-based address tuple (i_1, ..., i_d) <-> flat index at depth d.
    std::vector<int> address(int d, std::size_t index) const;
    std::size_t index(const std::vector<int>& address) const;
    std::string address_string(int d, std::size_t index) const;

    bool operator==(const HierarchySpec& o) const { return branching_ == o.branching_; }

private:
    std::vector<int> branching_;
    std::vector<std::size_t> widths_{1};
};

class ParamTree {
public:
    ParamTree() = default;
    const HierarchySpec& spec() const { return spec_; }
    double total() const { return rates_[0][0]; }
    const std::vector<double>& rates(int d) const { return rates_.at(static_cast<std::size_t>(d)); }
    const std::vector<double>& leaves() const { return rates_.back(); }
    double rate(int d, std::size_t k) const { return rates_[static_cast<std::size_t>(d)][k]; }
    // theta of node k at depth d >= 1: its share of the parent aggregate.
    double theta(int d, std::size_t k) const { return thetas_[static_cast<std::size_t>(d)][k]; }
    const std::vector<double>& thetas(int d) const { return thetas_.at(static_cast<std::size_t>(d)); }
    // depth-2 ratios of the two-level models
    const std::vector<double>& rho() const { return thetas_.at(2); }

    friend ParamTree build_param_tree(const HierarchySpec&, const std::vector<double>&);

private:
    HierarchySpec spec_;
    std::vector<std::vector<double>> rates_;
    std::vector<std::vector<double>> thetas_;
};

ParamTree build_param_tree(const HierarchySpec& spec, const std::vector<double>& leaf_rates);

// Counts at every depth; depths below the start depth hold zeros.
class ObservationSet {
public:
    ObservationSet() = default;
    ObservationSet(HierarchySpec spec, int start_depth);

    const HierarchySpec& spec() const { return spec_; }
    int start_depth() const { return start_depth_; }
    std::int64_t count(int d, std::size_t k) const { return counts_[static_cast<std::size_t>(d)][k]; }
    const std::vector<std::int64_t>& counts(int d) const { return counts_.at(static_cast<std::size_t>(d)); }
    // Setting a count at an unobserved depth is a shape error.
    void set_count(int d, std::size_t k, std::int64_t value);
    std::vector<std::int64_t>& mutable_counts(int d) { return counts_.at(static_cast<std::size_t>(d)); }

    // Same counts viewed from a later start depth (earlier depths zeroed).
    ObservationSet restrict_to(int start_depth) const;

private:
    HierarchySpec spec_;
    int start_depth_ = 0;
    std::vector<std::vector<std::int64_t>> counts_;
};

// Aggregated totals X~_{(i_1..i_d,+)}(D') for every node.
using AggregateTable = std::vector<std::vector<std::int64_t>>;

AggregateTable aggregate(const ObservationSet& obs);
// Allocation-free variant for hot loops; `out` is resized on first use.
void aggregate_into(const ObservationSet& obs, AggregateTable& out);

ObservationSet sample_observations(const ParamTree& tree, int start_depth, std::uint64_t seed);
// Overwrites the observed depths of `obs` (which must match tree and start depth).
void sample_into(const ParamTree& tree, Rng& rng, ObservationSet& obs);

// Views used by the one- and two-level models.
struct BasicObs {
    std::vector<std::int64_t> x;
    std::int64_t y = 0;
};

struct MultiObs {
    std::vector<std::vector<std::int64_t>> x;
    std::vector<std::int64_t> y;
    std::optional<std::int64_t> z;
};

// D=1, start depth 0: Y is the root count.
BasicObs basic_view(const ObservationSet& obs);
// D=2, start depth 1 (no Z) or 0 (Z = root count).
MultiObs multi_view(const ObservationSet& obs);

std::string observations_csv(const ObservationSet& obs);

}  // namespace stratshrink
