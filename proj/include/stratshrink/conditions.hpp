#pragma once

#include <string>
#include <vector>

#include "stratshrink/hierarchy.hpp"

namespace stratshrink {

struct ConditionCheck {
    std::string name;
    std::string detail;
    bool holds = false;
};

struct ConditionReport {
    std::string subject;
    std::vector<ConditionCheck> checks;
    bool all() const;
};

// Inputs are converted to exact rationals (they must be dyadic or short decimals).
ConditionReport multi_shrink_conditions(const std::vector<int>& n);
ConditionReport entropy_stick_conditions(const std::vector<int>& n, const std::vector<double>& a, double alpha);
ConditionReport entropy_stick_root_conditions(const std::vector<int>& n, const std::vector<double>& a, double alpha);
ConditionReport observation_chain_conditions(const HierarchySpec& spec);
ConditionReport prior_chain_conditions(const HierarchySpec& spec, int D0);

}  // namespace stratshrink
