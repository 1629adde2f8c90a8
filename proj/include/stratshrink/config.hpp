#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stratshrink/hierarchy.hpp"
#include "stratshrink/priors.hpp"

namespace stratshrink {

using Json = nlohmann::json;

Json load_config(const std::string& path);

// Throws ConfigError on keys outside `allowed`.
void require_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where);
// schema must be 1; experiment, if present, must equal `experiment`.
void check_header(const Json& j, const std::string& experiment);

// {"branching": [...], "leaf_rates": [...]}
ParamTree parse_tree(const Json& j);
Json tree_to_json(const ParamTree& tree);

// {"family": "jeffreys" | "a_family" | "stick" | "beta" | "flat_lambda" | "flat_theta_lambda" | "uniform", ...}
PriorExponents parse_prior(const Json& j, const HierarchySpec& spec);

// Helpers that accept a scalar or a list.
std::vector<double> number_list(const Json& j, const char* key, std::vector<double> fallback);
std::vector<int> int_list(const Json& j, const char* key, std::vector<int> fallback);

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace stratshrink
