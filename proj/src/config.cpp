#include "stratshrink/config.hpp"

#include <fstream>
#include <set>

#include "stratshrink/errors.hpp"

namespace stratshrink {

Json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void require_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : j.items())
        if (!ok.count(item.key())) throw ConfigError(where + ": unknown key '" + item.key() + "'");
}

void check_header(const Json& j, const std::string& experiment) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (!j.contains("schema") || !j.at("schema").is_number_integer() || j.at("schema").get<int>() != 1)
        throw ConfigError("config needs \"schema\": 1");
    if (j.contains("experiment") && j.at("experiment").get<std::string>() != experiment)
        throw ConfigError("config is for experiment '" + j.at("experiment").get<std::string>() + "', not '" +
                          experiment + "'");
}

ParamTree parse_tree(const Json& j) {
    require_keys(j, {"branching", "leaf_rates"}, "tree");
    if (!j.contains("branching") || !j.contains("leaf_rates")) throw ConfigError("tree needs branching and leaf_rates");
    HierarchySpec spec(j.at("branching").get<std::vector<int>>());
    return build_param_tree(spec, j.at("leaf_rates").get<std::vector<double>>());
}

Json tree_to_json(const ParamTree& tree) {
    return Json{{"branching", tree.spec().branching()}, {"leaf_rates", tree.leaves()}};
}

PriorExponents parse_prior(const Json& j, const HierarchySpec& spec) {
    if (!j.is_object() || !j.contains("family")) throw ConfigError("prior needs a family");
    const auto family = j.at("family").get<std::string>();
    if (family == "jeffreys") {
        require_keys(j, {"family"}, "prior");
        return jeffreys_exponents(spec);
    }
    if (family == "a_family") {
        require_keys(j, {"family", "D0", "Dprime"}, "prior");
        return build_a_family(spec, j.at("D0").get<int>(), j.at("Dprime").get<int>());
    }
    if (family == "stick") {
        require_keys(j, {"family", "alpha", "a"}, "prior");
        return stick_breaking(spec, j.at("alpha").get<double>(), j.at("a").get<std::vector<double>>());
    }
    if (family == "beta") {
        require_keys(j, {"family", "beta"}, "prior");
        return beta_exponents(spec, BetaPrior{j.at("beta").get<double>()});
    }
    if (family == "flat_lambda") {
        require_keys(j, {"family"}, "prior");
        return flat_lambda(spec);
    }
    if (family == "flat_theta_lambda" || family == "flat_theta_Lambda") {
        require_keys(j, {"family"}, "prior");
        return flat_theta_lambda(spec);
    }
    if (family == "uniform") {
        require_keys(j, {"family", "a"}, "prior");
        return uniform_exponents(spec, j.at("a").get<std::vector<double>>());
    }
    throw ConfigError("unknown prior family '" + family + "'");
}

std::vector<double> number_list(const Json& j, const char* key, std::vector<double> fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    std::vector<double> out = v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
    if (out.empty()) throw ConfigError(std::string(key) + " must be nonempty");
    return out;
}

std::vector<int> int_list(const Json& j, const char* key, std::vector<int> fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    std::vector<int> out = v.is_array() ? v.get<std::vector<int>>() : std::vector<int>{v.get<int>()};
    if (out.empty()) throw ConfigError(std::string(key) + " must be nonempty");
    return out;
}

}  // namespace stratshrink
