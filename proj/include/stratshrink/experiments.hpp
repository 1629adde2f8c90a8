#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stratshrink/config.hpp"
#include "stratshrink/report.hpp"

namespace stratshrink {

struct RunOptions {
    std::optional<std::uint64_t> seed;  // overrides the config seed
    bool override_conditions = false;
    unsigned threads = 0;
};

const std::vector<std::string>& experiment_names();

ExperimentResult run_dominance(const Json& cfg, const RunOptions& opt);
ExperimentResult run_minimax(const Json& cfg, const RunOptions& opt);
ExperimentResult run_multi_dominance(const Json& cfg, const RunOptions& opt);
ExperimentResult run_entropy_dominance(const Json& cfg, const RunOptions& opt);
ExperimentResult run_hierarchy(const Json& cfg, const RunOptions& opt);
ExperimentResult run_blyth(const Json& cfg, const RunOptions& opt);
ExperimentResult run_predictive_check(const Json& cfg, const RunOptions& opt);
ExperimentResult run_hudson(const Json& cfg, const RunOptions& opt);

ExperimentResult run_experiment(const std::string& name, const Json& cfg, const RunOptions& opt);

// Writes <name>.csv, <name>_claims.csv and <name>.svg into dir. Returns the paths.
std::vector<std::string> write_outputs(const ExperimentResult& r, const std::string& dir, const std::string& stamp);

// Seed for grid point `index`, derived from the run seed.
std::uint64_t point_seed(std::uint64_t base, std::uint64_t index);

}  // namespace stratshrink
