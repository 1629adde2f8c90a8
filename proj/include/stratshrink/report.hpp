#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stratshrink/conditions.hpp"

namespace stratshrink {

// One row of the risk CSV. Empty optionals print as empty cells.
struct CsvRow {
    std::string model, rule_a, rule_b, loss;
    int m = 0;
    std::string branching;
    std::optional<double> Lambda;
    std::string theta_desc;
    std::optional<double> mean, std_error;
    std::optional<unsigned long long> reps, seed;
    std::optional<double> exact, trunc_bound;
    // x coordinate for plots when Lambda is not the natural axis
    std::optional<double> plot_x;
};

struct Claim {
    std::string name;
    std::string detail;
    bool passed = false;
};

struct ExperimentResult {
    std::string experiment;
    std::vector<CsvRow> rows;
    std::vector<Claim> claims;
    std::vector<ConditionReport> conditions;
    std::vector<std::string> warnings;
    // extra files written next to the CSV: (file name, contents)
    std::vector<std::pair<std::string, std::string>> attachments;
    bool refused = false;
    bool overridden = false;

    // Exit-status contract: every claim passed and nothing was refused.
    bool passed() const;
};

std::string csv_header();
std::string csv_line(const CsvRow& row);
// Header comment line (timestamp), then the column header and the rows.
std::string rows_csv(const ExperimentResult& r, const std::string& stamp);
std::string claims_csv(const ExperimentResult& r);

// Plots: one panel per model, one series per (rules, loss, m, branching, theta).
// MC rows get a 95% band.
std::string render_svg(const ExperimentResult& r);

}  // namespace stratshrink
