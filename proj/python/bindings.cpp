#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stratshrink/errors.hpp"
#include "stratshrink/estimators.hpp"
#include "stratshrink/experiments.hpp"
#include "stratshrink/hierarchy.hpp"
#include "stratshrink/priors.hpp"
#include "stratshrink/risk.hpp"

namespace py = pybind11;
using namespace stratshrink;

namespace {

EstimatorRule basic_rule(const std::string& name, double beta) {
    if (name == "ml") return EstimatorRule::basic_ml();
    if (name == "flat") return EstimatorRule::basic_flat();
    if (name == "shrink") return EstimatorRule::basic_shrink();
    if (name == "xonly_ml") return EstimatorRule::xonly_ml();
    if (name == "cz") return EstimatorRule::xonly_cz();
    if (name == "half_sum") return EstimatorRule::half_sum();
    if (name == "beta") return EstimatorRule::beta_bayes(beta);
    throw py::value_error("unknown basic rule '" + name + "'");
}

py::dict exact_dict(const ExactValue& v) {
    py::dict d;
    d["value"] = v.value;
    d["truncation_bound"] = v.truncation_bound;
    return d;
}

py::dict risk_dict(const RiskEstimate& r) {
    py::dict d;
    d["mean"] = r.mean;
    d["std_error"] = r.std_error;
    d["reps"] = r.reps;
    d["seed"] = r.seed;
    return d;
}

ParamTree tree_of(const std::vector<int>& branching, const std::vector<double>& leaves) {
    return build_param_tree(HierarchySpec(branching), leaves);
}

}  // namespace

PYBIND11_MODULE(_stratshrink, m) {
    m.doc() = "Shrinkage estimators for stratified Poisson counts";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<CapabilityError>(m, "CapabilityError", PyExc_NotImplementedError);

    m.def(
        "node_rates",
        [](const std::vector<int>& branching, const std::vector<double>& leaves) {
            const auto t = tree_of(branching, leaves);
            std::vector<std::vector<double>> out;
            for (int d = 0; d <= t.spec().depth(); ++d) out.push_back(t.rates(d));
            return out;
        },
        py::arg("branching"), py::arg("leaf_rates"), "Aggregated rates at every depth, root first.");

    m.def(
        "estimate_basic",
        [](const std::vector<std::int64_t>& x, std::int64_t y, const std::string& rule, double beta) {
            return estimate_basic(BasicObs{x, y}, basic_rule(rule, beta));
        },
        py::arg("x"), py::arg("y"), py::arg("rule"), py::arg("beta") = 1.0);

    m.def(
        "jeffreys_exponents",
        [](const std::vector<int>& branching) { return jeffreys_exponents(HierarchySpec(branching)).per_depth(); },
        py::arg("branching"));
    m.def(
        "a_family",
        [](const std::vector<int>& branching, int D0, int Dprime) {
            return build_a_family(HierarchySpec(branching), D0, Dprime).per_depth();
        },
        py::arg("branching"), py::arg("D0"), py::arg("Dprime"));

    m.def(
        "exact_risk_basic",
        [](const std::string& rule, int mm, double Lambda, double tol, double beta) {
            return exact_dict(exact_risk_basic(basic_rule(rule, beta), mm, Lambda, tol));
        },
        py::arg("rule"), py::arg("m"), py::arg("Lambda"), py::arg("tol") = 1e-10, py::arg("beta") = 1.0);

    m.def(
        "mc_risk_basic",
        [](const std::string& rule, const std::vector<double>& leaves, std::uint64_t reps, std::uint64_t seed,
           double beta) {
            const auto t = tree_of({static_cast<int>(leaves.size())}, leaves);
            py::gil_scoped_release release;
            return mc_risk(t, basic_rule(rule, beta), LossKind::SSE, reps, seed);
        },
        py::arg("rule"), py::arg("leaf_rates"), py::arg("reps"), py::arg("seed"), py::arg("beta") = 1.0);

    py::class_<RiskEstimate>(m, "RiskEstimate")
        .def_readonly("mean", &RiskEstimate::mean)
        .def_readonly("std_error", &RiskEstimate::std_error)
        .def_readonly("reps", &RiskEstimate::reps)
        .def_readonly("seed", &RiskEstimate::seed)
        .def("as_dict", &risk_dict);

    m.def("experiment_names", &experiment_names);
    m.def(
        "run_experiment",
        [](const std::string& name, const std::string& config_json, bool override_conditions) {
            RunOptions opt;
            opt.override_conditions = override_conditions;
            ExperimentResult res;
            {
                const auto cfg = Json::parse(config_json);
                py::gil_scoped_release release;
                res = run_experiment(name, cfg, opt);
            }
            py::list claims;
            for (const auto& c : res.claims) claims.append(py::make_tuple(c.name, c.detail, c.passed));
            py::dict d;
            d["claims"] = claims;
            d["warnings"] = res.warnings;
            d["refused"] = res.refused;
            d["passed"] = res.passed();
            d["csv"] = rows_csv(res, "python");
            return d;
        },
        py::arg("name"), py::arg("config_json"), py::arg("override_conditions") = false);
}
