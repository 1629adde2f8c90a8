#include <chrono>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stratshrink/errors.hpp"
#include "stratshrink/experiments.hpp"

using namespace stratshrink;

namespace {

std::string utc_stamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shrinkage estimators for stratified Poisson counts: experiment runner"};
    app.require_subcommand(1, 1);

    std::string config_path, out_dir = ".";
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool override_conditions = false, quiet = false;

    for (const auto& name : experiment_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "JSON config (schema 1)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        sub->add_option("--threads", threads, "worker threads (0 = all cores)");
        sub->add_flag("--override-conditions", override_conditions, "run even if hypothesis checks fail");
        sub->add_flag("-q,--quiet", quiet, "only print the verdict");
    }
    CLI11_PARSE(app, argc, argv);
    const std::string experiment = app.get_subcommands().front()->get_name();

    try {
        RunOptions opt;
        if (app.get_subcommands().front()->count("--seed")) opt.seed = seed;
        opt.override_conditions = override_conditions;
        opt.threads = threads;
        const auto cfg = load_config(config_path);
        const auto res = run_experiment(experiment, cfg, opt);
        const auto paths = write_outputs(res, out_dir, utc_stamp());

        for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
        if (!quiet) {
            for (const auto& rep : res.conditions)
                for (const auto& c : rep.checks)
                    std::cout << (c.holds ? "  holds  " : "  FAILS  ") << rep.subject << ": " << c.name
                              << (c.detail.empty() ? "" : " (" + c.detail + ")") << '\n';
            for (const auto& c : res.claims)
                std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail)
                          << '\n';
            for (const auto& p : paths) std::cout << "wrote " << p << '\n';
        }
        if (res.refused) {
            std::cout << experiment << ": refused\n";
            return 3;
        }
        std::cout << experiment << ": " << (res.passed() ? "all claims passed" : "claim check failed")
                  << (res.overridden ? " (conditions overridden)" : "") << '\n';
        return res.passed() ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
