// fpp_lab: scenario runner for the fractional pseudo-parabolic lab.
//
//   fpp_lab run <config.json> [--output-dir DIR] [--quiet] [--tolerance-override TOL]
//   fpp_lab validate <config.json>
//   fpp_lab list-scenarios
//
// Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 config error,
// 3 numerical failure.

#include "fpp/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

constexpr int exit_pass = 0;
constexpr int exit_verdict = 1;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

void print_regime(const fpp::RegimeReport& r) {
    std::printf("regime    %s\n", fpp::to_string(r.regime));
    std::printf("theta_ok  %s\n", r.theta_ok ? "true" : "false");
    std::printf("s         %g (%s)\n", r.s, r.s_ok ? "ok" : "outside theorem");
    std::printf("N0        %g\n", r.n0);
    for (const auto& w : r.warnings) std::printf("warning   %s\n", w.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractional pseudo-parabolic simulation and verification lab"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    bool quiet = false;
    double tol_override = 0.0;

    auto* run = app.add_subcommand("run", "run a scenario and write summary, series and plot script");
    run->add_option("config", config_path, "scenario JSON")->required();
    run->add_option("--output-dir", output_dir, "override output_dir from the config");
    run->add_flag("--quiet", quiet, "only the final verdict line");
    auto* tol_opt = run->add_option("--tolerance-override", tol_override, "replace fit.tolerance")
                        ->check(CLI::PositiveNumber);

    auto* val = app.add_subcommand("validate", "parse a config and print the regime check");
    val->add_option("config", config_path, "scenario JSON")->required();

    auto* list = app.add_subcommand("list-scenarios", "print the known scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }

    if (list->parsed()) {
        for (const auto& s : fpp::scenario_names()) std::printf("%-22s %s\n", s.c_str(), fpp::scenario_blurb(s).c_str());
        return exit_pass;
    }

    try {
        const fpp::ScenarioConfig cfg = fpp::load_config(config_path);
        if (val->parsed()) {
            std::printf("scenario  %s\n", cfg.scenario.c_str());
            print_regime(fpp::validate(cfg.model, cfg.data.s));
            return exit_pass;
        }
        fpp::RunOptions opt;
        if (!output_dir.empty()) opt.output_dir = output_dir;
        if (tol_opt->count()) opt.tolerance_override = tol_override;
        const fpp::RunSummary s = fpp::run_scenario(cfg, opt);
        if (!quiet) {
            for (const auto& v : s.verdicts)
                std::printf("%-4s %-44s value=%-12.6g tol=%-10.4g %s\n", v.pass ? "PASS" : "FAIL", v.name.c_str(), v.value,
                            v.tolerance, v.detail.c_str());
            std::printf("summary   %s\n", (s.output_dir / "summary.json").string().c_str());
        }
        std::printf("%s %s\n", cfg.scenario.c_str(), s.passed() ? "PASS" : "FAIL");
        return s.passed() ? exit_pass : exit_verdict;
    } catch (const fpp::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config;
    } catch (const fpp::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return exit_numerical;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return exit_numerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_config;
    }
}
