// Command-line front end: one subcommand per pipeline verb, JSON scenario
// configs, and the exit-code contract 0 (pass), 1 (suite failure),
// 2 (validation error), 3 (runtime or numerical error).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "spdelab/errors.hpp"
#include "spdelab/scenario.hpp"
#include "spdelab/verify.hpp"
#include "spdelab/version.hpp"

namespace {

using namespace spdelab;

struct GlobalFlags {
    std::string config;
    std::string out;
    std::string arithmetic;
    long long seed = 0;
    bool have_seed = false;
    int threads = 0;
};

Scenario scenario_for(const GlobalFlags& flags) {
    Scenario s = flags.config.empty() ? Scenario() : load_scenario(flags.config);
    if (!flags.out.empty()) s.output_dir = flags.out;
    if (flags.have_seed) {
        if (flags.seed < 0) throw ValidationError("--seed: must be nonnegative");
        s.seed = static_cast<std::uint64_t>(flags.seed);
    }
    if (flags.threads > 0) s.threads = flags.threads;
    if (!flags.arithmetic.empty())
        s.verify.arithmetic = flags.arithmetic == "exact" ? SuiteArithmetic::exact
                                                          : SuiteArithmetic::floating;
    return s;
}

void print_outcome(const ScenarioOutcome& outcome) {
    std::printf("results in %s\n", outcome.directory.c_str());
    for (const auto& file : outcome.written) std::printf("  %s\n", file.c_str());
}

int run_verify_operators(const GlobalFlags& flags) {
    Scenario s = scenario_for(flags);
    s.run_sim = s.run_rates = s.run_diagnostics = s.run_resolvent = false;
    s.run_verify = true;
    const ScenarioOutcome outcome = run_scenario(s);

    // echo the pass/fail matrix the stage just wrote
    std::ifstream in(std::filesystem::path(outcome.directory) / "verify.txt");
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::printf("%s", buffer.str().c_str());
    print_outcome(outcome);
    return outcome.suites_passed ? 0 : 1;
}

int run_simulate(const GlobalFlags& flags) {
    Scenario s = scenario_for(flags);
    // the Monte Carlo verb: the ensemble stage, plus the occupation-integral
    // diagnostics when the config asks for them
    const bool had_sim = s.run_sim;
    const bool had_diag = s.run_diagnostics;
    s.run_verify = s.run_rates = s.run_resolvent = false;
    s.run_sim = had_sim || !had_diag;
    s.run_diagnostics = had_diag;
    const ScenarioOutcome outcome = run_scenario(s);
    print_outcome(outcome);
    return outcome.suites_passed ? 0 : 1;
}

int run_single_stage(const GlobalFlags& flags, bool Scenario::*stage) {
    Scenario s = scenario_for(flags);
    s.run_verify = s.run_sim = s.run_rates = s.run_diagnostics = s.run_resolvent = false;
    s.*stage = true;
    const ScenarioOutcome outcome = run_scenario(s);
    print_outcome(outcome);
    return outcome.suites_passed ? 0 : 1;
}

int run_report(const GlobalFlags& flags) {
    const std::string dir = flags.out.empty() ? "results" : flags.out;
    std::printf("%s", report_results(dir).c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral Galerkin toolkit for singular stochastic Burgers dynamics"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_version_flag("--version", spdelab::version_string());

    GlobalFlags flags;
    app.add_option("--config", flags.config, "scenario config file (JSON)");
    auto* seed_opt = app.add_option("--seed", flags.seed, "override the scenario seed");
    app.add_option("--out", flags.out, "override the output directory");
    app.add_option("--threads", flags.threads, "cap the worker thread count")
        ->check(CLI::PositiveNumber);
    app.add_option("--arithmetic", flags.arithmetic,
                   "coefficient arithmetic for the identity suites")
        ->check(CLI::IsMember({"exact", "float"}));

    auto* verify_cmd =
        app.add_subcommand("verify-operators", "run the operator identity suites");
    auto* simulate_cmd =
        app.add_subcommand("simulate", "run the invariance ensemble and diagnostics");
    auto* rates_cmd = app.add_subcommand("rates", "fit smoothing-operator rates");
    auto* resolvent_cmd = app.add_subcommand("resolvent", "run truncated resolvent probes");
    auto* report_cmd =
        app.add_subcommand("report", "summarize a results directory into figure CSVs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    flags.have_seed = seed_opt->count() > 0;

    try {
        if (verify_cmd->parsed()) return run_verify_operators(flags);
        if (simulate_cmd->parsed()) return run_simulate(flags);
        if (rates_cmd->parsed()) return run_single_stage(flags, &Scenario::run_rates);
        if (resolvent_cmd->parsed()) return run_single_stage(flags, &Scenario::run_resolvent);
        if (report_cmd->parsed()) return run_report(flags);
        std::fprintf(stderr, "error: no subcommand selected\n");
        return 2;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
