#pragma once

// Scenario orchestration: a JSON-described pipeline that builds a model,
// assembles its coupling tensor, and runs the requested stages (operator
// verification, invariance ensembles, smoothing-rate fits, occupation
// integral diagnostics, resolvent probes). Results land atomically in one
// directory per scenario, next to a manifest with the config hash, the code
// version, and the noise generator identifier.

#include <cstdint>
#include <string>
#include <vector>

#include "spdelab/approx.hpp"
#include "spdelab/coupling.hpp"
#include "spdelab/model.hpp"
#include "spdelab/sim.hpp"
#include "spdelab/verify.hpp"

namespace spdelab {

struct ScenarioSim {
    double dt_model_time = 1e-3;
    double horizon = 1.0;
    int ensemble = 256;
    Integrator integrator = Integrator::strang_ou_rk4;
    bool taming = false;
    int checkpoints = 4;
    int active_modes = 0; // 0 evolves every folded mode
};

struct ScenarioRates {
    double alpha = 0.0;
    double beta = 1.0;
    RhoKind kind = RhoKind::moving_average;
    std::vector<int> levels;            // geometric grid, at least four points
    std::string profile = "unit_mode";  // or "rough"
    double profile_exponent = 0.0;      // rough profile decay; 0 means beta + 0.55
};

struct ScenarioDiagnostics {
    std::vector<double> horizons = {0.25, 0.5, 1.0};
    bool ito_trick = true;
    bool energy_estimate = true;
    int basis_degree = 2; // span used for the dual-norm comparison scale
};

struct ScenarioResolvent {
    int basis_degree = 3;
    std::vector<int> cutoffs = {1, 2, 3};
};

// One run description. The stage blocks only take effect when the matching
// run_* flag is set by the config (or by hand).
struct Scenario {
    std::string name = "scenario";
    std::string output_dir = "results";
    std::uint64_t seed = 1;
    int threads = 1;

    ModelKind kind = ModelKind::dirichlet_laplacian;
    int mode_count = 8;
    ModelParams params;

    AssemblyMethod tensor_method = AssemblyMethod::closed_form;

    int rho_level = 0; // 0 skips the smoothing echo stage
    RhoKind rho_kind = RhoKind::moving_average;

    bool run_verify = false;
    VerifyOptions verify;

    bool run_sim = false;
    ScenarioSim sim;

    bool run_rates = false;
    ScenarioRates rates;

    bool run_diagnostics = false;
    ScenarioDiagnostics diagnostics;

    bool run_resolvent = false;
    ScenarioResolvent resolvent;
};

// Strict parse: unknown keys are errors naming the offending key, malformed
// values carry their dotted field path, and the model block is built (so its
// parameter preconditions surface here, not mid-run).
Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(const std::string& path);

// Canonical serialization; its hash goes into the manifest.
std::string scenario_to_json(const Scenario& scenario);

struct ScenarioOutcome {
    bool suites_passed = true;       // assertion stages only; data stages do not gate
    std::string directory;           // where the results landed
    std::vector<std::string> written; // file names inside the directory
};

// Runs every requested stage, then commits all outputs at once (temp files
// plus renames); a failure anywhere leaves the directory untouched.
ScenarioOutcome run_scenario(const Scenario& scenario);

// Scans a results tree (one scenario per subdirectory, or a single scenario
// directory), writes a summary plus per-figure CSVs under <dir>/report, and
// returns the summary text. Unreadable inputs are listed and skipped.
std::string report_results(const std::string& results_dir);

} // namespace spdelab
