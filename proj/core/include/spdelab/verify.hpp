#pragma once

// Runtime verification suites: the operator identity checks in exact rational
// (or mirrored floating-point) arithmetic, plus model-dependent checks of the
// assembled tensors, smoothing operators, resolvent, and optionally the Monte
// Carlo invariance of the standard Gaussian law. Each suite reports a single
// pass/fail row, so the aggregate forms the verification matrix emitted by
// the CLI.

#include <cstdint>
#include <string>
#include <vector>

#include "spdelab/model.hpp"

namespace spdelab {

enum class SuiteArithmetic { exact, floating };

struct SuiteResult {
    std::string key;
    bool passed = false;
    // Advisory rows report a measured trend without gating the overall
    // status (scaling-critical bounds have no fixed constant to check).
    bool advisory = false;
    int instances = 0;
    double worst = 0.0;     // largest relative defect seen
    double tolerance = 0.0; // 0 for exact-arithmetic suites
    std::string detail;
};

struct VerifyReport {
    std::vector<SuiteResult> suites;

    bool all_passed() const; // advisory rows do not gate
    std::string to_json() const;
    std::string to_text() const; // one PASS/FAIL line per suite
};

struct InvarianceProbe {
    int ensemble = 1024;
    double dt = 1e-3;
    double horizon = 1.0;
    int checkpoints = 2;
};

struct VerifyOptions {
    SuiteArithmetic arithmetic = SuiteArithmetic::exact;
    int instances = 100; // randomized instances per identity suite
    std::uint64_t seed = 1;
    int threads = 1;
    // Mode cap for the quadrature cross-check of the assembled tensor.
    int quadrature_mode_limit = 8;
    bool include_invariance = false;
    InvarianceProbe invariance;
};

// Model-free operator algebra identities (multiplication and divergence
// calculus, generator split and adjoints, degree-shift relations, the
// second-derivative identity, and the cyclic-sum structure of the coupling
// form). Exact arithmetic asserts them with zero tolerance; floating mirrors
// the same instances within rounding.
std::vector<SuiteResult> identity_suites(const VerifyOptions& options);

// Identity suites plus the model-dependent checks: spectral assumptions,
// quadratic-form symmetry and coercivity, tensor oracle equivalence and
// cyclic identities, null-form cancellation, smoothing norm bounds, the
// resolvent identities, the drift dual-norm trend, and (optionally) the
// Monte Carlo invariance probe.
VerifyReport verify_all(const SpectralModel& model, const VerifyOptions& options);

} // namespace spdelab
