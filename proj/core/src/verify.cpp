#include "spdelab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <Eigen/Dense>

#include "json.hpp"

#include "spdelab/approx.hpp"
#include "spdelab/coupling.hpp"
#include "spdelab/cylinder.hpp"
#include "spdelab/errors.hpp"
#include "spdelab/generator_ops.hpp"
#include "spdelab/operator_norm.hpp"
#include "spdelab/polynomial.hpp"
#include "spdelab/rng.hpp"
#include "spdelab/sim.hpp"
#include "spdelab/stats.hpp"

namespace spdelab {
namespace {

// --- randomization helpers -------------------------------------------------
//
// The identity suites draw small fractions so the exact and floating runs see
// the same instances; only the coefficient type changes.

long long uniform_int(GaussianStream& rng, long long lo, long long hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<long long>(rng.next_u64() % span);
}

template <class Coeff>
Coeff make_fraction(long long num, long long den) {
    return Coeff(num) / Coeff(den);
}
template <>
Rational make_fraction<Rational>(long long num, long long den) {
    return Rational(num) / Rational(den);
}

template <class Coeff>
Coeff random_coeff(GaussianStream& rng) {
    long long num = uniform_int(rng, -6, 5);
    if (num >= 0) ++num; // skip zero
    const long long den = uniform_int(rng, 1, 4);
    return make_fraction<Coeff>(num, den);
}

template <class Coeff>
std::vector<Coeff> random_weights(GaussianStream& rng, int modes) {
    std::vector<Coeff> w;
    w.reserve(static_cast<std::size_t>(modes));
    for (int k = 0; k < modes; ++k)
        w.push_back(make_fraction<Coeff>(uniform_int(rng, 1, 9), uniform_int(rng, 1, 3)));
    return w;
}

template <class Coeff>
GaussianPolynomial<Coeff> random_poly(GaussianStream& rng, int modes, int max_degree,
                                      int max_terms) {
    GaussianPolynomial<Coeff> p(modes);
    const long long terms = uniform_int(rng, 1, max_terms);
    for (long long t = 0; t < terms; ++t) {
        ExponentVec e(static_cast<std::size_t>(modes), 0u);
        int remaining = max_degree;
        for (auto& v : e) {
            if (remaining == 0) break;
            v = static_cast<std::uint32_t>(uniform_int(rng, 0, std::min(remaining, 2)));
            remaining -= static_cast<int>(v);
        }
        p.add_term(e, random_coeff<Coeff>(rng));
    }
    return p;
}

template <class Coeff>
PolyVector<Coeff> random_field(GaussianStream& rng, int modes, int max_degree, int max_terms) {
    PolyVector<Coeff> v;
    v.reserve(static_cast<std::size_t>(modes));
    for (int k = 0; k < modes; ++k)
        v.push_back(random_poly<Coeff>(rng, modes, max_degree, max_terms));
    return v;
}

// (k,l)-symmetric form with exactly vanishing cyclic sums: a random symmetric
// form minus one third of its own cyclic symmetrization.
template <class Coeff>
TrilinearForm<Coeff> random_cyclic_free(GaussianStream& rng, int modes) {
    TrilinearForm<Coeff> t(modes);
    for (int k = 0; k < modes; ++k)
        for (int l = k; l < modes; ++l)
            for (int m = 0; m < modes; ++m) t.set(k, l, m, random_coeff<Coeff>(rng));
    TrilinearForm<Coeff> b(modes);
    const Coeff third = make_fraction<Coeff>(1, 3);
    for (int k = 0; k < modes; ++k)
        for (int l = k; l < modes; ++l)
            for (int m = 0; m < modes; ++m) {
                Coeff cyc = t(k, l, m) + t(m, k, l) + t(l, m, k);
                b.set(k, l, m, t(k, l, m) - third * cyc);
            }
    return b;
}

// --- defect measures --------------------------------------------------------

template <class Coeff>
double max_abs_coeff(const GaussianPolynomial<Coeff>& p) {
    double worst = 0.0;
    for (const auto& [e, c] : p.terms()) worst = std::max(worst, std::abs(to_double(c)));
    return worst;
}

template <class Coeff>
double poly_defect(const GaussianPolynomial<Coeff>& lhs, const GaussianPolynomial<Coeff>& rhs) {
    const double gap = max_abs_coeff(lhs - rhs);
    return gap / (1.0 + max_abs_coeff(lhs) + max_abs_coeff(rhs));
}

template <class Coeff>
double scalar_defect(const Coeff& lhs, const Coeff& rhs) {
    const double a = to_double(lhs), b = to_double(rhs);
    return std::abs(a - b) / (1.0 + std::abs(a) + std::abs(b));
}

template <class Coeff>
constexpr double suite_tolerance() {
    return CoeffTraits<Coeff>::exact ? 0.0 : 1e-9;
}

// Runs one randomized identity suite: `instance` returns the worst relative
// defect of the checked identities for a fresh random draw.
SuiteResult run_identity(const std::string& key, const VerifyOptions& options,
                         std::uint64_t salt, double tolerance,
                         const std::function<double(GaussianStream&)>& instance) {
    SuiteResult result;
    result.key = key;
    result.instances = options.instances;
    result.tolerance = tolerance;
    GaussianStream rng(options.seed, salt);
    for (int i = 0; i < options.instances; ++i)
        result.worst = std::max(result.worst, instance(rng));
    result.passed = result.worst <= tolerance;
    return result;
}

template <class Coeff>
std::vector<SuiteResult> identity_suites_impl(const VerifyOptions& options) {
    using Poly = GaussianPolynomial<Coeff>;
    const double tol = suite_tolerance<Coeff>();
    std::vector<SuiteResult> out;

    out.push_back(run_identity(
        "multiplication_formula", options, 11, tol, [](GaussianStream& rng) {
            const int modes = static_cast<int>(uniform_int(rng, 1, 5));
            const int k = static_cast<int>(uniform_int(rng, 0, modes - 1));
            auto f = random_poly<Coeff>(rng, modes, 4, 5);
            PolyVector<Coeff> fe(static_cast<std::size_t>(modes), Poly(modes));
            fe[static_cast<std::size_t>(k)] = f;
            return poly_defect(f * Poly::coordinate(modes, k), skorokhod(fe) + f.derivative(k));
        }));
    out.back().detail = "coordinate multiplication = divergence + derivative";

    out.push_back(run_identity(
        "ou_divergence_form", options, 12, tol, [](GaussianStream& rng) {
            const int modes = static_cast<int>(uniform_int(rng, 1, 5));
            auto lambda = random_weights<Coeff>(rng, modes);
            auto f = random_poly<Coeff>(rng, modes, 4, 5);
            PolyVector<Coeff> adf;
            adf.reserve(static_cast<std::size_t>(modes));
            for (int k = 0; k < modes; ++k)
                adf.push_back(f.derivative(k).scaled(-lambda[static_cast<std::size_t>(k)]));
            return poly_defect(l0_apply(f, lambda), skorokhod(adf));
        }));
    out.back().detail = "symmetric generator equals the divergence of the weighted gradient";

    out.push_back(run_identity(
        "drift_splits", options, 13, tol, [](GaussianStream& rng) {
            const int modes = static_cast<int>(uniform_int(rng, 1, 5));
            auto b = random_cyclic_free<Coeff>(rng, modes);
            auto f = random_poly<Coeff>(rng, modes, 4, 4);
            return poly_defect(g_apply(f, b, GeneratorPart::full),
                               g_apply(f, b, GeneratorPart::raising) +
                                   g_apply(f, b, GeneratorPart::lowering));
        }));
    out.back().detail = "drift generator = raising part + lowering part";

    out.push_back(run_identity(
        "drift_adjoint_antisymmetry", options, 14, tol, [](GaussianStream& rng) {
            const int modes = static_cast<int>(uniform_int(rng, 1, 5));
            auto b = random_cyclic_free<Coeff>(rng, modes);
            auto f = random_poly<Coeff>(rng, modes, 3, 4);
            auto g = random_poly<Coeff>(rng, modes, 3, 4);
            double worst = scalar_defect(expectation(g_apply(f, b, GeneratorPart::raising) * g),
                                         -expectation(f * g_apply(g, b, GeneratorPart::lowering)));
            worst = std::max(worst, scalar_defect(expectation(g_apply(f, b) * g),
                                                  -expectation(f * g_apply(g, b))));
            return worst;
        }));
    out.back().detail = "raising part is minus the adjoint of the lowering part";

    out.push_back(run_identity(
        "ou_number_commutator", options, 15, tol, [](GaussianStream& rng) {
            const int modes = static_cast<int>(uniform_int(rng, 1, 5));
            auto lambda = random_weights<Coeff>(rng, modes);
            auto f = random_poly<Coeff>(rng, modes, 4, 5);
            return poly_defect(l0_apply(number_operator(f), lambda),
                               number_operator(l0_apply(f, lambda)));
        }));
    out.back().detail = "symmetric generator commutes with the degree operator";

    out.push_back(run_identity(
        "raising_degree_shift", options, 16, tol, [](GaussianStream& rng) {
            const int modes = static_cast<int>(uniform_int(rng, 1, 5));
            auto b = random_cyclic_free<Coeff>(rng, modes);
            auto f = random_poly<Coeff>(rng, modes, 4, 4);
            auto shifted = apply_spectral_function<Coeff>(
                f, [](int n) { return CoeffTraits<Coeff>::from_int(1 + n); });
            double worst = poly_defect(number_operator(g_apply(f, b, GeneratorPart::raising)),
                                       g_apply(shifted, b, GeneratorPart::raising));
            auto gm = g_apply(f, b, GeneratorPart::lowering);
            auto commutator =
                number_operator(gm) - g_apply(number_operator(f), b, GeneratorPart::lowering);
            worst = std::max(worst, poly_defect(commutator, -gm));
            return worst;
        }));
    out.back().detail = "degree operator shifts by +1/-1 across the drift parts";

    out.push_back(run_identity(
        "number_operator_calculus", options, 17, tol, [](GaussianStream& rng) {
            const int modes = static_cast<int>(uniform_int(rng, 1, 5));
            auto p = random_poly<Coeff>(rng, modes, 4, 5);
            const int k = static_cast<int>(uniform_int(rng, 0, modes - 1));

            auto shifted = apply_spectral_function<Coeff>(p, [](int n) {
                return n >= 1 ? CoeffTraits<Coeff>::from_int(n - 1)
                              : CoeffTraits<Coeff>::from_int(0);
            });
            double worst = poly_defect(number_operator(p.derivative(k)), shifted.derivative(k));

            auto v = random_field<Coeff>(rng, modes, 3, 3);
            auto nv = v;
            for (auto& comp : nv)
                comp = apply_spectral_function<Coeff>(
                    comp, [](int n) { return CoeffTraits<Coeff>::from_int(n + 1); });
            worst = std::max(worst, poly_defect(number_operator(skorokhod(v)), skorokhod(nv)));

            Coeff pairing = CoeffTraits<Coeff>::from_int(0);
            for (int j = 0; j < modes; ++j)
                pairing += expectation(v[static_cast<std::size_t>(j)] * p.derivative(j));
            worst = std::max(worst, scalar_defect(expectation(skorokhod(v) * p), pairing));
            return worst;
        }));
    out.back().detail = "degree operator against derivative, divergence, and the adjoint pairing";

    out.push_back(run_identity(
        "second_derivative_identity", options, 18, tol, [](GaussianStream& rng) {
            const int modes = static_cast<int>(uniform_int(rng, 1, 5));
            auto w = random_weights<Coeff>(rng, modes);
            auto f = random_poly<Coeff>(rng, modes, 4, 5);
            Coeff rhs = CoeffTraits<Coeff>::from_int(0);
            auto comps = chaos_decompose(f);
            for (int n = 1; n < static_cast<int>(comps.size()); ++n)
                rhs += CoeffTraits<Coeff>::from_int(n - 1) *
                       dirichlet_form_sq(comps[static_cast<std::size_t>(n)], w);
            return scalar_defect(second_derivative_form_sq(f, w), rhs);
        }));
    out.back().detail = "second-derivative form equals the degree-shifted first-order form";

    out.push_back(run_identity(
        "circular_identity", options, 19, tol, [](GaussianStream& rng) {
            const int modes = static_cast<int>(uniform_int(rng, 1, 5));
            auto b = random_cyclic_free<Coeff>(rng, modes);
            auto f = random_poly<Coeff>(rng, modes, 4, 4);
            double worst = b.max_cyclic_defect() /
                           (1.0 + std::abs(to_double(b(0, 0, 0))));
            const Coeff zero = CoeffTraits<Coeff>::from_int(0);
            worst = std::max(worst, scalar_defect(expectation(g_apply(f, b) * f), zero));
            worst = std::max(worst, scalar_defect(expectation(g_apply(f, b)), zero));
            return worst;
        }));
    out.back().detail = "cyclic-free coupling makes the drift mean-zero and antisymmetric";

    return out;
}

// --- model-dependent suites --------------------------------------------------

SuiteResult check_model_assumptions(const SpectralModel& model) {
    SuiteResult result;
    result.key = "model_assumptions";
    result.instances = model.mode_count;
    double prev = 0.0;
    bool ok = static_cast<int>(model.eigenvalues.size()) == model.mode_count;
    for (const double lambda : model.eigenvalues) {
        if (!(lambda > 0.0) || lambda < prev) ok = false;
        prev = lambda;
    }
    std::string roundtrip = "descriptor round-trip ok";
    try {
        model_from_json(model_to_json(model));
    } catch (const std::exception& e) {
        ok = false;
        roundtrip = std::string("descriptor round-trip failed: ") + e.what();
    }
    result.passed = ok;
    result.detail = "eigenvalues positive and ascending; " + roundtrip;
    return result;
}

SuiteResult check_form_symmetry(const SpectralModel& model) {
    SuiteResult result;
    result.key = "form_symmetry";
    result.tolerance = 1e-10;
    const Eigen::MatrixXd gram = model.vdot_gram();
    const double scale = 1.0 + gram.cwiseAbs().maxCoeff();
    result.worst = (gram - gram.transpose()).cwiseAbs().maxCoeff() / scale;
    result.instances = static_cast<int>(gram.rows());
    result.passed = result.worst <= result.tolerance;
    result.detail = "energy-form matrix is symmetric";
    return result;
}

SuiteResult check_form_coercivity(const SpectralModel& model) {
    SuiteResult result;
    result.key = "form_coercivity";
    const Eigen::MatrixXd gram = model.vdot_gram();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        0.5 * (gram + gram.transpose()));
    const double min_eig = solver.eigenvalues().minCoeff();
    result.worst = min_eig;
    result.instances = static_cast<int>(gram.rows());
    result.passed = min_eig > 0.0;
    std::ostringstream os;
    os << "smallest form eigenvalue " << min_eig;
    result.detail = os.str();
    return result;
}

SuiteResult check_tensor_identities(const CouplingTensor& tensor, const SpectralModel& model,
                                    GaussianStream& rng) {
    SuiteResult result;
    result.key = "tensor_identities";
    result.tolerance = 1e-8;
    result.worst = tensor.max_cyclic_defect();
    const int folded = tensor.folded_count();
    for (int i = 0; i < 200; ++i) {
        const int k = static_cast<int>(uniform_int(rng, 0, folded - 1));
        const int l = static_cast<int>(uniform_int(rng, 0, folded - 1));
        const int m = static_cast<int>(uniform_int(rng, 0, folded - 1));
        result.worst = std::max(result.worst,
                                std::abs(tensor.entry(k, l, m) - tensor.entry(l, k, m)));
    }
    result.instances = 200;
    result.passed = result.worst <= result.tolerance;
    result.detail = "pair-slot symmetry and vanishing cyclic sums";
    if (model.frame == BasisFrame::cosine)
        result.detail += " (with boundary compensation)";
    return result;
}

SuiteResult check_tensor_oracle(const SpectralModel& model, const CouplingTensor& closed,
                                int limit) {
    SuiteResult result;
    result.key = "tensor_oracle_match";
    result.tolerance = 1e-8;
    // Truncating the mode count perturbs numerically diagonalized frames,
    // so both routes are rebuilt at the capped count and compared there.
    const int cap = std::min(model.mode_count, limit);
    const SpectralModel probe =
        cap == model.mode_count ? model : build_model(model.kind, cap, model.params);
    const CouplingTensor reference =
        cap == model.mode_count ? closed
                                : assemble_coupling(probe, AssemblyMethod::closed_form);
    const CouplingTensor quad = assemble_coupling(probe, AssemblyMethod::quadrature);
    int checked = 0;
    for (int k = 0; k < cap; ++k)
        for (int l = 0; l < cap; ++l)
            for (int m = 0; m < cap; ++m) {
                result.worst = std::max(result.worst,
                                        std::abs(reference.entry(k, l, m) - quad.entry(k, l, m)));
                ++checked;
            }
    result.instances = checked;
    result.passed = result.worst <= result.tolerance;
    result.detail = "closed-form entries match independent quadrature";
    return result;
}

SuiteResult check_null_form(const CouplingTensor& tensor, const SpectralModel& model,
                            GaussianStream& rng) {
    SuiteResult result;
    result.key = "null_form_cancellation";
    result.tolerance = 1e-8;
    const int folded = tensor.folded_count();
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        Eigen::VectorXd c(folded);
        for (int i = 0; i < folded; ++i) c(i) = rng.normal();
        c.normalize();
        double acc = 0.0;
        for (int m = 0; m < folded; ++m)
            for (const auto& entry : tensor.by_output[static_cast<std::size_t>(m)]) {
                const double sym = entry.k == entry.l ? 1.0 : 2.0;
                acc += sym * c(entry.k) * c(entry.l) * c(m) * entry.value;
            }
        result.worst = std::max(result.worst, std::abs(acc));
    }
    result.instances = trials;
    result.passed = result.worst <= result.tolerance;
    result.detail = "cubic self-pairing of the drift vanishes";
    if (model.frame == BasisFrame::cosine)
        result.detail += " (boundary compensation active)";
    return result;
}

SuiteResult check_smoothing_bounds(const SpectralModel& model) {
    SuiteResult result;
    result.key = "smoothing_norm_bounds";
    result.tolerance = 2.05;
    const Eigen::MatrixXd identity =
        Eigen::MatrixXd::Identity(model.mode_count, model.mode_count);
    std::ostringstream os;
    os << "averaging operator norms:";
    for (int level = 2; level <= std::max(2, model.mode_count); level *= 2) {
        const RhoOperator rho = build_rho(model, RhoKind::moving_average, level);
        const double norm = operator_norm_estimate(rho.matrix, identity, identity).value;
        result.worst = std::max(result.worst, norm);
        ++result.instances;
        os << " " << norm;
    }
    result.passed = result.worst <= result.tolerance;
    result.detail = os.str();
    return result;
}

SuiteResult check_resolvent(const SpectralModel& model, const CouplingTensor& tensor) {
    SuiteResult result;
    result.key = "resolvent_identities";
    result.tolerance = 1e-6;
    const CylinderBasis basis = build_cylinder_basis(model, 3);
    const int modes = tensor.folded_count();
    using DPoly = GaussianPolynomial<double>;

    std::vector<DPoly> rhs_list;
    rhs_list.push_back(DPoly::coordinate(modes, 0));
    if (modes >= 2)
        rhs_list.push_back(DPoly::coordinate(modes, 0) * DPoly::coordinate(modes, 1));
    ExponentVec e(static_cast<std::size_t>(modes), 0u);
    e[0] = 2;
    rhs_list.push_back(hermite_product<double>(modes, e));

    for (const auto& rhs : rhs_list) {
        for (int cutoff = 1; cutoff <= 3; ++cutoff) {
            const ResolventSolution sol = resolvent_solve(rhs, basis, tensor, cutoff);
            double defect = std::max(std::abs(sol.coercivity_min - 1.0),
                                     std::abs(sol.coercivity_max - 1.0));
            defect = std::max(defect, sol.residual);
            if (sol.rhs_dual_norm > 0.0)
                defect = std::max(defect,
                                  sol.solution_h1_norm / sol.rhs_dual_norm - 1.0);
            result.worst = std::max(result.worst, defect);
            ++result.instances;
        }
    }
    result.passed = result.worst <= result.tolerance;
    result.detail = "unit coercivity, bounded solutions, vanishing residual";
    return result;
}

SuiteResult check_drift_trend(const SpectralModel& model, const VerifyOptions& options) {
    SuiteResult result;
    result.key = "drift_bound_trend";
    result.advisory = true;
    result.passed = true;
    if (model.mode_count < 4) {
        result.detail = "skipped: needs at least 4 modes";
        return result;
    }
    std::ostringstream os;
    os << "dual-norm ratios:";
    for (const int m : {model.mode_count / 2, model.mode_count}) {
        const SpectralModel level = m == model.mode_count
                                        ? model
                                        : build_model(model.kind, m, model.params);
        const CouplingTensor tensor = assemble_coupling(level, AssemblyMethod::closed_form);
        const CylinderBasis basis = build_cylinder_basis(level, 3);
        GaussianStream rng(options.seed, 23);
        double worst = 0.0;
        for (int trial = 0; trial < 5; ++trial) {
            GaussianPolynomial<double> f(tensor.folded_count());
            for (int t = 0; t < 4; ++t) {
                ExponentVec e(static_cast<std::size_t>(tensor.folded_count()), 0u);
                e[static_cast<std::size_t>(uniform_int(rng, 0, m - 1))] += 1;
                e[static_cast<std::size_t>(uniform_int(rng, 0, m - 1))] += 1;
                f.add_term(e, rng.normal());
            }
            const double denom = h1_norm(f, level, 1);
            if (denom == 0.0) continue;
            worst = std::max(worst, hminus1_norm(g_apply(f, tensor), basis) / denom);
        }
        if (!std::isfinite(worst)) result.passed = false;
        result.worst = worst; // last level's ratio, the tighter regime
        ++result.instances;
        os << " " << worst;
    }
    result.detail = os.str() + " (trend only, not gated)";
    return result;
}

SuiteResult check_invariance(const SpectralModel& model, const CouplingTensor& tensor,
                             const VerifyOptions& options) {
    SuiteResult result;
    result.key = "invariance_mc";
    result.tolerance = 1.0; // defects are normalized by their bands
    SimConfig config;
    config.model = &model;
    config.tensor = &tensor;
    config.active_modes = model.mode_count;
    config.dt_model_time = options.invariance.dt;
    config.horizon = options.invariance.horizon;
    config.ensemble = options.invariance.ensemble;
    config.seed = options.seed;
    config.checkpoint_count = options.invariance.checkpoints;
    config.threads = options.threads;

    const SimStats stats = ensemble_stats(config);
    const CheckpointStats& final_cp = stats.checkpoints.back();
    // the covariance band scales like 1/sqrt(n); anchored at 0.08 for n=4096
    const double band = 0.08 * std::sqrt(4096.0 / static_cast<double>(stats.ensemble_used));
    const double ks_crit = ks_critical_point(stats.ensemble_used);
    const int active = static_cast<int>(final_cp.mean.size());
    for (int k = 0; k < active; ++k) {
        result.worst = std::max(result.worst, final_cp.ks(k) / ks_crit);
        for (int l = 0; l < active; ++l) {
            const double target = k == l ? 1.0 : 0.0;
            result.worst =
                std::max(result.worst, std::abs(final_cp.covariance(k, l) - target) / band);
        }
    }
    result.instances = stats.ensemble_used;
    result.passed = result.worst <= result.tolerance && stats.blow_up_count == 0;
    std::ostringstream os;
    os << "ensemble " << stats.ensemble_used << ", covariance band " << band
       << ", KS critical " << ks_crit << ", blow-ups " << stats.blow_up_count;
    result.detail = os.str();
    return result;
}

} // namespace

bool VerifyReport::all_passed() const {
    for (const auto& suite : suites)
        if (!suite.advisory && !suite.passed) return false;
    return true;
}

std::string VerifyReport::to_json() const {
    nlohmann::json out;
    out["all_passed"] = all_passed();
    out["suites"] = nlohmann::json::array();
    for (const auto& suite : suites) {
        nlohmann::json row;
        row["key"] = suite.key;
        row["passed"] = suite.passed;
        row["advisory"] = suite.advisory;
        row["instances"] = suite.instances;
        row["worst"] = suite.worst;
        row["tolerance"] = suite.tolerance;
        row["detail"] = suite.detail;
        out["suites"].push_back(row);
    }
    return out.dump(2);
}

std::string VerifyReport::to_text() const {
    std::ostringstream os;
    for (const auto& suite : suites) {
        os << (suite.passed ? "PASS" : "FAIL") << (suite.advisory ? "*" : " ") << " "
           << suite.key << "  instances=" << suite.instances << " worst=" << suite.worst
           << " tol=" << suite.tolerance << "  " << suite.detail << "\n";
    }
    os << (all_passed() ? "all suites passed" : "SUITE FAILURES PRESENT") << "\n";
    return os.str();
}

std::vector<SuiteResult> identity_suites(const VerifyOptions& options) {
    if (options.instances < 1)
        throw ValidationError("identity suites need at least one instance");
    return options.arithmetic == SuiteArithmetic::exact
               ? identity_suites_impl<Rational>(options)
               : identity_suites_impl<double>(options);
}

VerifyReport verify_all(const SpectralModel& model, const VerifyOptions& options) {
    VerifyReport report;
    report.suites = identity_suites(options);

    report.suites.push_back(check_model_assumptions(model));
    report.suites.push_back(check_form_symmetry(model));
    report.suites.push_back(check_form_coercivity(model));

    const CouplingTensor tensor = assemble_coupling(model, AssemblyMethod::closed_form);
    GaussianStream rng(options.seed, 31);
    report.suites.push_back(check_tensor_identities(tensor, model, rng));
    report.suites.push_back(check_tensor_oracle(model, tensor, options.quadrature_mode_limit));
    report.suites.push_back(check_null_form(tensor, model, rng));
    report.suites.push_back(check_smoothing_bounds(model));
    report.suites.push_back(check_resolvent(model, tensor));
    report.suites.push_back(check_drift_trend(model, options));
    if (options.include_invariance)
        report.suites.push_back(check_invariance(model, tensor, options));
    return report;
}

} // namespace spdelab
