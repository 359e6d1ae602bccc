#include "spdelab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pforeach.hpp"
#include "spdelab/approx.hpp"
#include "spdelab/errors.hpp"

namespace spdelab {
namespace {

void append_number(std::string& out, double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    out += buffer;
}

std::vector<long long> horizon_steps(const std::vector<double>& horizons, double dt) {
    if (horizons.empty()) throw ValidationError("horizon grid must not be empty");
    std::vector<long long> steps;
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        if (i > 0 && !(horizons[i] > horizons[i - 1]))
            throw ValidationError("horizon grid must be strictly increasing");
        const double ratio = horizons[i] / dt;
        const long long s = std::llround(ratio);
        if (s < 1 || std::abs(ratio - static_cast<double>(s)) > 1e-6 * std::max(1.0, ratio))
            throw ValidationError("diagnostic horizon is not on the step grid");
        steps.push_back(s);
    }
    return steps;
}

// Shared Monte Carlo core: accumulates I(t) = int_0^t phi(u_s) ds by the
// trapezoid rule along the step grid and records sup_{t<=T} |I|^2 and
// |I(T)|^2 at every grid horizon. The observable must be safe to call
// concurrently.
IntegralDiag run_integral_diag(const SimConfig& config,
                               const std::function<double(const Eigen::VectorXd&)>& observable,
                               const std::vector<double>& horizons,
                               const std::function<double(double)>& right_of) {
    if (config.initial != InitialLaw::stationary_gaussian)
        throw ValidationError("integral diagnostics need the stationary initial law");
    const std::vector<long long> marks = horizon_steps(horizons, config.dt_model_time);

    SimConfig run = config;
    run.horizon = horizons.back();
    validate_config(run);

    const int n_h = static_cast<int>(horizons.size());
    Eigen::MatrixXd sup_sq(config.ensemble, n_h);
    Eigen::MatrixXd end_sq(config.ensemble, n_h);
    std::vector<char> blown(static_cast<std::size_t>(config.ensemble), 0);
    const double dt = config.dt_model_time;

    detail::pforeach(config.ensemble, config.threads, [&](int index) {
        double integral = 0.0;
        double sup_abs = 0.0;
        double phi_prev = 0.0;
        int cursor = 0;
        const bool finished = integrate_visit(
            run, static_cast<std::uint64_t>(index),
            [&](long long step, double, const Eigen::VectorXd& u) {
                const double phi = observable(u);
                if (step > 0) {
                    integral += 0.5 * dt * (phi_prev + phi);
                    sup_abs = std::max(sup_abs, std::abs(integral));
                }
                phi_prev = phi;
                while (cursor < n_h && step == marks[static_cast<std::size_t>(cursor)]) {
                    sup_sq(index, cursor) = sup_abs * sup_abs;
                    end_sq(index, cursor) = integral * integral;
                    ++cursor;
                }
            });
        if (!finished) blown[static_cast<std::size_t>(index)] = 1;
    });

    int kept = 0;
    for (const char flag : blown) kept += (flag == 0);
    if (kept < 2) throw NumericalError("fewer than two trajectories survived; no statistics");

    IntegralDiag diag;
    diag.horizons = horizons;
    for (int h = 0; h < n_h; ++h) {
        double sum_sup = 0.0, sum_sup2 = 0.0, sum_end = 0.0, sum_end2 = 0.0;
        for (int index = 0; index < config.ensemble; ++index) {
            if (blown[static_cast<std::size_t>(index)]) continue;
            sum_sup += sup_sq(index, h);
            sum_sup2 += sup_sq(index, h) * sup_sq(index, h);
            sum_end += end_sq(index, h);
            sum_end2 += end_sq(index, h) * end_sq(index, h);
        }
        const double n = static_cast<double>(kept);
        const double mean_sup = sum_sup / n;
        const double mean_end = sum_end / n;
        diag.left_sup.push_back(mean_sup);
        diag.left_end.push_back(mean_end);
        diag.left_sup_se.push_back(
            std::sqrt(std::max(0.0, sum_sup2 / n - mean_sup * mean_sup) / (n - 1.0)));
        diag.left_end_se.push_back(
            std::sqrt(std::max(0.0, sum_end2 / n - mean_end * mean_end) / (n - 1.0)));
        const double right = right_of(horizons[static_cast<std::size_t>(h)]);
        if (!(right > 0.0)) throw ValidationError("comparison scale is zero");
        diag.right.push_back(right);
        diag.ratio.push_back(mean_sup / right);
    }
    diag.sup_slope = loglog_slope(diag.horizons, diag.left_sup);
    return diag;
}

// Monomial evaluator detached from the polynomial object so concurrent calls
// share nothing mutable.
struct PolyEvaluator {
    std::vector<std::pair<ExponentVec, double>> terms;

    double operator()(const Eigen::VectorXd& u) const {
        double acc = 0.0;
        for (const auto& [e, c] : terms) {
            double prod = c;
            for (std::size_t k = 0; k < e.size(); ++k) {
                const double x = u(static_cast<int>(k));
                for (std::uint32_t rep = 0; rep < e[k]; ++rep) prod *= x;
            }
            acc += prod;
        }
        return acc;
    }
};

} // namespace

IntegralDiag ito_trick_diag(const SimConfig& config, const Eigen::VectorXd& f,
                            const std::vector<double>& horizons) {
    validate_config(config);
    const int folded = config.tensor->folded_count();
    const int mode_count = config.tensor->mode_count;
    if (f.size() != folded) throw ValidationError("weight vector must have folded length");

    Eigen::VectorXd weights = Eigen::VectorXd::Zero(folded);
    double scale = 0.0;
    for (int slot = 0; slot < folded; ++slot) {
        const int mode = slot % mode_count;
        if (mode >= config.active_modes) continue;
        const double lambda = config.model->eigenvalues[static_cast<std::size_t>(mode)];
        weights(slot) = lambda * f(slot);
        scale += lambda * f(slot) * f(slot);
    }
    return run_integral_diag(
        config, [weights](const Eigen::VectorXd& u) { return weights.dot(u); }, horizons,
        [scale](double t) { return t * scale; });
}

IntegralDiag energy_estimate_diag(const SimConfig& config, const GaussianPolynomial<double>& f,
                                  const CylinderBasis& basis,
                                  const std::vector<double>& horizons) {
    validate_config(config);
    if (f.modes() != config.tensor->folded_count())
        throw ValidationError("polynomial mode count must match the folded tensor");
    const double dual = hminus1_norm(f, basis);

    PolyEvaluator evaluator;
    for (const auto& [e, c] : f.terms()) evaluator.terms.emplace_back(e, c);
    return run_integral_diag(
        config, [evaluator](const Eigen::VectorXd& u) { return evaluator(u); }, horizons,
        [dual](double t) { return (t + t * t) * dual * dual; });
}

std::string integral_diag_to_csv(const IntegralDiag& diag) {
    std::string out = "T,left_sup,left_sup_se,left_end,left_end_se,right,ratio\n";
    for (std::size_t i = 0; i < diag.horizons.size(); ++i) {
        append_number(out, diag.horizons[i]);
        for (const double value : {diag.left_sup[i], diag.left_sup_se[i], diag.left_end[i],
                                   diag.left_end_se[i], diag.right[i], diag.ratio[i]}) {
            out += ",";
            append_number(out, value);
        }
        out += "\n";
    }
    return out;
}

PVarEstimate occupation_pvar(const SimConfig& config,
                             const std::function<double(const Eigen::VectorXd&)>& observable,
                             double p, int max_depth) {
    validate_config(config);
    if (!(p >= 1.0 && p <= 2.0)) throw ValidationError("p must lie in [1, 2]");
    if (max_depth < 1 || max_depth > 14)
        throw ValidationError("partition depth must lie in [1, 14]");
    const long long steps = std::llround(config.horizon / config.dt_model_time);
    if (steps < (1ll << max_depth))
        throw ValidationError("partition depth exceeds the step count");
    const double dt = config.dt_model_time;

    // exact supremum over partitions with breakpoints on the dyadic grid
    const auto dp_value = [p](const std::vector<double>& points) {
        const std::size_t m = points.size();
        std::vector<double> best(m, 0.0);
        for (std::size_t j = 1; j < m; ++j) {
            double value = 0.0;
            for (std::size_t i = 0; i < j; ++i) {
                const double candidate = best[i] + std::pow(std::abs(points[j] - points[i]), p);
                value = std::max(value, candidate);
            }
            best[j] = value;
        }
        return std::pow(best[m - 1], 1.0 / p);
    };

    std::vector<double> finals(static_cast<std::size_t>(config.ensemble), 0.0);
    std::vector<char> blown(static_cast<std::size_t>(config.ensemble), 0);
    PVarEstimate out;
    out.p = p;

    detail::pforeach(config.ensemble, config.threads, [&](int index) {
        std::vector<double> path;
        path.reserve(static_cast<std::size_t>(steps) + 1);
        double integral = 0.0;
        double phi_prev = 0.0;
        const bool finished = integrate_visit(
            config, static_cast<std::uint64_t>(index),
            [&](long long step, double, const Eigen::VectorXd& u) {
                const double phi = observable(u);
                if (step > 0) integral += 0.5 * dt * (phi_prev + phi);
                phi_prev = phi;
                path.push_back(integral);
            });
        if (!finished) {
            blown[static_cast<std::size_t>(index)] = 1;
            return;
        }
        const auto dyadic_points = [&](int depth) {
            const long long cells = 1ll << depth;
            std::vector<double> points;
            points.reserve(static_cast<std::size_t>(cells) + 1);
            for (long long j = 0; j <= cells; ++j) {
                const long long idx = std::llround(static_cast<double>(j) *
                                                   static_cast<double>(steps) /
                                                   static_cast<double>(cells));
                points.push_back(path[static_cast<std::size_t>(idx)]);
            }
            return points;
        };
        if (index == 0) {
            for (int depth = 1; depth <= max_depth; ++depth) {
                out.depths.push_back(depth);
                out.depth_values.push_back(dp_value(dyadic_points(depth)));
            }
            finals[0] = out.depth_values.back();
        } else {
            finals[static_cast<std::size_t>(index)] = dp_value(dyadic_points(max_depth));
        }
    });

    int kept = 0;
    double sum = 0.0, sum2 = 0.0;
    for (int index = 0; index < config.ensemble; ++index) {
        if (blown[static_cast<std::size_t>(index)]) continue;
        ++kept;
        sum += finals[static_cast<std::size_t>(index)];
        sum2 += finals[static_cast<std::size_t>(index)] * finals[static_cast<std::size_t>(index)];
    }
    if (kept == 0) throw NumericalError("every trajectory blew up");
    const double n = static_cast<double>(kept);
    out.value = sum / n;
    out.standard_error =
        kept > 1 ? std::sqrt(std::max(0.0, sum2 / n - out.value * out.value) / (n - 1.0)) : 0.0;
    return out;
}

std::function<double(const Eigen::VectorXd&)> polynomial_observable(
    const GaussianPolynomial<double>& f) {
    PolyEvaluator evaluator;
    for (const auto& [e, c] : f.terms()) evaluator.terms.emplace_back(e, c);
    const int modes = f.modes();
    return [evaluator, modes](const Eigen::VectorXd& u) {
        if (u.size() != modes) throw ValidationError("state length does not match the observable");
        return evaluator(u);
    };
}

std::function<double(const Eigen::VectorXd&)> drift_difference_observable(
    const CouplingTensor& tensor, const Eigen::MatrixXd& r1, const Eigen::MatrixXd& r2,
    const Eigen::VectorXd& f, int level) {
    if (f.size() != tensor.folded_count())
        throw ValidationError("pairing vector must have folded length");
    if (level < 1 || level > tensor.mode_count)
        throw ValidationError("truncation level must lie in [1, mode_count]");
    const CouplingTensor first = conjugate_pair_slots(tensor, r1);
    const CouplingTensor second = conjugate_pair_slots(tensor, r2);
    const Eigen::VectorXd pairing = f;
    return [first, second, pairing, level](const Eigen::VectorXd& u) {
        return (drift_eval(first, u, level) - drift_eval(second, u, level)).dot(pairing);
    };
}

} // namespace spdelab
