#include "spdelab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "json.hpp"

#include "pforeach.hpp"
#include "spdelab/errors.hpp"
#include "spdelab/rng.hpp"
#include "spdelab/stats.hpp"
#include "spdelab/version.hpp"

namespace spdelab {
namespace {

constexpr double kBlowUpCap = 1e10;

long long step_count(const SimConfig& config) {
    const double ratio = config.horizon / config.dt_model_time;
    const long long steps = std::llround(ratio);
    if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-6 * std::max(1.0, ratio))
        throw ValidationError("horizon is not an integer multiple of the step size");
    return steps;
}

// Everything the stepper needs, precomputed once per run. The OU substep is
// the exact transition u <- a u + sqrt(1 - a^2) Z with a = exp(-lambda h),
// which maps the standard Gaussian to itself for every h.
struct StepPlan {
    const CouplingTensor* tensor = nullptr;
    int folded = 0;
    int mode_count = 0;
    int active = 0;
    double dt = 0.0;
    long long steps = 0;
    bool taming = false;
    Integrator integrator = Integrator::strang_ou_rk4;
    InitialLaw initial = InitialLaw::stationary_gaussian;
    std::vector<int> active_slots;
    Eigen::VectorXd ou_decay;  // per active slot, h = dt/2
    Eigen::VectorXd ou_kick;   // sqrt(1 - decay^2)
    Eigen::VectorXd em_drift;  // lambda dt per active slot
    Eigen::VectorXd em_kick;   // sqrt(2 lambda dt)
    Eigen::VectorXd initial_mean;
    Eigen::MatrixXd initial_sqrt; // symmetric square root of the custom covariance
};

StepPlan make_plan(const SimConfig& config) {
    validate_config(config);
    StepPlan plan;
    plan.tensor = config.tensor;
    plan.folded = config.tensor->folded_count();
    plan.mode_count = config.tensor->mode_count;
    plan.active = config.active_modes;
    plan.dt = config.dt_model_time;
    plan.steps = step_count(config);
    plan.taming = config.taming;
    plan.integrator = config.integrator;
    plan.initial = config.initial;

    for (int slot = 0; slot < plan.folded; ++slot) {
        if (slot % plan.mode_count < plan.active) plan.active_slots.push_back(slot);
    }
    const int n = static_cast<int>(plan.active_slots.size());
    plan.ou_decay.resize(n);
    plan.ou_kick.resize(n);
    plan.em_drift.resize(n);
    plan.em_kick.resize(n);
    for (int i = 0; i < n; ++i) {
        const int mode = plan.active_slots[static_cast<std::size_t>(i)] % plan.mode_count;
        const double lambda = config.model->eigenvalues[static_cast<std::size_t>(mode)];
        const double decay = std::exp(-lambda * 0.5 * plan.dt);
        plan.ou_decay(i) = decay;
        plan.ou_kick(i) = std::sqrt(std::max(0.0, 1.0 - decay * decay));
        plan.em_drift(i) = lambda * plan.dt;
        plan.em_kick(i) = std::sqrt(2.0 * lambda * plan.dt);
    }

    if (config.initial == InitialLaw::custom) {
        plan.initial_mean = config.initial_mean;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(config.initial_covariance);
        if (solver.info() != Eigen::Success)
            throw NumericalError("initial covariance eigensolve failed");
        plan.initial_sqrt = solver.eigenvectors() *
                            solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                            solver.eigenvectors().transpose();
    }
    return plan;
}

Eigen::VectorXd draw_initial(const StepPlan& plan, GaussianStream& rng) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(plan.folded);
    if (plan.initial == InitialLaw::stationary_gaussian) {
        for (const int slot : plan.active_slots) u(slot) = rng.normal();
        return u;
    }
    Eigen::VectorXd z(plan.folded);
    for (int i = 0; i < plan.folded; ++i) z(i) = rng.normal();
    u = plan.initial_mean + plan.initial_sqrt * z;
    return u;
}

struct DriftField {
    const StepPlan& plan;
    Eigen::VectorXd operator()(const Eigen::VectorXd& u) const {
        Eigen::VectorXd g = drift_eval(*plan.tensor, u, plan.active);
        if (plan.taming) g /= (1.0 + plan.dt * g.norm());
        return g;
    }
};

void ou_half_step(const StepPlan& plan, GaussianStream& rng, Eigen::VectorXd& u) {
    for (std::size_t i = 0; i < plan.active_slots.size(); ++i) {
        const int slot = plan.active_slots[i];
        u(slot) = plan.ou_decay(static_cast<int>(i)) * u(slot) +
                  plan.ou_kick(static_cast<int>(i)) * rng.normal();
    }
}

void rk4_drift_step(const StepPlan& plan, Eigen::VectorXd& u) {
    const DriftField field{plan};
    const double dt = plan.dt;
    const Eigen::VectorXd k1 = field(u);
    const Eigen::VectorXd k2 = field(u + (0.5 * dt) * k1);
    const Eigen::VectorXd k3 = field(u + (0.5 * dt) * k2);
    const Eigen::VectorXd k4 = field(u + dt * k3);
    u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void euler_step(const StepPlan& plan, GaussianStream& rng, Eigen::VectorXd& u) {
    const DriftField field{plan};
    const Eigen::VectorXd g = field(u);
    for (std::size_t i = 0; i < plan.active_slots.size(); ++i) {
        const int slot = plan.active_slots[i];
        u(slot) += -plan.em_drift(static_cast<int>(i)) * u(slot) + plan.dt * g(slot) +
                   plan.em_kick(static_cast<int>(i)) * rng.normal();
    }
}

bool state_ok(const Eigen::VectorXd& u) {
    return u.allFinite() && u.cwiseAbs().maxCoeff() <= kBlowUpCap;
}

bool run_trajectory(const StepPlan& plan, std::uint64_t seed, std::uint64_t stream,
                    const std::function<void(long long, double, const Eigen::VectorXd&)>& visit) {
    GaussianStream rng(seed, stream);
    Eigen::VectorXd u = draw_initial(plan, rng);
    if (!state_ok(u)) return false;
    visit(0, 0.0, u);
    for (long long step = 1; step <= plan.steps; ++step) {
        if (plan.integrator == Integrator::strang_ou_rk4) {
            ou_half_step(plan, rng, u);
            rk4_drift_step(plan, u);
            ou_half_step(plan, rng, u);
        } else {
            euler_step(plan, rng, u);
        }
        if (!state_ok(u)) return false;
        visit(step, static_cast<double>(step) * plan.dt, u);
    }
    return true;
}

void append_number(std::string& out, double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    out += buffer;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json out = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json out = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(row);
    }
    return out;
}

} // namespace

void validate_config(const SimConfig& config) {
    if (config.model == nullptr || config.tensor == nullptr)
        throw ValidationError("simulation config needs a model and a tensor");
    if (config.model->mode_count != config.tensor->mode_count)
        throw ValidationError("model and tensor disagree on the mode count");
    if (config.active_modes < 1 || config.active_modes > config.model->mode_count)
        throw ValidationError("active mode count must lie in [1, mode_count]");
    if (!(config.dt_model_time > 0.0)) throw ValidationError("step size must be positive");
    if (!(config.horizon >= config.dt_model_time))
        throw ValidationError("horizon must be at least one step");
    if (config.ensemble < 1) throw ValidationError("ensemble must hold at least one trajectory");
    if (config.save_every < 1) throw ValidationError("save stride must be positive");
    if (config.checkpoint_count < 1) throw ValidationError("checkpoint count must be positive");
    if (config.threads < 1) throw ValidationError("thread count must be positive");
    if (config.initial == InitialLaw::custom) {
        const int folded = config.tensor->folded_count();
        if (config.initial_mean.size() != folded)
            throw ValidationError("custom initial mean has the wrong length");
        if (config.initial_covariance.rows() != folded ||
            config.initial_covariance.cols() != folded)
            throw ValidationError("custom initial covariance has the wrong shape");
    }
    step_count(config);
}

Trajectory integrate(const SimConfig& config, std::uint64_t stream) {
    const StepPlan plan = make_plan(config);
    Trajectory out;
    const long long last = plan.steps;
    const bool finished = run_trajectory(
        plan, config.seed, stream, [&](long long step, double time, const Eigen::VectorXd& u) {
            if (step % config.save_every == 0 || step == last) {
                out.times.push_back(time);
                out.states.push_back(u);
            }
        });
    if (!finished) {
        out.blown_up = true;
        out.blow_up_time = out.times.empty() ? 0.0 : out.times.back();
    }
    return out;
}

bool integrate_visit(const SimConfig& config, std::uint64_t stream,
                     const std::function<void(long long, double, const Eigen::VectorXd&)>& visit) {
    const StepPlan plan = make_plan(config);
    return run_trajectory(plan, config.seed, stream, visit);
}

SimStats ensemble_stats(const SimConfig& config) {
    const StepPlan plan = make_plan(config);
    const int active = static_cast<int>(plan.active_slots.size());

    std::vector<long long> checkpoint_steps;
    for (int j = 1; j <= config.checkpoint_count; ++j) {
        const long long step = std::llround(static_cast<double>(j) * static_cast<double>(plan.steps) /
                                            static_cast<double>(config.checkpoint_count));
        if (checkpoint_steps.empty() || step > checkpoint_steps.back())
            checkpoint_steps.push_back(std::max<long long>(step, 1));
    }
    const std::size_t n_checkpoints = checkpoint_steps.size();

    // index-addressed slots keep the reduction order-independent, so the
    // result does not depend on the thread count
    std::vector<Eigen::MatrixXd> snapshots(n_checkpoints);
    for (auto& m : snapshots) m.setZero(config.ensemble, active);
    std::vector<char> blown(static_cast<std::size_t>(config.ensemble), 0);

    detail::pforeach(config.ensemble, config.threads, [&](int index) {
        std::size_t cursor = 0;
        const bool finished = run_trajectory(
            plan, config.seed, static_cast<std::uint64_t>(index),
            [&](long long step, double, const Eigen::VectorXd& u) {
                while (cursor < n_checkpoints && step == checkpoint_steps[cursor]) {
                    for (int c = 0; c < active; ++c)
                        snapshots[cursor](index, c) = u(plan.active_slots[static_cast<std::size_t>(c)]);
                    ++cursor;
                }
            });
        if (!finished) blown[static_cast<std::size_t>(index)] = 1;
    });

    SimStats stats;
    for (const char flag : blown) stats.blow_up_count += flag;
    stats.ensemble_used = config.ensemble - stats.blow_up_count;
    if (stats.ensemble_used == 0) throw NumericalError("every trajectory blew up");
    if (stats.ensemble_used < 2)
        throw NumericalError("fewer than two trajectories survived; no statistics");

    for (std::size_t cp = 0; cp < n_checkpoints; ++cp) {
        Eigen::MatrixXd kept(stats.ensemble_used, active);
        int row = 0;
        for (int index = 0; index < config.ensemble; ++index) {
            if (blown[static_cast<std::size_t>(index)]) continue;
            kept.row(row++) = snapshots[cp].row(index);
        }
        const SampleMoments moments = sample_moments(kept);
        CheckpointStats entry;
        entry.time = static_cast<double>(checkpoint_steps[cp]) * plan.dt;
        entry.mean = moments.mean;
        entry.covariance = moments.covariance;
        entry.covariance_se = moments.covariance_se;
        entry.fourth_moment = moments.fourth_moment;
        entry.ks = moments.ks;
        stats.checkpoints.push_back(std::move(entry));
    }
    return stats;
}

std::string trajectory_to_csv(const Trajectory& trajectory) {
    std::string out = "time";
    const int dim = trajectory.states.empty() ? 0 : static_cast<int>(trajectory.states[0].size());
    for (int c = 0; c < dim; ++c) out += ",u" + std::to_string(c);
    out += "\n";
    for (std::size_t row = 0; row < trajectory.times.size(); ++row) {
        append_number(out, trajectory.times[row]);
        for (int c = 0; c < dim; ++c) {
            out += ",";
            append_number(out, trajectory.states[row](c));
        }
        out += "\n";
    }
    return out;
}

std::string stats_to_json(const SimStats& stats) {
    nlohmann::json report;
    report["ensemble_used"] = stats.ensemble_used;
    report["blow_up_count"] = stats.blow_up_count;
    report["rng_algorithm"] = rng_algorithm_id();
    report["checkpoints"] = nlohmann::json::array();
    for (const auto& cp : stats.checkpoints) {
        nlohmann::json entry;
        entry["time"] = cp.time;
        entry["mean"] = vector_to_json(cp.mean);
        entry["covariance"] = matrix_to_json(cp.covariance);
        entry["covariance_se"] = matrix_to_json(cp.covariance_se);
        entry["fourth_moment"] = vector_to_json(cp.fourth_moment);
        entry["ks"] = vector_to_json(cp.ks);
        report["checkpoints"].push_back(entry);
    }
    return report.dump(2);
}

} // namespace spdelab
