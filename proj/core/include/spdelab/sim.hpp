#pragma once

// Time integration of the mode-truncated SDE
//   du_k = (-lambda_k u_k + G_k(u)) dt + sqrt(2 lambda_k) dW_k
// with the renormalized quadratic drift G of a coupling tensor, plus the
// ensemble statistics behind the invariance checks. The default splitting
// integrator composes an exact Ornstein-Uhlenbeck half-step, a fourth-order
// Runge-Kutta step of the drift ODE, and a second exact half-step; both
// substeps preserve the standard Gaussian law at the continuous level, so
// any measured invariance drift is Runge-Kutta truncation error.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spdelab/coupling.hpp"
#include "spdelab/model.hpp"

namespace spdelab {

enum class Integrator { strang_ou_rk4, euler_maruyama };
enum class InitialLaw { stationary_gaussian, custom };

struct SimConfig {
    const SpectralModel* model = nullptr;
    const CouplingTensor* tensor = nullptr;
    int active_modes = 0;       // evolved modes per component
    double dt_model_time = 0.0; // dimensionless model time
    double horizon = 0.0;       // total time, an integer multiple of dt
    int ensemble = 1;
    std::uint64_t seed = 0;
    Integrator integrator = Integrator::strang_ou_rk4;
    bool taming = false; // off by default: taming biases the invariant law
    InitialLaw initial = InitialLaw::stationary_gaussian;
    Eigen::VectorXd initial_mean;       // custom law only
    Eigen::MatrixXd initial_covariance; // custom law only, positive semidefinite
    int save_every = 1;                 // save-grid stride in steps
    int checkpoint_count = 4;           // equispaced ensemble checkpoints
    int threads = 1;
};

void validate_config(const SimConfig& config);

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states; // folded coefficient vectors
    bool blown_up = false;
    double blow_up_time = -1.0;
};

// Integrates one trajectory on the save grid; `stream` selects the noise
// substream, so trajectory i of an ensemble is integrate(config, i).
Trajectory integrate(const SimConfig& config, std::uint64_t stream = 0);

// Streams the path through `visit(step, time, state)` without storing it;
// called at t = 0 and after every step (the save stride does not apply).
// Returns false when the trajectory blew up, in which case visiting stopped
// at the last finite state.
bool integrate_visit(const SimConfig& config, std::uint64_t stream,
                     const std::function<void(long long, double, const Eigen::VectorXd&)>& visit);

struct CheckpointStats {
    double time = 0.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    Eigen::MatrixXd covariance_se;
    Eigen::VectorXd fourth_moment;
    Eigen::VectorXd ks; // per active coordinate, against the standard normal
};

struct SimStats {
    std::vector<CheckpointStats> checkpoints; // the last one is the final time
    int ensemble_used = 0;                    // trajectories that stayed finite
    int blow_up_count = 0;
};

// Runs the ensemble with independent reproducible substreams and summarizes
// the active coordinates at equispaced checkpoints. Blown-up trajectories
// are excluded from every checkpoint and counted.
SimStats ensemble_stats(const SimConfig& config);

std::string trajectory_to_csv(const Trajectory& trajectory);
std::string stats_to_json(const SimStats& stats);

} // namespace spdelab
