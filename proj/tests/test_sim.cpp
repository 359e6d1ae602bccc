#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spdelab/approx.hpp"
#include "spdelab/coupling.hpp"
#include "spdelab/cylinder.hpp"
#include "spdelab/diagnostics.hpp"
#include "spdelab/errors.hpp"
#include "spdelab/model.hpp"
#include "spdelab/rng.hpp"
#include "spdelab/sim.hpp"
#include "spdelab/stats.hpp"

using spdelab::build_model;
using spdelab::CouplingTensor;
using spdelab::GaussianPolynomial;
using spdelab::GaussianStream;
using spdelab::InitialLaw;
using spdelab::Integrator;
using spdelab::ModelKind;
using spdelab::NumericalError;
using spdelab::SimConfig;
using spdelab::SpectralModel;
using spdelab::ValidationError;

namespace {

using DPoly = GaussianPolynomial<double>;

CouplingTensor zero_tensor(int modes) {
    CouplingTensor t;
    t.mode_count = modes;
    t.by_output.resize(static_cast<std::size_t>(modes));
    return t;
}

SimConfig base_config(const SpectralModel& model, const CouplingTensor& tensor) {
    SimConfig config;
    config.model = &model;
    config.tensor = &tensor;
    config.active_modes = model.mode_count;
    config.dt_model_time = 1e-3;
    config.horizon = 0.1;
    config.ensemble = 4;
    config.seed = 2026;
    return config;
}

} // namespace

TEST_CASE("gaussian streams are reproducible, independent, and standard normal") {
    GaussianStream a(7, 3);
    GaussianStream b(7, 3);
    GaussianStream c(7, 4);
    bool all_equal = true;
    bool any_differ = false;
    for (int i = 0; i < 64; ++i) {
        const std::uint64_t va = a.next_u64();
        all_equal = all_equal && (va == b.next_u64());
        any_differ = any_differ || (va != c.next_u64());
    }
    CHECK(all_equal);
    CHECK(any_differ);

    const int n = 100000;
    GaussianStream stream(11, 0);
    std::vector<double> samples(static_cast<std::size_t>(n));
    double mean = 0.0, second = 0.0;
    for (auto& s : samples) {
        s = stream.normal();
        mean += s;
        second += s * s;
    }
    mean /= n;
    second /= n;
    CHECK(std::abs(mean) < 0.01);
    CHECK(second == doctest::Approx(1.0).epsilon(0.02));
    CHECK(spdelab::ks_statistic_normal(samples) < spdelab::ks_critical_point(n));

    GaussianStream u(13, 5);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform();
        CHECK(x > 0.0);
        CHECK(x <= 1.0);
    }
}

TEST_CASE("ks statistic and critical point: hand oracles") {
    CHECK(spdelab::normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(spdelab::normal_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-6));
    CHECK(spdelab::ks_statistic_normal({0.0}) == doctest::Approx(0.5));
    // two symmetric points at +-1: the gap at the lower point dominates
    const double phi1 = spdelab::normal_cdf(-1.0);
    CHECK(spdelab::ks_statistic_normal({-1.0, 1.0}) == doctest::Approx(0.5 - phi1));
    CHECK(spdelab::ks_critical_point(4096) == doctest::Approx(1.95 / 64.0));
    CHECK_THROWS_AS(spdelab::ks_statistic_normal({}), ValidationError);
}

TEST_CASE("ou substep transition preserves the standard normal law") {
    GaussianStream stream(17, 1);
    const int n = 100000;
    for (const double lambda_h : {0.01, 1.0, 100.0}) {
        const double decay = std::exp(-lambda_h);
        const double kick = std::sqrt(1.0 - decay * decay);
        std::vector<double> mapped(static_cast<std::size_t>(n));
        for (auto& s : mapped) s = decay * stream.normal() + kick * stream.normal();
        CHECK(spdelab::ks_statistic_normal(mapped) < spdelab::ks_critical_point(n));
    }
}

TEST_CASE("pure ou ensemble stays standard gaussian at every checkpoint") {
    const SpectralModel model = build_model(ModelKind::dirichlet_laplacian, 4);
    const CouplingTensor none = zero_tensor(4);
    SimConfig config = base_config(model, none);
    config.dt_model_time = 5e-3;
    config.horizon = 0.5;
    config.ensemble = 1024;
    config.checkpoint_count = 4;
    config.threads = 2;

    const spdelab::SimStats stats = spdelab::ensemble_stats(config);
    CHECK(stats.blow_up_count == 0);
    CHECK(stats.ensemble_used == 1024);
    REQUIRE(stats.checkpoints.size() == 4);
    CHECK(stats.checkpoints.back().time == doctest::Approx(0.5));

    for (const auto& cp : stats.checkpoints) {
        for (int k = 0; k < 4; ++k) {
            CHECK(std::abs(cp.mean(k)) < 0.15);
            CHECK(cp.ks(k) < spdelab::ks_critical_point(1024));
            CHECK(std::abs(cp.fourth_moment(k) - 3.0) < 1.0);
            for (int l = 0; l < 4; ++l) {
                const double target = k == l ? 1.0 : 0.0;
                CHECK(std::abs(cp.covariance(k, l) - target) < 0.2);
                CHECK(cp.covariance(k, l) == doctest::Approx(cp.covariance(l, k)));
            }
        }
    }
}

TEST_CASE("runs are bit-reproducible and thread-count invariant") {
    const SpectralModel model = build_model(ModelKind::dirichlet_laplacian, 3);
    const CouplingTensor tensor =
        spdelab::assemble_coupling(model, spdelab::AssemblyMethod::closed_form);
    SimConfig config = base_config(model, tensor);
    config.ensemble = 64;
    config.horizon = 0.05;

    const std::string first = spdelab::stats_to_json(spdelab::ensemble_stats(config));
    const std::string second = spdelab::stats_to_json(spdelab::ensemble_stats(config));
    CHECK(first == second);

    SimConfig threaded = config;
    threaded.threads = 3;
    CHECK(spdelab::stats_to_json(spdelab::ensemble_stats(threaded)) == first);

    const spdelab::Trajectory ta = spdelab::integrate(config, 7);
    const spdelab::Trajectory tb = spdelab::integrate(config, 7);
    REQUIRE(ta.states.size() == tb.states.size());
    bool identical = true;
    for (std::size_t i = 0; i < ta.states.size(); ++i)
        identical = identical && (ta.states[i] == tb.states[i]);
    CHECK(identical);

    // the save stride thins the grid but keeps the endpoint
    SimConfig strided = config;
    strided.save_every = 10;
    const spdelab::Trajectory tc = spdelab::integrate(strided, 7);
    CHECK(tc.times.size() == 6);
    CHECK(tc.times.back() == doctest::Approx(config.horizon));
    CHECK(tc.states.back() == ta.states.back());

    const std::string csv = spdelab::trajectory_to_csv(tc);
    CHECK(csv.rfind("time,u0,u1,u2\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("ou autocovariance decays with the spectral rate under both integrators") {
    const SpectralModel model = build_model(ModelKind::dirichlet_laplacian, 2);
    const CouplingTensor none = zero_tensor(2);
    const double lambda = model.eigenvalues[0];
    const double lag = 0.1;
    const double target = std::exp(-lambda * lag);

    for (const Integrator integrator : {Integrator::strang_ou_rk4, Integrator::euler_maruyama}) {
        SimConfig config = base_config(model, none);
        config.integrator = integrator;
        config.horizon = lag;
        config.ensemble = 4096;

        double acc = 0.0;
        for (int index = 0; index < config.ensemble; ++index) {
            double first = 0.0, last = 0.0;
            spdelab::integrate_visit(config, static_cast<std::uint64_t>(index),
                                     [&](long long step, double, const Eigen::VectorXd& u) {
                                         if (step == 0) first = u(0);
                                         last = u(0);
                                     });
            acc += first * last;
        }
        acc /= config.ensemble;
        CHECK(std::abs(acc - target) < 0.06);
    }
}

TEST_CASE("taming bends one euler step by exactly dt^2 |G|^2 / (1 + dt |G|)") {
    const SpectralModel model = build_model(ModelKind::dirichlet_laplacian, 4);
    const CouplingTensor tensor =
        spdelab::assemble_coupling(model, spdelab::AssemblyMethod::closed_form);
    SimConfig config = base_config(model, tensor);
    config.horizon = config.dt_model_time;
    config.initial = InitialLaw::custom;
    config.initial_mean = Eigen::VectorXd::Constant(4, 1.5);
    config.initial_covariance = Eigen::MatrixXd::Zero(4, 4);
    config.integrator = Integrator::euler_maruyama;

    SimConfig tamed = config;
    tamed.taming = true;

    // same seed, same noise: the runs differ only through the drift factor
    const Eigen::VectorXd plain = spdelab::integrate(config, 0).states.back();
    const Eigen::VectorXd bent = spdelab::integrate(tamed, 0).states.back();
    const double g_norm = spdelab::drift_eval(tensor, config.initial_mean, 4).norm();
    const double dt = config.dt_model_time;
    const double expected = dt * dt * g_norm * g_norm / (1.0 + dt * g_norm);
    CHECK((plain - bent).norm() == doctest::Approx(expected).epsilon(1e-12));

    // under the splitting integrator the perturbation stays a small fraction
    // of the state but does not vanish
    SimConfig strang = config;
    strang.integrator = Integrator::strang_ou_rk4;
    SimConfig strang_tamed = strang;
    strang_tamed.taming = true;
    const double gap = (spdelab::integrate(strang, 0).states.back() -
                        spdelab::integrate(strang_tamed, 0).states.back())
                           .norm();
    CHECK(gap > 0.0);
    CHECK(gap < 0.05);
}

TEST_CASE("integral diagnostics match the ou closed forms") {
    const SpectralModel model = build_model(ModelKind::dirichlet_laplacian, 2);
    const CouplingTensor none = zero_tensor(2);
    const double lambda = model.eigenvalues[0];
    SimConfig config = base_config(model, none);
    config.ensemble = 2048;
    config.threads = 2;
    const std::vector<double> horizons{0.25, 0.5, 1.0};

    // time integral of lambda * u_0 against the exact stationary covariance
    const auto oracle = [lambda](double t) {
        return 2.0 * (lambda * t - 1.0 + std::exp(-lambda * t));
    };

    const Eigen::VectorXd f = Eigen::VectorXd::Unit(2, 0);
    const spdelab::IntegralDiag ito = spdelab::ito_trick_diag(config, f, horizons);
    REQUIRE(ito.horizons.size() == 3);
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        CHECK(std::abs(ito.left_end[i] - oracle(horizons[i])) < 3.0 * ito.left_end_se[i]);
        CHECK(ito.right[i] == doctest::Approx(horizons[i] * lambda));
        CHECK(ito.left_sup[i] >= ito.left_end[i]);
        CHECK(ito.ratio[i] < 16.0);
    }
    CHECK(ito.sup_slope > 0.5);
    CHECK(ito.sup_slope < 1.6);

    // the same quantity through the polynomial route
    const spdelab::CylinderBasis basis = spdelab::build_cylinder_basis(model, 2);
    const DPoly weighted = DPoly::coordinate(2, 0).scaled(lambda);
    const spdelab::IntegralDiag energy =
        spdelab::energy_estimate_diag(config, weighted, basis, horizons);
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        CHECK(energy.left_sup[i] == doctest::Approx(ito.left_sup[i]).epsilon(1e-13));
        CHECK(energy.left_end[i] == doctest::Approx(ito.left_end[i]).epsilon(1e-13));
        const double dual_sq = lambda * lambda / (1.0 + lambda);
        CHECK(energy.right[i] ==
              doctest::Approx((horizons[i] + horizons[i] * horizons[i]) * dual_sq));
        CHECK(energy.ratio[i] < 16.0);
    }

    // a constant integrand is integrated exactly: left side T^2 with zero spread
    const spdelab::IntegralDiag flat =
        spdelab::energy_estimate_diag(config, DPoly::constant(2, 1.0), basis, horizons);
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        const double t = horizons[i];
        CHECK(flat.left_end[i] == doctest::Approx(t * t).epsilon(1e-12));
        CHECK(flat.left_end_se[i] < 1e-12);
        CHECK(flat.ratio[i] == doctest::Approx(t * t / (t + t * t)).epsilon(1e-10));
        CHECK(flat.ratio[i] <= 1.0);
    }

    const std::string csv = spdelab::integral_diag_to_csv(ito);
    CHECK(csv.rfind("T,left_sup,left_sup_se,left_end,left_end_se,right,ratio\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

    CHECK_THROWS_AS(spdelab::ito_trick_diag(config, f, {0.5, 0.25}), ValidationError);
    CHECK_THROWS_AS(spdelab::ito_trick_diag(config, f, {0.25, 0.2505}), ValidationError);
    CHECK_THROWS_AS(spdelab::ito_trick_diag(config, Eigen::VectorXd::Zero(2), horizons),
                    ValidationError);
}

TEST_CASE("occupation p-variation: exact linear case and the p=1 total variation") {
    const SpectralModel model = build_model(ModelKind::dirichlet_laplacian, 2);
    const CouplingTensor none = zero_tensor(2);
    SimConfig config = base_config(model, none);
    config.dt_model_time = 0.01;
    config.horizon = 0.64;
    config.ensemble = 2;

    const auto constant = spdelab::polynomial_observable(DPoly::constant(2, 0.7));
    for (const double p : {1.0, 1.5, 2.0}) {
        const spdelab::PVarEstimate est = spdelab::occupation_pvar(config, constant, p, 5);
        CHECK(est.value == doctest::Approx(0.7 * 0.64).epsilon(1e-12));
        CHECK(est.standard_error < 1e-12);
        for (std::size_t i = 1; i < est.depth_values.size(); ++i)
            CHECK(est.depth_values[i] >= est.depth_values[i - 1] - 1e-12);
    }

    // p = 1: the dynamic program must reproduce the adjacent-increment sum
    const auto coord = spdelab::polynomial_observable(DPoly::coordinate(2, 0));
    const spdelab::PVarEstimate tv = spdelab::occupation_pvar(config, coord, 1.0, 6);
    const long long steps = 64;
    std::vector<double> path;
    double integral = 0.0, prev = 0.0;
    spdelab::integrate_visit(config, 0, [&](long long step, double, const Eigen::VectorXd& u) {
        if (step > 0) integral += 0.5 * config.dt_model_time * (prev + u(0));
        prev = u(0);
        path.push_back(integral);
    });
    double adjacent = 0.0;
    for (long long j = 1; j <= 64; ++j) {
        const std::size_t hi = static_cast<std::size_t>(j * steps / 64);
        const std::size_t lo = static_cast<std::size_t>((j - 1) * steps / 64);
        adjacent += std::abs(path[hi] - path[lo]);
    }
    CHECK(tv.depth_values.back() == doctest::Approx(adjacent).epsilon(1e-12));

    CHECK_THROWS_AS(spdelab::occupation_pvar(config, constant, 0.5, 5), ValidationError);
    CHECK_THROWS_AS(spdelab::occupation_pvar(config, constant, 2.5, 5), ValidationError);
    CHECK_THROWS_AS(spdelab::occupation_pvar(config, constant, 1.5, 0), ValidationError);
    CHECK_THROWS_AS(spdelab::occupation_pvar(config, constant, 1.5, 15), ValidationError);
    CHECK_THROWS_AS(spdelab::occupation_pvar(config, constant, 1.5, 7), ValidationError);
}

TEST_CASE("truncation-difference drifts shrink in time integral as levels grow") {
    const SpectralModel model = build_model(ModelKind::dirichlet_laplacian, 16);
    const CouplingTensor tensor =
        spdelab::assemble_coupling(model, spdelab::AssemblyMethod::closed_form);
    SimConfig config = base_config(model, tensor);
    // the step must resolve the decorrelation time of the fastest mode pair
    // (about 2e-4 here), or the quadrature noise T dt Var(D) buries the
    // averaging that makes the fine difference small; and the partition
    // blocks must sit above the mixing time of the slowest pair, or the
    // supremum reads off the pointwise magnitude instead of the
    // time-averaged one
    config.dt_model_time = 5e-5;
    config.horizon = 0.25;
    config.ensemble = 64;
    config.threads = 2;

    const Eigen::VectorXd f = Eigen::VectorXd::Unit(16, 0);
    const auto proj = [&](int level) {
        return spdelab::build_rho(model, spdelab::RhoKind::spectral_projection, level).matrix;
    };
    const auto coarse = spdelab::drift_difference_observable(tensor, proj(2), proj(4), f, 16);
    const auto fine = spdelab::drift_difference_observable(tensor, proj(8), proj(16), f, 16);

    const spdelab::PVarEstimate first = spdelab::occupation_pvar(config, coarse, 1.75, 3);
    const spdelab::PVarEstimate second = spdelab::occupation_pvar(config, fine, 1.75, 3);
    MESSAGE("pvar coarse pair ", first.value, " fine pair ", second.value);
    CHECK(second.value < 0.8 * first.value);

    CHECK_THROWS_AS(spdelab::drift_difference_observable(tensor, proj(2), proj(4),
                                                         Eigen::VectorXd::Zero(3), 16),
                    ValidationError);
    CHECK_THROWS_AS(spdelab::drift_difference_observable(tensor, proj(2), proj(4), f, 17),
                    ValidationError);
}

TEST_CASE("config validation rejects inconsistent runs") {
    const SpectralModel model = build_model(ModelKind::dirichlet_laplacian, 4);
    const SpectralModel narrow = build_model(ModelKind::dirichlet_laplacian, 3);
    const CouplingTensor tensor =
        spdelab::assemble_coupling(model, spdelab::AssemblyMethod::closed_form);
    const SimConfig good = base_config(model, tensor);
    CHECK_NOTHROW(spdelab::validate_config(good));

    SimConfig bad = good;
    bad.dt_model_time = 0.0;
    CHECK_THROWS_AS(spdelab::validate_config(bad), ValidationError);

    bad = good;
    bad.horizon = 0.5 * bad.dt_model_time;
    CHECK_THROWS_AS(spdelab::validate_config(bad), ValidationError);

    bad = good;
    bad.horizon = 1.5 * bad.dt_model_time;
    CHECK_THROWS_AS(spdelab::validate_config(bad), ValidationError);

    bad = good;
    bad.ensemble = 0;
    CHECK_THROWS_AS(spdelab::validate_config(bad), ValidationError);

    bad = good;
    bad.active_modes = 0;
    CHECK_THROWS_AS(spdelab::validate_config(bad), ValidationError);
    bad.active_modes = 5;
    CHECK_THROWS_AS(spdelab::validate_config(bad), ValidationError);

    bad = good;
    bad.model = &narrow;
    CHECK_THROWS_AS(spdelab::validate_config(bad), ValidationError);

    bad = good;
    bad.model = nullptr;
    CHECK_THROWS_AS(spdelab::validate_config(bad), ValidationError);

    bad = good;
    bad.initial = InitialLaw::custom;
    bad.initial_mean = Eigen::VectorXd::Zero(3);
    bad.initial_covariance = Eigen::MatrixXd::Identity(4, 4);
    CHECK_THROWS_AS(spdelab::validate_config(bad), ValidationError);
    bad.initial_mean = Eigen::VectorXd::Zero(4);
    bad.initial_covariance = Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(spdelab::validate_config(bad), ValidationError);
}

TEST_CASE("blow-ups are marked, excluded, and fatal only when universal") {
    const SpectralModel model = build_model(ModelKind::dirichlet_laplacian, 4);
    const CouplingTensor tensor =
        spdelab::assemble_coupling(model, spdelab::AssemblyMethod::closed_form);
    SimConfig config = base_config(model, tensor);
    config.dt_model_time = 0.1;
    config.horizon = 0.5;
    config.initial = InitialLaw::custom;
    config.initial_mean = Eigen::VectorXd::Constant(4, 1e9);
    config.initial_covariance = Eigen::MatrixXd::Zero(4, 4);
    config.ensemble = 3;

    const spdelab::Trajectory doomed = spdelab::integrate(config, 0);
    CHECK(doomed.blown_up);
    CHECK(doomed.blow_up_time == doctest::Approx(0.0));
    CHECK(doomed.states.size() == 1);

    CHECK_THROWS_AS(spdelab::ensemble_stats(config), NumericalError);
}
