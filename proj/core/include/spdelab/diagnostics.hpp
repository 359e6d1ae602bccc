#pragma once

// Monte Carlo diagnostics for stationary runs: the forward-backward
// martingale bound on time integrals of OU-generator images, the dual-norm
// bound on occupation integrals, and p-variation estimates of occupation
// integrals over dyadic partitions.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spdelab/cylinder.hpp"
#include "spdelab/polynomial.hpp"
#include "spdelab/sim.hpp"

namespace spdelab {

struct IntegralDiag {
    std::vector<double> horizons;
    std::vector<double> left_sup; // E[sup_{t<=T} |int_0^t phi(u_s) ds|^2]
    std::vector<double> left_sup_se;
    std::vector<double> left_end; // E[|int_0^T phi(u_s) ds|^2]
    std::vector<double> left_end_se;
    std::vector<double> right; // comparison scale per horizon
    std::vector<double> ratio; // left_sup / right
    double sup_slope = 0.0;    // log-log slope of left_sup against the horizon
};

// Integrand <u_s, A Pi_N f> = sum over active modes of lambda_k f_k u_k;
// comparison scale T * sum over active modes of lambda_k f_k^2. The weight
// vector f has folded length; entries beyond the active window are ignored.
// config.horizon is replaced by the largest grid entry.
IntegralDiag ito_trick_diag(const SimConfig& config, const Eigen::VectorXd& f,
                            const std::vector<double>& horizons);

// Integrand f(u_s); comparison scale (T + T^2) times the squared truncated
// dual norm of f (which must lie in the span of `basis`).
IntegralDiag energy_estimate_diag(const SimConfig& config, const GaussianPolynomial<double>& f,
                                  const CylinderBasis& basis,
                                  const std::vector<double>& horizons);

std::string integral_diag_to_csv(const IntegralDiag& diag);

struct PVarEstimate {
    double p = 0.0;
    std::vector<int> depths;          // 1 .. max_depth
    std::vector<double> depth_values; // first trajectory, nondecreasing in depth
    double value = 0.0;               // ensemble mean at the deepest partition
    double standard_error = 0.0;
};

// p-variation of t -> int_0^t F(u_s) ds over dyadic partitions of the run
// horizon: the exact supremum over all partitions with breakpoints on the
// depth-d dyadic grid, computed by dynamic programming, reported per depth.
PVarEstimate occupation_pvar(const SimConfig& config,
                             const std::function<double(const Eigen::VectorXd&)>& observable,
                             double p, int max_depth);

// Observable wrappers for occupation_pvar.
std::function<double(const Eigen::VectorXd&)> polynomial_observable(
    const GaussianPolynomial<double>& f);

// <drift smoothed through r1 minus drift smoothed through r2, f> at the
// given truncation level; the pairing vector f itself is not smoothed.
std::function<double(const Eigen::VectorXd&)> drift_difference_observable(
    const CouplingTensor& tensor, const Eigen::MatrixXd& r1, const Eigen::MatrixXd& r2,
    const Eigen::VectorXd& f, int level);

} // namespace spdelab
