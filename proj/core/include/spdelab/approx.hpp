#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "spdelab/coupling.hpp"
#include "spdelab/model.hpp"

namespace spdelab {

enum class RhoKind { moving_average, spectral_projection };

// A regularizing operator at level N, materialized as a matrix over the
// model's eigen coordinates. Immutable once built.
struct RhoOperator {
    RhoKind kind = RhoKind::spectral_projection;
    int level = 0;
    Eigen::MatrixXd matrix;
    // Nonempty when the combination is permitted but nonstandard (a moving
    // average on a cosine-frame model).
    std::string warning;
};

// Averaging window at x: (x, x + 1/N) while x + 2/N stays in the interval,
// else (x - 1/N, x). For N = 2 the backward window can protrude past 0;
// integrands are then read through their trigonometric extension.
std::pair<double, double> moving_average_window(int level, double x);

// moving_average needs level >= 2; spectral_projection needs
// 1 <= level <= mode_count.
RhoOperator build_rho(const SpectralModel& model, RhoKind kind, int level);

// Square matrix A with ||A v|| = ||rho_N(v')||_{L2}, the regime-wise weak
// derivative of the averaged field (averaging and differentiation commute
// inside each window regime; the switch-point value jump carries no
// derivative mass). V-side operator norms of the averaging go through this
// factor: measuring the coefficient matrix against truncated derivative
// weights would charge the jump with O(sqrt(M)) artificial energy instead.
Eigen::MatrixXd averaged_derivative_matrix(const SpectralModel& model, int level);

// Least-squares slope of log(values) against log(levels), over the entries
// with positive value; zero when fewer than two such entries exist.
double loglog_slope(const std::vector<int>& levels, const std::vector<double>& values);
double loglog_slope(const std::vector<double>& abscissas, const std::vector<double>& values);

struct RateFit {
    std::vector<int> levels;
    std::vector<double> errors; // |rho_N v - v| in H^alpha
    std::vector<double> norms;  // |rho_N v| in H^beta
    double error_slope = 0.0;
    double norm_slope = 0.0;
    double reference_norm = 0.0; // |v| in H^beta
};

// Decay of the approximation error in H^alpha and growth control of the
// H^beta norm along a geometric level grid (at least four points, constant
// integer ratio). Requires 0 <= alpha <= beta <= 1 and |v| in H^beta > 0.
// Norms are the spectral inhomogeneous ones.
RateFit rate_fit(const SpectralModel& model, RhoKind kind, const Eigen::VectorXd& v,
                 double alpha, double beta, const std::vector<int>& levels);

// |<B(rho phi rho^T) - B(phi), f>| for a symmetric phi. For several
// components the operator acts blockwise on each component.
double b_approx_error(const CouplingTensor& tensor, const RhoOperator& rho,
                      const Eigen::MatrixXd& phi, const Eigen::VectorXd& f);

// CSV with two leading slope-metadata comment lines, then N,error,norm rows.
std::string rate_fit_to_csv(const RateFit& fit);

} // namespace spdelab
