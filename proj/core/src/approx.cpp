#include "spdelab/approx.hpp"

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "spdelab/errors.hpp"
#include "spdelab/quadrature.hpp"
#include "spdelab/trig.hpp"

namespace spdelab {
namespace {

constexpr double kSqrt2 = 1.41421356237309504880168872420969808;

// Window averages of sqrt(2) sin(f pi x) and sqrt(2) cos(f pi x), exact on
// each side of the breakpoint 1 - 2/N. The window integral of a trig mode is
// again a trig expression of the window's left edge, so the averaged
// function is smooth per regime.
double averaged_sine(int level, int f, double x, bool forward) {
    const double w = f * kPi;
    const double amp = level * kSqrt2 / w;
    const double s = std::sin(w / level);
    const double c1 = 1.0 - std::cos(w / level);
    return forward ? amp * (c1 * std::cos(w * x) + s * std::sin(w * x))
                   : amp * (s * std::sin(w * x) - c1 * std::cos(w * x));
}

double averaged_cosine(int level, int f, double x, bool forward) {
    const double w = f * kPi;
    const double amp = level * kSqrt2 / w;
    const double s = std::sin(w / level);
    const double c1 = 1.0 - std::cos(w / level);
    return forward ? amp * (s * std::cos(w * x) - c1 * std::sin(w * x))
                   : amp * (s * std::cos(w * x) + c1 * std::sin(w * x));
}

double averaged_frame_eval(const SpectralModel& model, int level, int j, double x,
                           bool forward) {
    const int f = model.frame_frequency(j);
    if (f == 0) return 1.0; // unit-mass window
    if (model.frame == BasisFrame::sine) return averaged_sine(level, f, x, forward);
    return averaged_cosine(level, f, x, forward);
}

// Average of the frame function's derivative. Averaging a derivative over
// the window equals the difference quotient N (v(edge + 1/N) - v(edge)), so
// this is the regime-wise derivative of the averaged field.
double averaged_deriv_eval(const SpectralModel& model, int level, int j, double x,
                           bool forward) {
    const int f = model.frame_frequency(j);
    if (f == 0) return 0.0;
    if (model.frame == BasisFrame::sine) {
        return f * kPi * averaged_cosine(level, f, x, forward);
    }
    return -f * kPi * averaged_sine(level, f, x, forward);
}

struct WindowNode {
    double x;
    double weight;
    bool forward;
};

// Quadrature nodes covering (0,1) with the regime flag flipping at the
// breakpoint 1 - 2/N. Panel width follows the highest frame frequency so
// every integrand below is resolved.
std::vector<WindowNode> window_nodes(const SpectralModel& model, int level) {
    const int max_freq = model.frame_frequency(model.mode_count - 1);
    const double width = 2.0 / (2.0 * max_freq + 8.0);
    const double breakpoint = 1.0 - 2.0 / level;

    std::vector<WindowNode> nodes;
    const PanelRule& rule = gauss_legendre_16();
    auto add_region = [&](double a, double b, bool forward) {
        if (b - a < 1e-15) return;
        const PanelGrid edges = frequency_panels(a, b, width, 4);
        for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
            const double mid = 0.5 * (edges[p] + edges[p + 1]);
            const double half = 0.5 * (edges[p + 1] - edges[p]);
            for (int q = 0; q < rule.size; ++q) {
                nodes.push_back({mid + half * rule.nodes[q], half * rule.weights[q], forward});
            }
        }
    };
    add_region(0.0, std::max(breakpoint, 0.0), true);
    add_region(std::max(breakpoint, 0.0), 1.0, false);
    return nodes;
}

Eigen::MatrixXd moving_average_matrix(const SpectralModel& model, int level) {
    const int n = model.mode_count;
    const std::vector<WindowNode> nodes = window_nodes(model, level);
    const int nq = static_cast<int>(nodes.size());
    Eigen::MatrixXd frame_vals(n, nq);
    Eigen::MatrixXd averaged(n, nq);
    for (int j = 0; j < n; ++j) {
        for (int q = 0; q < nq; ++q) {
            const WindowNode& node = nodes[static_cast<std::size_t>(q)];
            frame_vals(j, q) = model.frame_eval(j, node.x) * node.weight;
            averaged(j, q) = averaged_frame_eval(model, level, j, node.x, node.forward);
        }
    }
    Eigen::MatrixXd frame_matrix = frame_vals * averaged.transpose();
    if (model.diagonal_frame()) return frame_matrix;
    return model.frame_to_eigen.transpose() * frame_matrix * model.frame_to_eigen;
}

void validate_level_grid(const std::vector<int>& levels) {
    if (levels.size() < 4) {
        throw ValidationError("level grid must be geometric with at least 4 points");
    }
    if (levels[0] < 1 || levels[1] <= levels[0] || levels[1] % levels[0] != 0) {
        throw ValidationError("level grid must be geometric with at least 4 points");
    }
    const int ratio = levels[1] / levels[0];
    if (ratio < 2) {
        throw ValidationError("level grid must be geometric with at least 4 points");
    }
    for (std::size_t i = 1; i + 1 < levels.size(); ++i) {
        if (levels[i + 1] != levels[i] * ratio) {
            throw ValidationError("level grid must be geometric with at least 4 points");
        }
    }
}

} // namespace

std::pair<double, double> moving_average_window(int level, double x) {
    if (level < 2) throw ValidationError("moving average needs level at least 2");
    const double h = 1.0 / level;
    if (x + 2.0 * h <= 1.0) return {x, x + h};
    return {x - h, x};
}

RhoOperator build_rho(const SpectralModel& model, RhoKind kind, int level) {
    RhoOperator rho;
    rho.kind = kind;
    rho.level = level;
    if (kind == RhoKind::spectral_projection) {
        if (level < 1 || level > model.mode_count) {
            throw ValidationError("projection level must lie between 1 and mode_count");
        }
        rho.matrix = Eigen::MatrixXd::Zero(model.mode_count, model.mode_count);
        for (int k = 0; k < level; ++k) rho.matrix(k, k) = 1.0;
        return rho;
    }
    if (level < 2) throw ValidationError("moving average needs level at least 2");
    if (model.frame == BasisFrame::cosine) {
        rho.warning = "moving average on a cosine-frame model is nonstandard";
    }
    rho.matrix = moving_average_matrix(model, level);
    return rho;
}

Eigen::MatrixXd averaged_derivative_matrix(const SpectralModel& model, int level) {
    if (level < 2) throw ValidationError("moving average needs level at least 2");
    const int n = model.mode_count;
    const std::vector<WindowNode> nodes = window_nodes(model, level);
    const int nq = static_cast<int>(nodes.size());

    // Scaled point values of the averaged derivatives, so that the Gram of
    // the columns is the exact L2 Gram of rho_N applied to the frame
    // derivatives. No projection back onto the frame happens here: the
    // averaged derivatives carry boundary-parity content the frame expands
    // slowly, and projecting would discard part of their energy.
    Eigen::MatrixXd deriv_vals(nq, n);
    for (int q = 0; q < nq; ++q) {
        const WindowNode& node = nodes[static_cast<std::size_t>(q)];
        const double root_weight = std::sqrt(node.weight);
        for (int j = 0; j < n; ++j) {
            deriv_vals(q, j) =
                root_weight * averaged_deriv_eval(model, level, j, node.x, node.forward);
        }
    }
    Eigen::MatrixXd gram = deriv_vals.transpose() * deriv_vals;
    if (!model.diagonal_frame()) {
        gram = model.frame_to_eigen.transpose() * gram * model.frame_to_eigen;
    }

    // Symmetric square root, so callers get an ordinary map whose image
    // lengths reproduce ||rho_N(v')||_{L2}.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    Eigen::VectorXd roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().transpose();
}

double loglog_slope(const std::vector<int>& levels, const std::vector<double>& values) {
    std::vector<double> abscissas(levels.begin(), levels.end());
    return loglog_slope(abscissas, values);
}

double loglog_slope(const std::vector<double>& abscissas, const std::vector<double>& values) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < abscissas.size() && i < values.size(); ++i) {
        if (!(values[i] > 0.0) || !(abscissas[i] > 0.0)) continue;
        const double x = std::log(abscissas[i]);
        const double y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 2) return 0.0;
    const double denom = count * sxx - sx * sx;
    return (count * sxy - sx * sy) / denom;
}

RateFit rate_fit(const SpectralModel& model, RhoKind kind, const Eigen::VectorXd& v,
                 double alpha, double beta, const std::vector<int>& levels) {
    if (!(alpha >= 0.0) || !(beta >= alpha) || beta > 1.0) {
        throw ValidationError("orders must satisfy 0 <= alpha <= beta <= 1");
    }
    validate_level_grid(levels);
    if (v.size() != model.mode_count) {
        throw ValidationError("vector length must match mode_count");
    }

    RateFit fit;
    fit.levels = levels;
    fit.reference_norm = sobolev_norm(model, v, beta, SobolevFlavor::spectral, false);
    if (fit.reference_norm == 0.0) {
        throw ValidationError("reference vector has zero norm in the target space");
    }
    for (const int level : levels) {
        const RhoOperator rho = build_rho(model, kind, level);
        const Eigen::VectorXd smoothed = rho.matrix * v;
        fit.errors.push_back(
            sobolev_norm(model, smoothed - v, alpha, SobolevFlavor::spectral, false));
        fit.norms.push_back(sobolev_norm(model, smoothed, beta, SobolevFlavor::spectral, false));
    }
    fit.error_slope = loglog_slope(fit.levels, fit.errors);
    fit.norm_slope = loglog_slope(fit.levels, fit.norms);
    return fit;
}

double b_approx_error(const CouplingTensor& tensor, const RhoOperator& rho,
                      const Eigen::MatrixXd& phi, const Eigen::VectorXd& f) {
    const int n = tensor.mode_count;
    if (rho.matrix.rows() != n || rho.matrix.cols() != n) {
        throw ValidationError("operator size must match the tensor's mode count");
    }
    if (phi.rows() != tensor.folded_count() || phi.cols() != tensor.folded_count()) {
        throw ValidationError("tensor argument must be square with folded mode count");
    }
    Eigen::MatrixXd transport = rho.matrix;
    if (tensor.components > 1) {
        const int folded = tensor.folded_count();
        transport = Eigen::MatrixXd::Zero(folded, folded);
        for (int c = 0; c < tensor.components; ++c) {
            transport.block(c * n, c * n, n, n) = rho.matrix;
        }
    }
    const Eigen::MatrixXd smoothed = transport * phi * transport.transpose();
    return std::abs(apply_B_pairing(tensor, smoothed, f) - apply_B_pairing(tensor, phi, f));
}

std::string rate_fit_to_csv(const RateFit& fit) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "# error_slope," << fit.error_slope << '\n';
    out << "# norm_slope," << fit.norm_slope << '\n';
    out << "N,error,norm\n";
    for (std::size_t i = 0; i < fit.levels.size(); ++i) {
        out << fit.levels[i] << ',' << fit.errors[i] << ',' << fit.norms[i] << '\n';
    }
    return out.str();
}

} // namespace spdelab
