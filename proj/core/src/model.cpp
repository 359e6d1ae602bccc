#include "spdelab/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "json.hpp"
#include "spdelab/quadrature.hpp"
#include "spdelab/trig.hpp"

namespace spdelab {

namespace {

using nlohmann::json;

constexpr double kSqrt2 = 1.414213562373095048801688724209698079;

void validate_common(int mode_count, const ModelParams& params) {
    if (mode_count < 1) throw ValidationError("mode_count must be at least 1");
    if (params.components < 1) throw ValidationError("components must be at least 1");
    if (params.domain != "unit_interval") {
        if (params.domain.find("inf") != std::string::npos || params.domain == "half_line")
            throw ValidationError("unbounded domain unsupported");
        throw ValidationError("unsupported domain: " + params.domain);
    }
}

// Deterministic eigenvector orientation: make the entry of largest magnitude
// positive so rebuilt models are bit-comparable.
void fix_column_signs(Eigen::MatrixXd& u) {
    for (Eigen::Index i = 0; i < u.cols(); ++i) {
        Eigen::Index argmax = 0;
        u.col(i).cwiseAbs().maxCoeff(&argmax);
        if (u(argmax, i) < 0.0) u.col(i) = -u.col(i);
    }
}

SpectralModel diagonalized_model(ModelKind kind, int mode_count, const ModelParams& params,
                                 const Eigen::MatrixXd& form, BasisFrame frame) {
    Eigen::MatrixXd sym = 0.5 * (form + form.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eigendecomposition of the assembled form failed");

    SpectralModel model;
    model.kind = kind;
    model.mode_count = mode_count;
    model.params = params;
    model.frame = frame;
    model.frame_to_eigen = solver.eigenvectors();
    fix_column_signs(model.frame_to_eigen);
    model.eigenvalues.assign(solver.eigenvalues().data(),
                             solver.eigenvalues().data() + mode_count);
    if (model.eigenvalues.front() <= 0.0)
        throw NumericalError("assembled form is not positive definite");
    return model;
}

// --- fractional kernel machinery -----------------------------------------
//
// For frame functions f, g with frequencies p, q, the symmetric form
//   (c/2) iint_{(0,1)^2} (f(y)-f(x)) (g(y)-g(x)) |y-x|^{-1-gamma}
// reduces, after substituting u = y - x and shifting to the midpoint, to
//   c * int_0^1 F(u) u^{-1-gamma} du,
// F(u) = 8 sin(p pi u/2) sin(q pi u/2) * I(u), with I(u) the integral of the
// midpoint oscillation over (u/2, 1-u/2). I(u) is a closed-form trig
// integral; cos-cos for the sine frame, sin-sin for the cosine frame.
//
// F vanishes to second order at u = 0, so subtracting its quadratic and
// cubic Taylor terms S(u) = c2 u^2 + c3 u^3 leaves an O(u^{3-gamma})
// integrand. S integrates against u^{-1-gamma} in closed form; the remainder
// is handled by geometrically graded panels (width also capped so the
// fastest oscillation stays resolved).

double frame_osc(BasisFrame frame, int freq, double z) {
    const double arg = static_cast<double>(freq) * kPi * z;
    return frame == BasisFrame::sine ? std::cos(arg) : std::sin(arg);
}

double midpoint_integral(BasisFrame frame, int p, int q, double z0, double z1) {
    return frame == BasisFrame::sine ? integral_cos_cos(p, q, z0, z1)
                                     : integral_sin_sin(p, q, z0, z1);
}

PanelGrid separation_grid(int freq_sum) {
    const double cap = 2.0 / static_cast<double>(freq_sum + 2);
    PanelGrid edges{0.0};
    double x = 0.0;
    double width = 1e-9;
    while (x < 1.0) {
        x = std::min(1.0, x + width);
        edges.push_back(x);
        width = std::min(width * 2.0, cap);
    }
    return edges;
}

double reduced_kernel_entry(BasisFrame frame, int p, int q, double gamma,
                            const PanelGrid& edges) {
    // Taylor data of F at u = 0: F ~ 2 p q pi^2 u^2 * (i0 + i1 u).
    const double lead = 2.0 * static_cast<double>(p) * static_cast<double>(q) * kPi * kPi;
    const double i0 = midpoint_integral(frame, p, q, 0.0, 1.0);
    const double i1 = -0.5 * (frame_osc(frame, p, 0.0) * frame_osc(frame, q, 0.0) +
                              frame_osc(frame, p, 1.0) * frame_osc(frame, q, 1.0));
    const double c2 = lead * i0;
    const double c3 = lead * i1;

    auto remainder = [&](double u) {
        const double f = 8.0 * std::sin(0.5 * p * kPi * u) * std::sin(0.5 * q * kPi * u) *
                         midpoint_integral(frame, p, q, 0.5 * u, 1.0 - 0.5 * u);
        return (f - (c2 + c3 * u) * u * u) * std::pow(u, -1.0 - gamma);
    };
    const double tail = integrate_panels(remainder, edges, gauss_legendre_16());
    return tail + c2 / (2.0 - gamma) + c3 / (3.0 - gamma);
}

// --- elliptic coefficient helpers -----------------------------------------

double tabulated_eval(const std::vector<double>& samples, double x) {
    const auto n = samples.size();
    const double pos = x * static_cast<double>(n - 1);
    const auto i = std::min(n - 2, static_cast<std::size_t>(std::max(0.0, std::floor(pos))));
    const double t = pos - static_cast<double>(i);
    return samples[i] * (1.0 - t) + samples[i + 1] * t;
}

void validate_elliptic(const ModelParams& params) {
    if (params.coefficient != EllipticCoefficient::tabulated) {
        if (!params.coefficient_samples.empty())
            throw ValidationError("coefficient_samples only apply to the tabulated coefficient");
        return;
    }
    if (params.coefficient_samples.size() < 2)
        throw ValidationError("tabulated coefficient needs at least two samples");
    for (double a : params.coefficient_samples)
        if (!std::isfinite(a) || a <= 0.0)
            throw ValidationError("elliptic coefficient must be positive and finite");
}

} // namespace

double elliptic_coefficient_eval(const ModelParams& params, double x) {
    switch (params.coefficient) {
        case EllipticCoefficient::constant_one:
            return 1.0;
        case EllipticCoefficient::sine_bump:
            return 1.0 + 0.5 * std::sin(2.0 * kPi * x);
        case EllipticCoefficient::two_phase:
            return x < 0.5 ? 0.5 : 2.0;
        case EllipticCoefficient::tabulated:
            return tabulated_eval(params.coefficient_samples, x);
    }
    throw ValidationError("unknown elliptic coefficient");
}

Eigen::MatrixXd elliptic_form_matrix(int mode_count, const ModelParams& params) {
    validate_elliptic(params);
    Eigen::MatrixXd q(mode_count, mode_count);

    const bool piecewise_constant = params.coefficient == EllipticCoefficient::constant_one ||
                                    params.coefficient == EllipticCoefficient::two_phase;
    for (int k = 1; k <= mode_count; ++k) {
        for (int l = k; l <= mode_count; ++l) {
            const double scale = 2.0 * k * l * kPi * kPi;
            double value;
            if (piecewise_constant) {
                // exact per piece: int a e_k' e_l' = scale * sum a_i int cos cos
                value = scale * (elliptic_coefficient_eval(params, 0.25) *
                                     integral_cos_cos(k, l, 0.0, 0.5) +
                                 elliptic_coefficient_eval(params, 0.75) *
                                     integral_cos_cos(k, l, 0.5, 1.0));
            } else {
                auto integrand = [&](double x) {
                    return elliptic_coefficient_eval(params, x) * std::cos(k * kPi * x) *
                           std::cos(l * kPi * x);
                };
                PanelGrid edges = frequency_panels(0.0, 1.0, 2.0 / (k + l + 4), 8);
                if (params.coefficient == EllipticCoefficient::tabulated) {
                    // align panels with interpolation kinks
                    const auto n = params.coefficient_samples.size();
                    for (std::size_t i = 1; i + 1 < n; ++i)
                        edges.push_back(static_cast<double>(i) / static_cast<double>(n - 1));
                    std::sort(edges.begin(), edges.end());
                    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
                }
                const double base = integrate_panels(integrand, edges, gauss_legendre_16());
                const double fine =
                    integrate_panels(integrand, refine_panels(edges), gauss_legendre_16());
                if (std::abs(fine - base) > 1e-6)
                    throw NumericalError("elliptic form quadrature did not converge");
                value = scale * fine;
            }
            q(k - 1, l - 1) = value;
            q(l - 1, k - 1) = value;
        }
    }
    return q;
}

Eigen::MatrixXd fractional_form_matrix(int mode_count, double gamma, double c,
                                       BasisFrame frame, double* estimated_error) {
    if (!(gamma >= 0.0) || !(gamma < 2.0))
        throw ValidationError("kernel exponent parameter out of [0, 2)");
    if (!(c > 0.0)) throw ValidationError("fractional constant must be positive");

    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(mode_count, mode_count);
    double worst = 0.0;
    const int base_freq = frame == BasisFrame::sine ? 1 : 0;
    for (int k = 0; k < mode_count; ++k) {
        for (int l = k; l < mode_count; ++l) {
            const int p = base_freq + k;
            const int r = base_freq + l;
            if (p == 0 || r == 0) continue; // constant mode has zero differences
            const PanelGrid edges = separation_grid(p + r);
            const double base = reduced_kernel_entry(frame, p, r, gamma, edges);
            const double fine = reduced_kernel_entry(frame, p, r, gamma, refine_panels(edges));
            worst = std::max(worst, std::abs(fine - base));
            q(k, l) = c * fine;
            q(l, k) = c * fine;
        }
    }
    if (estimated_error) *estimated_error = worst;
    return q;
}

double fractional_form_direct(int k, int l, double gamma, double c, BasisFrame frame) {
    if (!(gamma >= 0.0) || !(gamma < 2.0))
        throw ValidationError("kernel exponent parameter out of [0, 2)");
    const int p = (frame == BasisFrame::sine ? 1 : 0) + k;
    const int r = (frame == BasisFrame::sine ? 1 : 0) + l;
    if (p == 0 || r == 0) return 0.0;

    // Pointwise differences cancel to O(u), so evaluate them in extended
    // precision; the kernel weight amplifies their rounding error by
    // u^{-1-gamma}.
    const long double pi = 3.14159265358979323846264338327950288L;
    auto value = [&](int freq, long double x) -> long double {
        const long double s = 1.41421356237309504880168872420969808L;
        return frame == BasisFrame::sine ? s * std::sin(freq * pi * x) : s * std::cos(freq * pi * x);
    };
    auto slope = [&](int freq, double x) {
        return frame == BasisFrame::sine ? kSqrt2 * freq * kPi * std::cos(freq * kPi * x)
                                         : -kSqrt2 * freq * kPi * std::sin(freq * kPi * x);
    };

    const double inner_cap = 2.0 / static_cast<double>(p + r + 2);
    auto slope_product = [&](double x) { return slope(p, x) * slope(r, x); };
    const double c2 = integrate_panels(slope_product, frequency_panels(0.0, 1.0, inner_cap, 8),
                                       gauss_legendre_16());
    const double c3 = -0.5 * (slope(p, 1.0) * slope(r, 1.0) + slope(p, 0.0) * slope(r, 0.0));

    auto shifted_product = [&](double u) {
        auto integrand = [&](double x) {
            const long double du = u;
            return static_cast<double>((value(p, x + du) - value(p, x)) *
                                       (value(r, x + du) - value(r, x)));
        };
        if (u >= 1.0) return 0.0;
        return integrate_panels(integrand, frequency_panels(0.0, 1.0 - u, inner_cap, 4),
                                gauss_legendre_16());
    };
    auto remainder = [&](double u) {
        return (shifted_product(u) - (c2 + c3 * u) * u * u) * std::pow(u, -1.0 - gamma);
    };

    // Below the floor the subtracted integrand is O(u^{3-gamma}); dropping
    // that stretch costs ~u0^{4-gamma} times the quartic Taylor scale, which
    // is well under 1e-9 for the moderate frequencies this cross-check
    // targets.
    const double u0 = 1e-6;
    PanelGrid edges{u0};
    double x = u0;
    double width = u0;
    while (x < 1.0) {
        x = std::min(1.0, x + width);
        edges.push_back(x);
        width = std::min(width * 2.0, inner_cap);
    }
    const double tail = integrate_panels(remainder, edges, gauss_legendre_16());
    return c * (tail + c2 / (2.0 - gamma) + c3 / (3.0 - gamma));
}

SpectralModel build_model(ModelKind kind, int mode_count, const ModelParams& params) {
    validate_common(mode_count, params);

    SpectralModel model;
    model.kind = kind;
    model.mode_count = mode_count;
    model.params = params;

    switch (kind) {
        case ModelKind::dirichlet_laplacian: {
            model.frame = BasisFrame::sine;
            model.eigenvalues.resize(static_cast<std::size_t>(mode_count));
            for (int k = 1; k <= mode_count; ++k)
                model.eigenvalues[static_cast<std::size_t>(k - 1)] = (k * kPi) * (k * kPi);
            return model;
        }
        case ModelKind::neumann_hyperviscous: {
            if (!(params.theta > 1.0) || !(params.theta <= 2.0))
                throw ValidationError("theta out of (1, 2]");
            model.frame = BasisFrame::cosine;
            model.eigenvalues.resize(static_cast<std::size_t>(mode_count));
            for (int k = 0; k < mode_count; ++k)
                model.eigenvalues[static_cast<std::size_t>(k)] =
                    std::pow(1.0 + (k * kPi) * (k * kPi), params.theta);
            return model;
        }
        case ModelKind::elliptic_divform: {
            Eigen::MatrixXd q = elliptic_form_matrix(mode_count, params);
            return diagonalized_model(kind, mode_count, params, q, BasisFrame::sine);
        }
        case ModelKind::regional_fractional: {
            if (!(params.gamma >= 1.5) || !(params.gamma < 2.0))
                throw ValidationError("gamma out of [1.5, 2)");
            if (!(params.fractional_c > 0.0))
                throw ValidationError("fractional constant must be positive");
            double est = 0.0;
            Eigen::MatrixXd q = fractional_form_matrix(mode_count, params.gamma,
                                                       params.fractional_c, BasisFrame::sine, &est);
            if (est > 1e-6)
                throw NumericalError("fractional form quadrature did not converge");
            return diagonalized_model(kind, mode_count, params, q, BasisFrame::sine);
        }
    }
    throw ValidationError("unknown model kind");
}

double SpectralModel::frame_eval(int j, double x) const {
    const int f = frame_frequency(j);
    if (frame == BasisFrame::sine) return kSqrt2 * std::sin(f * kPi * x);
    return f == 0 ? 1.0 : kSqrt2 * std::cos(f * kPi * x);
}

double SpectralModel::basis_eval(int k, double x) const {
    if (k < 0 || k >= mode_count) throw ValidationError("basis index out of range");
    if (diagonal_frame()) return frame_eval(k, x);
    double acc = 0.0;
    for (int j = 0; j < mode_count; ++j) acc += frame_to_eigen(j, k) * frame_eval(j, x);
    return acc;
}

Eigen::VectorXd SpectralModel::frame_coords(const Eigen::VectorXd& eigen_coords) const {
    if (eigen_coords.size() != mode_count)
        throw ValidationError("coefficient vector length does not match mode_count");
    return diagonal_frame() ? eigen_coords : Eigen::VectorXd(frame_to_eigen * eigen_coords);
}

Eigen::VectorXd SpectralModel::eigen_coords(const Eigen::VectorXd& frame) const {
    if (frame.size() != mode_count)
        throw ValidationError("coefficient vector length does not match mode_count");
    return diagonal_frame() ? frame : Eigen::VectorXd(frame_to_eigen.transpose() * frame);
}

bool SpectralModel::vdot_is_diagonal() const { return kind != ModelKind::elliptic_divform; }

std::vector<double> SpectralModel::vdot_weights() const {
    std::vector<double> w(static_cast<std::size_t>(mode_count));
    switch (kind) {
        case ModelKind::dirichlet_laplacian:
            return eigenvalues;
        case ModelKind::neumann_hyperviscous:
            for (int k = 0; k < mode_count; ++k)
                w[static_cast<std::size_t>(k)] =
                    2.0 * std::pow(1.0 + static_cast<double>(k) * k, params.theta);
            return w;
        case ModelKind::regional_fractional:
            for (int k = 0; k < mode_count; ++k)
                w[static_cast<std::size_t>(k)] =
                    (2.0 / params.fractional_c) * eigenvalues[static_cast<std::size_t>(k)];
            return w;
        case ModelKind::elliptic_divform:
            break;
    }
    throw ValidationError("V-form is not diagonal in eigen coordinates for this model");
}

Eigen::MatrixXd SpectralModel::vdot_gram() const {
    if (vdot_is_diagonal()) {
        const auto w = vdot_weights();
        Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(w.data(), mode_count);
        return diag.asDiagonal();
    }
    // gradient seminorm of sine-frame coordinates, pulled back to eigen ones
    Eigen::VectorXd diag(mode_count);
    for (int j = 1; j <= mode_count; ++j) diag(j - 1) = (j * kPi) * (j * kPi);
    return frame_to_eigen.transpose() * diag.asDiagonal() * frame_to_eigen;
}

double spectral_weight(const SpectralModel& model, int j, double alpha, bool homogeneous) {
    const int f = model.frame_frequency(j);
    if (model.frame == BasisFrame::sine) {
        const double base = (f * kPi) * (f * kPi);
        return homogeneous ? std::pow(base, alpha) : std::pow(1.0 + base, alpha);
    }
    const double base = 1.0 + static_cast<double>(f) * f;
    const double full = 2.0 * std::pow(base, alpha);
    return homogeneous ? full - 2.0 : full;
}

namespace {

double block_norm_sq(const SpectralModel& model, const Eigen::VectorXd& block, double alpha,
                     SobolevFlavor flavor, bool homogeneous) {
    const Eigen::VectorXd s = model.frame_coords(block);
    if (flavor == SobolevFlavor::spectral) {
        double acc = 0.0;
        for (int j = 0; j < model.mode_count; ++j)
            acc += spectral_weight(model, j, alpha, homogeneous) * s(j) * s(j);
        return acc;
    }

    // difference-quotient route
    if (!(alpha >= 0.0) || alpha > 1.0)
        throw ValidationError("slobodeckij flavor needs alpha in [0, 1]");
    double semi = 0.0;
    if (alpha == 1.0) {
        for (int j = 0; j < model.mode_count; ++j)
            if (model.frame_frequency(j) > 0 && s(j) != 0.0)
                throw NumericalError(
                    "difference-quotient seminorm diverges at alpha = 1 for nonconstant input");
    } else {
        const Eigen::MatrixXd kernel =
            2.0 * fractional_form_matrix(model.mode_count, 2.0 * alpha, 1.0, model.frame);
        semi = s.dot(kernel * s);
    }
    return homogeneous ? semi : semi + s.squaredNorm();
}

} // namespace

double sobolev_norm(const SpectralModel& model, const Eigen::VectorXd& coeffs, double alpha,
                    SobolevFlavor flavor, bool homogeneous) {
    const int m = model.mode_count;
    const int d = model.params.components;
    if (coeffs.size() != static_cast<Eigen::Index>(m) * d)
        throw ValidationError("coefficient vector length does not match mode_count * components");
    double acc = 0.0;
    for (int c = 0; c < d; ++c)
        acc += block_norm_sq(model, coeffs.segment(static_cast<Eigen::Index>(c) * m, m), alpha,
                             flavor, homogeneous);
    return std::sqrt(acc);
}

namespace {

void check_symmetric(const Eigen::MatrixXd& phi, int m) {
    if (phi.rows() != m || phi.cols() != m)
        throw ValidationError("tensor matrix dimensions do not match mode_count");
    const double scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
    if ((phi - phi.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ValidationError("tensor matrix must be symmetric");
}

} // namespace

std::vector<double> trace_apply(const SpectralModel& model, const Eigen::MatrixXd& phi,
                                const std::vector<double>& grid) {
    check_symmetric(phi, model.mode_count);
    std::vector<double> out(grid.size());
    Eigen::VectorXd psi(model.mode_count);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (int k = 0; k < model.mode_count; ++k) psi(k) = model.basis_eval(k, grid[i]);
        out[i] = psi.dot(phi * psi);
    }
    return out;
}

Eigen::VectorXd trace_frame_coefficients(const SpectralModel& model, const Eigen::MatrixXd& phi,
                                         int out_modes) {
    check_symmetric(phi, model.mode_count);
    if (out_modes < 1) throw ValidationError("out_modes must be positive");
    const Eigen::MatrixXd pf = model.diagonal_frame()
                                   ? phi
                                   : Eigen::MatrixXd(model.frame_to_eigen * phi *
                                                     model.frame_to_eigen.transpose());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(out_modes);
    const int m = model.mode_count;

    if (model.frame == BasisFrame::sine) {
        // e_k e_l = cos((k-l) pi x) - cos((k+l) pi x), expanded over sines.
        // Summing per output mode keeps the boundary cancellations between
        // the two cosine tails intact.
        for (int out_j = 0; out_j < out_modes; ++out_j) {
            const int freq = out_j + 1;
            double acc = 0.0;
            for (int k = 1; k <= m; ++k)
                for (int l = 1; l <= m; ++l)
                    acc += pf(k - 1, l - 1) * (sine_coefficient_of_cos(std::abs(k - l), freq) -
                                               sine_coefficient_of_cos(k + l, freq));
            out(out_j) = acc;
        }
        return out;
    }

    // cosine frame: products close exactly over the cosine family
    auto add_cos = [&](int freq, double weight) {
        if (freq == 0) {
            out(0) += weight;
        } else if (freq < out_modes) {
            out(freq) += weight / kSqrt2;
        } else {
            throw ValidationError("out_modes too small for exact cosine-frame trace");
        }
    };
    for (int k = 0; k < m; ++k) {
        for (int l = 0; l < m; ++l) {
            const double w = pf(k, l);
            if (w == 0.0) continue;
            if (k == 0 && l == 0) {
                out(0) += w;
            } else if (k == 0) {
                if (l >= out_modes)
                    throw ValidationError("out_modes too small for exact cosine-frame trace");
                out(l) += w;
            } else if (l == 0) {
                if (k >= out_modes)
                    throw ValidationError("out_modes too small for exact cosine-frame trace");
                out(k) += w;
            } else {
                add_cos(std::abs(k - l), w);
                add_cos(k + l, w);
            }
        }
    }
    return out;
}

Eigen::MatrixXd neumann_derivative_matrix(int mode_count) {
    // Row k, column l: cosine-frame coefficient of d/dx e_l against e_k.
    // Couplings vanish unless k + l is odd; the constant column is zero.
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(mode_count, mode_count);
    for (int l = 1; l < mode_count; ++l) {
        if (l & 1) d(0, l) = -2.0 * kSqrt2;
        for (int k = 1; k < mode_count; ++k) {
            if (k == l || (((k + l) & 1) == 0)) continue;
            d(k, l) = -4.0 * static_cast<double>(l) * l / static_cast<double>(l * l - k * k);
        }
    }
    return d;
}

Eigen::VectorXd neumann_derivative_coeffs(const SpectralModel& model, const Eigen::VectorXd& h) {
    if (model.kind != ModelKind::neumann_hyperviscous)
        throw ValidationError("derivative coefficients need the cosine-frame model");
    if (h.size() != model.mode_count)
        throw ValidationError("coefficient vector length does not match mode_count");
    return neumann_derivative_matrix(model.mode_count) * h;
}

// --- serialization ---------------------------------------------------------

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::dirichlet_laplacian: return "dirichlet_laplacian";
        case ModelKind::elliptic_divform: return "elliptic_divform";
        case ModelKind::neumann_hyperviscous: return "neumann_hyperviscous";
        case ModelKind::regional_fractional: return "regional_fractional";
    }
    throw ValidationError("unknown model kind");
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "dirichlet_laplacian") return ModelKind::dirichlet_laplacian;
    if (name == "elliptic_divform") return ModelKind::elliptic_divform;
    if (name == "neumann_hyperviscous") return ModelKind::neumann_hyperviscous;
    if (name == "regional_fractional") return ModelKind::regional_fractional;
    throw ValidationError("unknown model kind: " + name);
}

namespace {

std::string coefficient_name(EllipticCoefficient c) {
    switch (c) {
        case EllipticCoefficient::constant_one: return "constant_one";
        case EllipticCoefficient::sine_bump: return "sine_bump";
        case EllipticCoefficient::two_phase: return "two_phase";
        case EllipticCoefficient::tabulated: return "tabulated";
    }
    throw ValidationError("unknown elliptic coefficient");
}

EllipticCoefficient coefficient_from_name(const std::string& name) {
    if (name == "constant_one") return EllipticCoefficient::constant_one;
    if (name == "sine_bump") return EllipticCoefficient::sine_bump;
    if (name == "two_phase") return EllipticCoefficient::two_phase;
    if (name == "tabulated") return EllipticCoefficient::tabulated;
    throw ValidationError("unknown elliptic coefficient: " + name);
}

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const std::string& context) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) throw ValidationError("unknown key in " + context + ": " + it.key());
    }
}

} // namespace

std::string model_to_json(const SpectralModel& model) {
    json params;
    params["components"] = model.params.components;
    params["domain"] = model.params.domain;
    switch (model.kind) {
        case ModelKind::dirichlet_laplacian:
            break;
        case ModelKind::neumann_hyperviscous:
            params["theta"] = model.params.theta;
            break;
        case ModelKind::regional_fractional:
            params["gamma"] = model.params.gamma;
            params["fractional_c"] = model.params.fractional_c;
            break;
        case ModelKind::elliptic_divform:
            params["coefficient"] = coefficient_name(model.params.coefficient);
            if (model.params.coefficient == EllipticCoefficient::tabulated)
                params["coefficient_samples"] = model.params.coefficient_samples;
            break;
    }
    json doc;
    doc["kind"] = model_kind_name(model.kind);
    doc["mode_count"] = model.mode_count;
    doc["params"] = std::move(params);
    doc["eigenvalues"] = model.eigenvalues;
    return doc.dump(2);
}

SpectralModel model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("model descriptor is not valid JSON: ") + e.what());
    }
    require_keys(doc, {"kind", "mode_count", "params", "eigenvalues"}, "model descriptor");
    if (!doc.contains("kind") || !doc.contains("mode_count"))
        throw ValidationError("model descriptor needs kind and mode_count");

    const ModelKind kind = model_kind_from_name(doc["kind"].get<std::string>());
    const int mode_count = doc["mode_count"].get<int>();

    ModelParams params;
    if (doc.contains("params")) {
        const json& p = doc["params"];
        switch (kind) {
            case ModelKind::dirichlet_laplacian:
                require_keys(p, {"components", "domain"}, "params");
                break;
            case ModelKind::neumann_hyperviscous:
                require_keys(p, {"theta", "components", "domain"}, "params");
                if (p.contains("theta")) params.theta = p["theta"].get<double>();
                break;
            case ModelKind::regional_fractional:
                require_keys(p, {"gamma", "fractional_c", "components", "domain"}, "params");
                if (p.contains("gamma")) params.gamma = p["gamma"].get<double>();
                if (p.contains("fractional_c"))
                    params.fractional_c = p["fractional_c"].get<double>();
                break;
            case ModelKind::elliptic_divform:
                require_keys(p, {"coefficient", "coefficient_samples", "components", "domain"},
                             "params");
                if (p.contains("coefficient"))
                    params.coefficient = coefficient_from_name(p["coefficient"].get<std::string>());
                if (p.contains("coefficient_samples"))
                    params.coefficient_samples =
                        p["coefficient_samples"].get<std::vector<double>>();
                break;
        }
        if (p.contains("components")) params.components = p["components"].get<int>();
        if (p.contains("domain")) params.domain = p["domain"].get<std::string>();
    }

    SpectralModel model = build_model(kind, mode_count, params);
    if (doc.contains("eigenvalues")) {
        const auto stored = doc["eigenvalues"].get<std::vector<double>>();
        if (stored.size() != model.eigenvalues.size())
            throw ValidationError("stored eigenvalue count disagrees with rebuilt model");
        for (std::size_t i = 0; i < stored.size(); ++i) {
            const double ref = model.eigenvalues[i];
            if (std::abs(stored[i] - ref) > 1e-6 * std::max(1.0, std::abs(ref)))
                throw ValidationError("stored eigenvalues disagree with rebuilt model");
        }
    }
    return model;
}

} // namespace spdelab
