#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "spdelab/errors.hpp"

namespace spdelab {

// A spectrally resolved self-adjoint operator on the unit interval, truncated
// to its first mode_count eigenpairs. Four constructions are supported; the
// first two and the last share the sine frame, the hyperviscous one lives in
// the cosine frame (with the constant mode included).

enum class ModelKind {
    dirichlet_laplacian,
    elliptic_divform,
    neumann_hyperviscous,
    regional_fractional,
};

enum class BasisFrame { sine, cosine };

// Built-in diffusion coefficients for the divergence-form operator; tabulated
// accepts arbitrary samples on a uniform closed grid over [0, 1].
enum class EllipticCoefficient { constant_one, sine_bump, two_phase, tabulated };

enum class SobolevFlavor { spectral, slobodeckij };

struct ModelParams {
    double theta = 2.0;       // hyperviscosity exponent, in (1, 2]
    double gamma = 1.5;       // fractional order, in [3/2, 2)
    double fractional_c = 1.0; // kernel prefactor, > 0
    EllipticCoefficient coefficient = EllipticCoefficient::constant_one;
    std::vector<double> coefficient_samples; // for tabulated coefficients
    int components = 1;       // number of equation components d
    std::string domain = "unit_interval";
};

struct SpectralModel {
    ModelKind kind = ModelKind::dirichlet_laplacian;
    int mode_count = 0;
    ModelParams params;

    // Ascending positive eigenvalues, one per retained mode.
    std::vector<double> eigenvalues;

    // Column i holds the frame coordinates of eigenfunction i. Identity for
    // the analytically diagonal builds; kept empty in that case.
    Eigen::MatrixXd frame_to_eigen;
    BasisFrame frame = BasisFrame::sine;

    bool diagonal_frame() const { return frame_to_eigen.size() == 0; }

    // Frequency of frame function j: sine frame counts from 1, cosine frame
    // from 0 (the constant mode).
    int frame_frequency(int j) const {
        return frame == BasisFrame::sine ? j + 1 : j;
    }

    // Pointwise value of frame function j at x.
    double frame_eval(int j, double x) const;

    // Pointwise value of eigenfunction k at x.
    double basis_eval(int k, double x) const;

    // Frame coordinates of a vector given in eigen coordinates (and back).
    Eigen::VectorXd frame_coords(const Eigen::VectorXd& eigen_coords) const;
    Eigen::VectorXd eigen_coords(const Eigen::VectorXd& frame_coords) const;

    // Gram matrix of the homogeneous V-norm in eigen coordinates, and its
    // diagonal when the model is diagonal in its frame.
    Eigen::MatrixXd vdot_gram() const;
    bool vdot_is_diagonal() const;
    std::vector<double> vdot_weights() const;
};

SpectralModel build_model(ModelKind kind, int mode_count, const ModelParams& params = {});

// --- assembly primitives (exposed for cross-checking) ---

// Stiffness matrix int a(x) e_k'(x) e_l'(x) dx over the orthonormal sine
// frame, assembled by panel quadrature.
Eigen::MatrixXd elliptic_form_matrix(int mode_count, const ModelParams& params);

// Evaluate the diffusion coefficient described by params at x.
double elliptic_coefficient_eval(const ModelParams& params, double x);

// Symmetric nonlocal form (c/2) iint (e_k(y)-e_k(x))(e_l(y)-e_l(x))
// |y-x|^{-1-gamma} dx dy over the given frame, reduced to one-dimensional
// integrals in the separation variable. estimated_error (optional out)
// receives a self-consistency estimate from panel refinement.
Eigen::MatrixXd fractional_form_matrix(int mode_count, double gamma, double c,
                                       BasisFrame frame = BasisFrame::sine,
                                       double* estimated_error = nullptr);

// Same form for a single entry, but by direct quadrature in tilted
// coordinates with a numeric inner integral; independent of the closed-form
// reduction above.
double fractional_form_direct(int k, int l, double gamma, double c,
                              BasisFrame frame = BasisFrame::sine);

// --- norms ---

// Norm (not squared) of the vector with the given eigen coordinates.
// Spectral flavor weights frame coefficients by frequency: sine frame uses
// ((k pi)^2)^alpha homogeneous and (1 + (k pi)^2)^alpha otherwise; cosine
// frame uses the doubled convention 2 (1 + k^2)^alpha, with the plain L2 term
// subtracted for the homogeneous variant. Slobodeckij integrates the
// difference-quotient kernel with exponent 1 + 2 alpha (alpha in [0, 1]) and
// adds the L2 term unless homogeneous.
double sobolev_norm(const SpectralModel& model, const Eigen::VectorXd& coeffs,
                    double alpha, SobolevFlavor flavor, bool homogeneous);

// Spectral weight of frame mode j for H^alpha under the model's convention.
double spectral_weight(const SpectralModel& model, int j, double alpha, bool homogeneous);

// --- trace of a symmetric tensor ---

// Samples x -> sum_{k,l} phi[k][l] psi_k(x) psi_l(x) on the given grid,
// where psi are the model eigenfunctions.
std::vector<double> trace_apply(const SpectralModel& model, const Eigen::MatrixXd& phi,
                                const std::vector<double>& grid);

// Frame coefficients of the trace function up to out_modes, computed from
// exact product expansions (sine frame needs a tail; cosine frame is exact
// with out_modes >= 2 * mode_count + 1).
Eigen::VectorXd trace_frame_coefficients(const SpectralModel& model,
                                         const Eigen::MatrixXd& phi, int out_modes);

// --- cosine-frame space derivative ---

// Cosine coefficients of the space derivative of h (given in cosine
// coordinates), via the exact coupling of sin to the cosine family. Only
// meaningful on the hyperviscous model.
Eigen::VectorXd neumann_derivative_coeffs(const SpectralModel& model,
                                          const Eigen::VectorXd& h);

// The full coupling matrix D with (D h) the derivative coefficients.
Eigen::MatrixXd neumann_derivative_matrix(int mode_count);

// --- serialization ---

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

// JSON descriptor (kind, mode_count, params, eigenvalues). Parsing rebuilds
// the model from the descriptor and cross-checks stored eigenvalues.
std::string model_to_json(const SpectralModel& model);
SpectralModel model_from_json(const std::string& text);

} // namespace spdelab
