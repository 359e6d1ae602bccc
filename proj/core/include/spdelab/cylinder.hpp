#pragma once

// Cylinder-function truncations of the generator: a product-Hermite basis
// with exact Gram data, first-order Sobolev norms of polynomials together
// with their truncated duals, and the Galerkin resolvent solve for
// (1 - L0 - G^N) with a chaos-degree cutoff N.

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spdelab/coupling.hpp"
#include "spdelab/generator_ops.hpp"
#include "spdelab/model.hpp"
#include "spdelab/polynomial.hpp"

namespace spdelab {

// Product-Hermite basis He_a over all multi-indices |a| <= max_degree in
// graded lexicographic order. Hermite products diagonalize both quadratic
// forms in play: E[He_a He_b] = a! delta_ab, and the Dirichlet form with
// diagonal weights lambda adds the factor sum_k lambda_k a_k.
struct CylinderBasis {
    int mode_count = 0;
    int max_degree = 0;
    std::vector<double> eigenvalues;   // diagonal weights of the Dirichlet form
    std::vector<ExponentVec> exponents;
    std::vector<double> l2_diag;       // E[He_a^2]
    std::vector<double> h1dot_diag;    // E[<diag(lambda) D He_a, D He_a>]

    int size() const { return static_cast<int>(exponents.size()); }
    int degree(int i) const;
    // Inhomogeneous first-order Gram entry, positive definite.
    double h1_diag(int i) const {
        return l2_diag[static_cast<std::size_t>(i)] + h1dot_diag[static_cast<std::size_t>(i)];
    }
    int index_of(const ExponentVec& e) const; // -1 when absent
    GaussianPolynomial<double> element(int i) const;

    std::map<ExponentVec, int> index; // exponent -> position lookup
};

CylinderBasis build_cylinder_basis(const std::vector<double>& eigenvalues, int max_degree);
CylinderBasis build_cylinder_basis(const SpectralModel& model, int max_degree);

// Dense trilinear view of the folded coupling tensor, for the symbolic
// generator routines.
TrilinearForm<double> to_trilinear(const CouplingTensor& tensor);

// Drift generator from a coupling tensor. The smoothed variant transports
// the tensor through rho on both noise slots first, so the Wick subtraction
// renormalizes against the smoothed covariance; identity rho reduces to the
// plain variant.
GaussianPolynomial<double> g_apply(const GaussianPolynomial<double>& f,
                                   const CouplingTensor& tensor,
                                   GeneratorPart part = GeneratorPart::full);
GaussianPolynomial<double> g_apply(const GaussianPolynomial<double>& f,
                                   const CouplingTensor& tensor, const Eigen::MatrixXd& rho,
                                   GeneratorPart part = GeneratorPart::full);

// Ornstein-Uhlenbeck generator with the model's eigenvalues.
GaussianPolynomial<double> l0_apply(const GaussianPolynomial<double>& f,
                                    const SpectralModel& model);

// First-order Sobolev norms of a polynomial. The homogeneous part weights
// the Malliavin derivative with the model eigenvalues; alpha in {0, 1}
// applies (1 + number operator)^alpha first, to the plain L2 part as well.
double h1dot_norm(const GaussianPolynomial<double>& f, const SpectralModel& model, int alpha);
double h1_norm(const GaussianPolynomial<double>& f, const SpectralModel& model, int alpha);

// Dual norm relative to the truncation spanned by the basis: the supremum
// of E[FG] over G in the span with unit inhomogeneous first-order norm.
// F must lie in the span itself.
double hminus1_norm(const GaussianPolynomial<double>& f, const CylinderBasis& basis);

struct ResolventSolution {
    GaussianPolynomial<double> solution;
    int chaos_cutoff = 0;
    // Range of the assembled quadratic form against the first-order Gram
    // over basis elements; both are 1 when the drift drops out exactly.
    double coercivity_min = 0.0;
    double coercivity_max = 0.0;
    double residual = 0.0;         // truncated dual norm of the defect
    double rhs_dual_norm = 0.0;
    double solution_h1_norm = 0.0;
};

// Galerkin solve of (1 - L0 - G^N) F = rhs on the basis span, where G^N
// confines the drift between chaos projections of degree chaos_cutoff.
ResolventSolution resolvent_solve(const GaussianPolynomial<double>& rhs,
                                  const CylinderBasis& basis, const CouplingTensor& tensor,
                                  int chaos_cutoff);

std::string resolvent_report_json(const ResolventSolution& solution,
                                  const CylinderBasis& basis);

} // namespace spdelab
