#include "spdelab/cylinder.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "json.hpp"

#include "spdelab/errors.hpp"

namespace spdelab {
namespace {

void enumerate_degree(int modes, int degree, ExponentVec& scratch, int slot, int remaining,
                      std::vector<ExponentVec>& out) {
    if (slot == modes - 1) {
        scratch[static_cast<std::size_t>(slot)] = static_cast<std::uint32_t>(remaining);
        out.push_back(scratch);
        return;
    }
    for (int take = remaining; take >= 0; --take) {
        scratch[static_cast<std::size_t>(slot)] = static_cast<std::uint32_t>(take);
        enumerate_degree(modes, degree, scratch, slot + 1, remaining - take, out);
    }
    scratch[static_cast<std::size_t>(slot)] = 0u;
}

double factorial_product(const ExponentVec& e) {
    double m = 1.0;
    for (auto v : e)
        for (std::uint32_t j = 2; j <= v; ++j) m *= j;
    return m;
}

// chaos cutoff around the drift: 1_{N <= n} G 1_{N <= n}
GaussianPolynomial<double> g_cutoff(const GaussianPolynomial<double>& f,
                                    const TrilinearForm<double>& b, int cutoff) {
    const auto inner = chaos_truncate(f, cutoff);
    if (inner.is_zero()) return GaussianPolynomial<double>(f.modes());
    return chaos_truncate(g_apply(inner, b), cutoff);
}

} // namespace

int CylinderBasis::degree(int i) const {
    const ExponentVec& e = exponents[static_cast<std::size_t>(i)];
    int d = 0;
    for (auto v : e) d += static_cast<int>(v);
    return d;
}

int CylinderBasis::index_of(const ExponentVec& e) const {
    auto it = index.find(e);
    return it == index.end() ? -1 : it->second;
}

GaussianPolynomial<double> CylinderBasis::element(int i) const {
    if (i < 0 || i >= size()) throw ValidationError("basis index out of range");
    return hermite_product<double>(mode_count, exponents[static_cast<std::size_t>(i)]);
}

CylinderBasis build_cylinder_basis(const std::vector<double>& eigenvalues, int max_degree) {
    if (eigenvalues.empty()) throw ValidationError("eigenvalue vector must not be empty");
    if (max_degree < 0) throw ValidationError("polynomial degree must be nonnegative");
    for (const double lambda : eigenvalues) {
        if (!(lambda > 0.0)) throw ValidationError("eigenvalues must be positive");
    }

    CylinderBasis basis;
    basis.mode_count = static_cast<int>(eigenvalues.size());
    basis.max_degree = max_degree;
    basis.eigenvalues = eigenvalues;

    ExponentVec scratch(static_cast<std::size_t>(basis.mode_count), 0u);
    for (int degree = 0; degree <= max_degree; ++degree) {
        enumerate_degree(basis.mode_count, degree, scratch, 0, degree, basis.exponents);
    }
    for (int i = 0; i < basis.size(); ++i) {
        const ExponentVec& e = basis.exponents[static_cast<std::size_t>(i)];
        basis.index.emplace(e, i);
        const double l2 = factorial_product(e);
        double weighted = 0.0;
        for (int k = 0; k < basis.mode_count; ++k) {
            weighted += eigenvalues[static_cast<std::size_t>(k)] * e[static_cast<std::size_t>(k)];
        }
        basis.l2_diag.push_back(l2);
        basis.h1dot_diag.push_back(l2 * weighted);
    }
    return basis;
}

CylinderBasis build_cylinder_basis(const SpectralModel& model, int max_degree) {
    return build_cylinder_basis(model.eigenvalues, max_degree);
}

TrilinearForm<double> to_trilinear(const CouplingTensor& tensor) {
    const int n = tensor.folded_count();
    TrilinearForm<double> form(n);
    for (int m = 0; m < n; ++m) {
        for (const auto& e : tensor.by_output[static_cast<std::size_t>(m)]) {
            form.set(e.k, e.l, m, e.value);
        }
    }
    return form;
}

GaussianPolynomial<double> g_apply(const GaussianPolynomial<double>& f,
                                   const CouplingTensor& tensor, GeneratorPart part) {
    if (f.modes() != tensor.folded_count())
        throw ValidationError("polynomial mode count must match the folded tensor");
    return g_apply(f, to_trilinear(tensor), part);
}

GaussianPolynomial<double> g_apply(const GaussianPolynomial<double>& f,
                                   const CouplingTensor& tensor, const Eigen::MatrixXd& rho,
                                   GeneratorPart part) {
    if (f.modes() != tensor.folded_count())
        throw ValidationError("polynomial mode count must match the folded tensor");
    return g_apply(f, to_trilinear(conjugate_pair_slots(tensor, rho)), part);
}

GaussianPolynomial<double> l0_apply(const GaussianPolynomial<double>& f,
                                    const SpectralModel& model) {
    return l0_apply(f, model.eigenvalues);
}

double h1dot_norm(const GaussianPolynomial<double>& f, const SpectralModel& model, int alpha) {
    if (alpha != 0 && alpha != 1) throw ValidationError("alpha must be 0 or 1");
    if (f.modes() != model.mode_count)
        throw ValidationError("polynomial mode count must match the model");
    GaussianPolynomial<double> shifted = f;
    if (alpha == 1) shifted += number_operator(f);
    return std::sqrt(dirichlet_form_sq(shifted, model.eigenvalues));
}

double h1_norm(const GaussianPolynomial<double>& f, const SpectralModel& model, int alpha) {
    if (alpha != 0 && alpha != 1) throw ValidationError("alpha must be 0 or 1");
    if (f.modes() != model.mode_count)
        throw ValidationError("polynomial mode count must match the model");
    GaussianPolynomial<double> shifted = f;
    if (alpha == 1) shifted += number_operator(f);
    const double l2_sq = expectation(shifted * shifted);
    return std::sqrt(l2_sq + dirichlet_form_sq(shifted, model.eigenvalues));
}

double hminus1_norm(const GaussianPolynomial<double>& f, const CylinderBasis& basis) {
    if (f.modes() != basis.mode_count)
        throw ValidationError("polynomial mode count must match the basis");
    double acc = 0.0;
    for (const auto& [e, c] : hermite_coefficients(f)) {
        const int i = basis.index_of(e);
        if (i < 0) throw ValidationError("function lies outside the basis truncation");
        const double gram = basis.h1_diag(i);
        if (!(gram > 0.0)) {
            throw NumericalError("first-order Gram is singular at a basis element");
        }
        // pairing against He_e is c * E[He_e^2]
        const double pairing = c * basis.l2_diag[static_cast<std::size_t>(i)];
        acc += pairing * pairing / gram;
    }
    return std::sqrt(acc);
}

ResolventSolution resolvent_solve(const GaussianPolynomial<double>& rhs,
                                  const CylinderBasis& basis, const CouplingTensor& tensor,
                                  int chaos_cutoff) {
    const int n = basis.size();
    if (tensor.folded_count() != basis.mode_count)
        throw ValidationError("tensor mode count must match the basis");
    if (rhs.modes() != basis.mode_count)
        throw ValidationError("polynomial mode count must match the basis");
    if (chaos_cutoff < 0 || chaos_cutoff > basis.max_degree)
        throw ValidationError("chaos cutoff must lie between 0 and max_degree");

    const TrilinearForm<double> form = to_trilinear(tensor);

    // K(i, j) = E[F_i F_j] + E[<A D F_i, D F_j>] - E[(G^N F_i) F_j]; the
    // first two terms are the diagonal first-order Gram of the Hermite basis.
    Eigen::MatrixXd k_matrix = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        k_matrix(i, i) = basis.h1_diag(i);
        const auto drifted = g_cutoff(basis.element(i), form, chaos_cutoff);
        if (drifted.is_zero()) continue;
        for (const auto& [e, c] : hermite_coefficients(drifted)) {
            const int j = basis.index_of(e);
            if (j < 0) throw NumericalError("drift term escaped the basis truncation");
            k_matrix(i, j) -= c * basis.l2_diag[static_cast<std::size_t>(j)];
        }
    }

    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (const auto& [e, c] : hermite_coefficients(rhs)) {
        const int i = basis.index_of(e);
        if (i < 0) throw ValidationError("function lies outside the basis truncation");
        b(i) = c * basis.l2_diag[static_cast<std::size_t>(i)];
    }

    // weak form: sum_j K(F_j, F_i) x_j = E[rhs F_i]
    Eigen::FullPivLU<Eigen::MatrixXd> lu(k_matrix.transpose());
    if (!lu.isInvertible()) {
        throw NumericalError("resolvent system is singular: rank " +
                             std::to_string(lu.rank()) + " of " + std::to_string(n));
    }
    const Eigen::VectorXd x = lu.solve(b);

    ResolventSolution out;
    out.chaos_cutoff = chaos_cutoff;
    out.solution = GaussianPolynomial<double>(basis.mode_count);
    for (int i = 0; i < n; ++i) {
        if (x(i) == 0.0) continue;
        out.solution += basis.element(i).scaled(x(i));
    }
    out.coercivity_min = k_matrix(0, 0) / basis.h1_diag(0);
    out.coercivity_max = out.coercivity_min;
    for (int i = 1; i < n; ++i) {
        const double ratio = k_matrix(i, i) / basis.h1_diag(i);
        out.coercivity_min = std::min(out.coercivity_min, ratio);
        out.coercivity_max = std::max(out.coercivity_max, ratio);
    }

    // defect recomputed through the symbolic operators, not the matrix
    GaussianPolynomial<double> defect = out.solution;
    defect -= l0_apply(out.solution, basis.eigenvalues);
    defect -= g_cutoff(out.solution, form, chaos_cutoff);
    defect -= rhs;
    out.residual = hminus1_norm(defect, basis);
    out.rhs_dual_norm = hminus1_norm(rhs, basis);
    double h1_sq = 0.0;
    for (int i = 0; i < n; ++i) h1_sq += x(i) * x(i) * basis.h1_diag(i);
    out.solution_h1_norm = std::sqrt(h1_sq);
    return out;
}

std::string resolvent_report_json(const ResolventSolution& solution,
                                  const CylinderBasis& basis) {
    nlohmann::json report;
    report["mode_count"] = basis.mode_count;
    report["max_degree"] = basis.max_degree;
    report["basis_size"] = basis.size();
    report["chaos_cutoff"] = solution.chaos_cutoff;
    report["coercivity_min"] = solution.coercivity_min;
    report["coercivity_max"] = solution.coercivity_max;
    report["residual"] = solution.residual;
    report["rhs_dual_norm"] = solution.rhs_dual_norm;
    report["solution_h1_norm"] = solution.solution_h1_norm;
    return report.dump(2);
}

} // namespace spdelab
