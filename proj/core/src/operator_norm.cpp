#include "spdelab/operator_norm.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace spdelab {

namespace {

bool is_diagonal(const Eigen::MatrixXd& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (i != j && m(i, j) != 0.0) return false;
    return true;
}

// Rayleigh-quotient power iteration for the largest eigenvalue of the map
// v -> apply(v), which must be symmetric positive semidefinite.
template <typename Apply>
OperatorNormResult iterate(Apply&& apply, Eigen::Index dim, int kernel_dimension, double rel_tol,
                           int max_iterations) {
    OperatorNormResult result;
    result.kernel_dimension = kernel_dimension;
    if (dim == 0) return result;

    // Deterministic start with a mild ramp so a special top eigenvector is
    // not missed by symmetry.
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        v(i) = 1.0 + 0.5 * static_cast<double>(i) / static_cast<double>(dim);
    v.normalize();

    double estimate = 0.0;
    for (int it = 1; it <= max_iterations; ++it) {
        Eigen::VectorXd w = apply(v);
        const double norm = w.norm();
        result.iterations = it;
        if (norm == 0.0) return result; // map vanishes on the reduced domain
        const double next = v.dot(w);
        v = w / norm;
        if (it > 1 && std::abs(next - estimate) <= rel_tol * std::abs(next)) {
            result.value = std::sqrt(std::max(0.0, next));
            return result;
        }
        estimate = next;
    }
    throw NumericalError("operator norm power iteration did not converge");
}

} // namespace

OperatorNormResult operator_norm_estimate(const Eigen::MatrixXd& map,
                                          const Eigen::MatrixXd& domain_gram,
                                          const Eigen::MatrixXd& codomain_gram,
                                          double rel_tol, int max_iterations) {
    const Eigen::Index n = map.cols();
    if (domain_gram.rows() != n || domain_gram.cols() != n)
        throw ValidationError("domain Gram dimensions do not match the map");
    if (codomain_gram.rows() != map.rows() || codomain_gram.cols() != map.rows())
        throw ValidationError("codomain Gram dimensions do not match the map");

    if (is_diagonal(domain_gram)) {
        // Whitening is a per-coordinate scaling; nothing dense to factor.
        const Eigen::VectorXd d = domain_gram.diagonal();
        const double cutoff = 1e-12 * std::max(d.cwiseAbs().maxCoeff(), 1e-300);
        Eigen::VectorXd inv_sqrt = Eigen::VectorXd::Zero(n);
        int kernel = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (d(i) > cutoff)
                inv_sqrt(i) = 1.0 / std::sqrt(d(i));
            else
                ++kernel;
        }
        const bool diag_codomain = is_diagonal(codomain_gram);
        const Eigen::VectorXd cd = codomain_gram.diagonal();
        auto apply = [&](const Eigen::VectorXd& v) {
            Eigen::VectorXd y = map * inv_sqrt.cwiseProduct(v);
            if (diag_codomain)
                y = cd.cwiseProduct(y);
            else
                y = codomain_gram * y;
            return Eigen::VectorXd(inv_sqrt.cwiseProduct(map.transpose() * y));
        };
        return iterate(apply, n, kernel, rel_tol, max_iterations);
    }

    if (n > 4096)
        throw NumericalError("dense domain Gram too large for the eigendecomposition path");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (domain_gram + domain_gram.transpose()));
    if (es.info() != Eigen::Success)
        throw NumericalError("domain Gram eigendecomposition failed");
    const Eigen::VectorXd evals = es.eigenvalues();
    const double cutoff = 1e-12 * std::max(evals.cwiseAbs().maxCoeff(), 1e-300);

    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (evals(i) > cutoff) ++rank;

    Eigen::MatrixXd whitener(n, rank);
    Eigen::Index col = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (evals(i) <= cutoff) continue;
        whitener.col(col++) = es.eigenvectors().col(i) / std::sqrt(evals(i));
    }
    const Eigen::MatrixXd mapped = map * whitener;
    auto apply = [&](const Eigen::VectorXd& v) {
        return Eigen::VectorXd(mapped.transpose() * (codomain_gram * (mapped * v)));
    };
    return iterate(apply, rank, static_cast<int>(n - rank), rel_tol, max_iterations);
}

} // namespace spdelab
