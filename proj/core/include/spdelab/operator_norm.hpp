#pragma once

#include <Eigen/Dense>

#include "spdelab/errors.hpp"

namespace spdelab {

struct OperatorNormResult {
    double value = 0.0;
    // Dimension of the domain Gram's null space (a homogeneous seminorm may
    // have one); the estimate is taken over its orthogonal complement.
    int kernel_dimension = 0;
    int iterations = 0;
};

// Largest generalized singular value of `map` between inner-product spaces
// given by positive semidefinite Gram matrices: the supremum of
// sqrt(y' Gc y) / sqrt(x' Gd x) over y = map x. Power iteration on the
// normal equations, relative tolerance on the squared value.
OperatorNormResult operator_norm_estimate(const Eigen::MatrixXd& map,
                                          const Eigen::MatrixXd& domain_gram,
                                          const Eigen::MatrixXd& codomain_gram,
                                          double rel_tol = 1e-8, int max_iterations = 50000);

} // namespace spdelab
