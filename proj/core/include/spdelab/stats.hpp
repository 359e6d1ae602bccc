#pragma once

// Small statistics kit for the ensemble diagnostics: standard normal CDF,
// one-sample Kolmogorov-Smirnov distance, and moment summaries of a sample
// matrix. Everything here is deterministic given its input.

#include <vector>

#include <Eigen/Dense>

namespace spdelab {

double normal_cdf(double x);

// Kolmogorov-Smirnov distance of the sample to the standard normal law.
// Takes the sample by value and sorts the copy.
double ks_statistic_normal(std::vector<double> samples);

// Asymptotic 0.1% critical point of the one-sample KS statistic, 1.95/sqrt(n).
double ks_critical_point(int n);

struct SampleMoments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;    // unbiased estimator
    Eigen::MatrixXd covariance_se; // Gaussian plug-in standard errors
    Eigen::VectorXd fourth_moment; // raw E[x_k^4]
    Eigen::VectorXd ks;            // per-coordinate KS distance to N(0,1)
};

// One sample per row. Requires at least two rows.
SampleMoments sample_moments(const Eigen::MatrixXd& samples);

} // namespace spdelab
