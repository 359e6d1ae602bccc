#include "spdelab/stats.hpp"

#include <algorithm>
#include <cmath>

#include "spdelab/errors.hpp"

namespace spdelab {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_statistic_normal(std::vector<double> samples) {
    if (samples.empty()) throw ValidationError("KS statistic needs at least one sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double cdf = normal_cdf(samples[i]);
        d = std::max(d, cdf - static_cast<double>(i) / n);
        d = std::max(d, static_cast<double>(i + 1) / n - cdf);
    }
    return d;
}

double ks_critical_point(int n) {
    if (n < 1) throw ValidationError("KS critical point needs a positive sample count");
    return 1.95 / std::sqrt(static_cast<double>(n));
}

SampleMoments sample_moments(const Eigen::MatrixXd& samples) {
    const int n = static_cast<int>(samples.rows());
    const int dim = static_cast<int>(samples.cols());
    if (n < 2) throw ValidationError("moment summary needs at least two samples");

    SampleMoments out;
    out.mean = samples.colwise().mean();
    const Eigen::MatrixXd centered = samples.rowwise() - out.mean.transpose();
    out.covariance = centered.transpose() * centered / static_cast<double>(n - 1);

    out.covariance_se.resize(dim, dim);
    for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l) {
            const double var = out.covariance(k, k) * out.covariance(l, l) +
                               out.covariance(k, l) * out.covariance(k, l);
            out.covariance_se(k, l) = std::sqrt(std::max(var, 0.0) / static_cast<double>(n - 1));
        }

    out.fourth_moment = samples.array().pow(4).colwise().mean();

    out.ks.resize(dim);
    std::vector<double> column(static_cast<std::size_t>(n));
    for (int k = 0; k < dim; ++k) {
        for (int i = 0; i < n; ++i) column[static_cast<std::size_t>(i)] = samples(i, k);
        out.ks(k) = ks_statistic_normal(column);
    }
    return out;
}

} // namespace spdelab
