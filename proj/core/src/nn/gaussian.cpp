#include "blockbench/nn/gaussian.hpp"

#include <cmath>
#include <numbers>

namespace blockbench::nn {

double diag_gaussian_log_prob(const Vector& mean, const Vector& stddev, const Vector& x) {
    if (mean.size() != stddev.size() || mean.size() != x.size())
        throw DomainError("diag_gaussian_log_prob: size mismatch");
    const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
    double lp = 0.0;
    for (Eigen::Index d = 0; d < mean.size(); ++d) {
        const double u = (x(d) - mean(d)) / stddev(d);
        lp += -0.5 * u * u - std::log(stddev(d)) - half_log_two_pi;
    }
    return lp;
}

GaussianLogProbGrad diag_gaussian_log_prob_grad(const Vector& mean, const Vector& stddev, const Vector& x) {
    GaussianLogProbGrad g;
    const Vector diff = x - mean;
    const Vector var = stddev.cwiseProduct(stddev);
    g.d_mean = diff.cwiseQuotient(var);
    g.d_std = (diff.cwiseProduct(diff).cwiseQuotient(var.cwiseProduct(stddev)) - stddev.cwiseInverse());
    return g;
}

} // namespace blockbench::nn
