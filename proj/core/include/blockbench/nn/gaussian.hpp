#pragma once

#include "blockbench/nn/mlp.hpp"

namespace blockbench::nn {

/// Log-density of a diagonal Gaussian at `x`.
double diag_gaussian_log_prob(const Vector& mean, const Vector& stddev, const Vector& x);

/// d log p / d mean and d log p / d stddev, evaluated at `x`.
struct GaussianLogProbGrad {
    Vector d_mean;
    Vector d_std;
};

GaussianLogProbGrad diag_gaussian_log_prob_grad(const Vector& mean, const Vector& stddev, const Vector& x);

} // namespace blockbench::nn
