#pragma once

#include <string>
#include <vector>

#include "blockbench/nn/mlp.hpp"

namespace blockbench::nn {

struct GradCheckOptions {
    /// Central-difference step.
    double step = 1e-5;
    double tolerance = 1e-4;
    /// Denominator floor for the relative error |a - n| / max(|a|, |n|, floor).
    double floor = 1e-6;
    /// Parameters checked per layer (weights and biases each); 0 checks all.
    std::size_t per_layer = 0;
    int batch = 3;
};

struct GradCheckResult {
    std::string name;
    std::size_t checked = 0;
    /// Coordinates skipped because the perturbation flipped a ReLU.
    std::size_t skipped = 0;
    double max_relative_error = 0.0;
    bool passed = true;
};

/// Compares Mlp::backward against central differences of the scalar
/// sum(C .* forward(X)) for random X and C, on parameters and inputs.
GradCheckResult check_gradients(const std::string& name, const Mlp& net, Rng& rng,
                                const GradCheckOptions& options = {});

} // namespace blockbench::nn
