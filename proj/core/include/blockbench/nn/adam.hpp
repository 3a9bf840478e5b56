#pragma once

#include "blockbench/nn/mlp.hpp"

namespace blockbench::nn {

struct AdamState {
    Gradients first;
    Gradients second;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double learning_rate = 1e-3;

    static AdamState for_network(const Mlp& net, double learning_rate);
};

/// One bias-corrected Adam update of `net` in the descent direction of
/// `grads`. Non-finite gradients leave both `net` and `state` untouched and
/// return false.
bool adam_step(Mlp& net, const Gradients& grads, AdamState& state);

} // namespace blockbench::nn
