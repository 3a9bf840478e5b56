#include "blockbench/nn/adam.hpp"

#include <cmath>

namespace blockbench::nn {

AdamState AdamState::for_network(const Mlp& net, double learning_rate) {
    AdamState s;
    s.first = Gradients::zeros_like(net);
    s.second = Gradients::zeros_like(net);
    s.learning_rate = learning_rate;
    return s;
}

bool adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
    if (grads.weights.size() != net.layer_count() || state.first.weights.size() != net.layer_count())
        throw DomainError("adam_step: shape mismatch");
    if (!grads.all_finite()) return false;

    ++state.step;
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    const double lr = state.learning_rate;
    const double eps = state.epsilon;

    auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };

    auto& weights = net.mutable_weights();
    auto& biases = net.mutable_biases();
    for (std::size_t l = 0; l < weights.size(); ++l) {
        update(weights[l], grads.weights[l], state.first.weights[l], state.second.weights[l]);
        update(biases[l], grads.biases[l], state.first.biases[l], state.second.biases[l]);
    }
    return true;
}

} // namespace blockbench::nn
