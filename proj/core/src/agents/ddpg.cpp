#include "blockbench/agents/ddpg.hpp"

#include <algorithm>
#include <cmath>

namespace blockbench::agents {

using nn::Matrix;
using nn::Vector;

namespace {

std::vector<int> widths(int in, const std::vector<int>& hidden, int out) {
    std::vector<int> w{in};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(out);
    return w;
}

} // namespace

Matrix critic_input(const Matrix& normalized_obs, const Matrix& actions) {
    if (normalized_obs.cols() != actions.cols()) throw DomainError("critic_input: batch size mismatch");
    Matrix x(normalized_obs.rows() + actions.rows(), normalized_obs.cols());
    x.topRows(normalized_obs.rows()) = normalized_obs;
    x.bottomRows(actions.rows()) = actions;
    return x;
}

physics::Action to_action(const Vector& v) {
    physics::Action a;
    for (int i = 0; i < kActionDim; ++i) a.values[static_cast<std::size_t>(i)] = v(i);
    return a;
}

DdpgAgent::DdpgAgent(task::ObservationLayout layout, DdpgConfig config, Rng& rng)
    : layout_(std::move(layout)), config_(std::move(config)) {
    const int obs_dim = layout_.size();
    actor_ = nn::Mlp(widths(obs_dim, config_.hidden, kActionDim), nn::OutputActivation::Tanh, rng,
                     config_.actor_final_scale);
    critic_ = nn::Mlp(widths(obs_dim + kActionDim, config_.hidden, 1), nn::OutputActivation::Identity, rng);
    target_actor_ = actor_;
    target_critic_ = critic_;
    actor_opt_ = nn::AdamState::for_network(actor_, config_.actor_lr);
    critic_opt_ = nn::AdamState::for_network(critic_, config_.critic_lr);
    normalizer_ = nn::RunningNormalizer(obs_dim);
}

physics::Action DdpgAgent::act(std::span<const double> obs, bool explore, Rng& rng) const {
    if (static_cast<int>(obs.size()) != layout_.size())
        throw DomainError("DdpgAgent::act: observation has " + std::to_string(obs.size()) + " entries, layout " +
                          layout_.describe() + " expects " + std::to_string(layout_.size()));
    const Vector raw = Eigen::Map<const Vector>(obs.data(), static_cast<Eigen::Index>(obs.size()));
    return act_normalized(normalizer_.normalize(raw), explore, rng);
}

physics::Action DdpgAgent::act_normalized(const Vector& obs, bool explore, Rng& rng) const {
    const Vector mu = actor_.forward(obs);
    physics::Action a = to_action(mu);
    if (!explore) return a.clipped();
    if (config_.random_eps > 0.0 && bernoulli(rng, config_.random_eps)) {
        for (auto& v : a.values) v = uniform(rng, -1.0, 1.0);
        return a;
    }
    if (config_.noise_scale > 0.0) {
        for (auto& v : a.values) v += config_.noise_scale * standard_normal(rng);
    }
    return a.clipped();
}

Matrix DdpgAgent::batch_obs(const std::vector<const Transition*>& batch, bool next) const {
    const auto n = static_cast<Eigen::Index>(batch.size());
    Matrix raw(layout_.size(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& v = next ? batch[static_cast<std::size_t>(j)]->next_obs : batch[static_cast<std::size_t>(j)]->obs;
        if (static_cast<int>(v.size()) != layout_.size()) throw DomainError("DdpgAgent: transition layout mismatch");
        raw.col(j) = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    return normalizer_.normalize(raw);
}

Vector DdpgAgent::td_targets(const std::vector<const Transition*>& batch) const {
    const Matrix s_next = batch_obs(batch, true);
    const Matrix a_next = target_actor_.forward(s_next);
    const Matrix q_next = target_critic_.forward(critic_input(s_next, a_next));
    Vector y(static_cast<Eigen::Index>(batch.size()));
    for (Eigen::Index j = 0; j < y.size(); ++j) {
        const auto& t = *batch[static_cast<std::size_t>(j)];
        y(j) = t.done ? t.reward : t.reward + config_.gamma * q_next(0, j);
        if (config_.clip_target) y(j) = std::clamp(y(j), -1.0, 1.0);
    }
    return y;
}

Vector DdpgAgent::q_values(const Matrix& raw_obs, const Matrix& actions) const {
    const Matrix q = critic_.forward(critic_input(normalizer_.normalize(raw_obs), actions));
    return q.row(0).transpose();
}

DdpgUpdateStats DdpgAgent::update(const std::vector<const Transition*>& batch) {
    if (batch.empty()) throw DomainError("DdpgAgent::update: empty batch");
    const auto n = static_cast<double>(batch.size());
    DdpgUpdateStats stats;

    const Vector y = td_targets(batch);
    const Matrix s = batch_obs(batch, false);
    Matrix a(kActionDim, static_cast<Eigen::Index>(batch.size()));
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (int i = 0; i < kActionDim; ++i)
            a(i, j) = batch[static_cast<std::size_t>(j)]->action.values[static_cast<std::size_t>(i)];

    // Critic: mean squared TD error.
    nn::ForwardCache critic_cache;
    const Matrix q = critic_.forward(critic_input(s, a), &critic_cache);
    const Vector err = q.row(0).transpose() - y;
    stats.critic_loss = err.squaredNorm() / n;
    if (!std::isfinite(stats.critic_loss)) {
        stats.applied = false;
        return stats;
    }
    const Matrix grad_q = (2.0 / n) * err.transpose();
    const nn::Gradients critic_grads = critic_.backward(critic_cache, grad_q);
    if (!nn::adam_step(critic_, critic_grads, critic_opt_)) {
        stats.applied = false;
        return stats;
    }

    // Actor: ascend Q(s, mu(s)) through the (now fixed) critic.
    nn::ForwardCache actor_cache;
    const Matrix mu = actor_.forward(s, &actor_cache);
    nn::ForwardCache q_cache;
    const Matrix q_mu = critic_.forward(critic_input(s, mu), &q_cache);
    stats.actor_objective = q_mu.sum() / n;
    if (!std::isfinite(stats.actor_objective)) {
        stats.applied = false;
        return stats;
    }
    Matrix grad_input;
    const Matrix grad_objective = Matrix::Constant(1, q_mu.cols(), -1.0 / n);
    (void)critic_.backward(q_cache, grad_objective, &grad_input);
    const Matrix grad_mu = grad_input.bottomRows(kActionDim);
    const nn::Gradients actor_grads = actor_.backward(actor_cache, grad_mu);
    if (!nn::adam_step(actor_, actor_grads, actor_opt_)) {
        stats.applied = false;
        return stats;
    }

    nn::soft_update(target_actor_, actor_, config_.tau);
    nn::soft_update(target_critic_, critic_, config_.tau);
    return stats;
}

} // namespace blockbench::agents
