#include "blockbench/agents/pggd.hpp"

#include <algorithm>
#include <cmath>

namespace blockbench::agents {

using nn::Matrix;
using nn::Vector;

PggdAgent::PggdAgent(task::ObservationLayout layout, PggdConfig config, Rng& rng)
    : layout_(std::move(layout)), config_(std::move(config)) {
    std::vector<int> w{layout_.size()};
    w.insert(w.end(), config_.hidden.begin(), config_.hidden.end());
    w.push_back(2 * kActionDim);
    policy_ = nn::Mlp(w, nn::OutputActivation::Gaussian, rng, config_.final_scale);
    optimizer_ = nn::AdamState::for_network(policy_, config_.learning_rate);
    normalizer_ = nn::RunningNormalizer(layout_.size());
}

Matrix PggdAgent::stack(const std::vector<std::span<const double>>& obs) const {
    Matrix raw(layout_.size(), static_cast<Eigen::Index>(obs.size()));
    for (std::size_t j = 0; j < obs.size(); ++j) {
        if (static_cast<int>(obs[j].size()) != layout_.size())
            throw DomainError("PggdAgent: observation size does not match layout " + layout_.describe());
        raw.col(static_cast<Eigen::Index>(j)) =
            Eigen::Map<const Vector>(obs[j].data(), static_cast<Eigen::Index>(obs[j].size()));
    }
    return normalizer_.normalize(raw);
}

std::pair<Vector, Vector> PggdAgent::distribution(std::span<const double> obs) const {
    const Matrix out = policy_.forward(stack({obs}));
    return {out.col(0).head(kActionDim), out.col(0).tail(kActionDim)};
}

PggdAction PggdAgent::act(std::span<const double> obs, PolicyMode mode, Rng& rng) const {
    return act_normalized(stack({obs}).col(0), mode, rng);
}

PggdAction PggdAgent::act_normalized(const Vector& obs, PolicyMode mode, Rng& rng) const {
    const Vector out = policy_.forward(obs);
    const Vector mean = out.head(kActionDim);
    const Vector stddev = out.tail(kActionDim);
    PggdAction r;
    if (mode == PolicyMode::Test) {
        r.raw = mean;
    } else {
        r.raw = Vector(kActionDim);
        for (int d = 0; d < kActionDim; ++d) r.raw(d) = mean(d) + stddev(d) * standard_normal(rng);
    }
    r.log_prob = nn::diag_gaussian_log_prob(mean, stddev, r.raw);
    r.action = to_action(r.raw).clipped();
    return r;
}

PolicyGradient PggdAgent::policy_gradient(const std::vector<const PggdSample*>& batch) const {
    PolicyGradient pg;
    pg.grads = nn::Gradients::zeros_like(policy_);
    if (batch.empty()) return pg;

    std::vector<std::span<const double>> obs;
    obs.reserve(batch.size());
    for (const auto* s : batch) obs.emplace_back(s->obs);
    nn::ForwardCache cache;
    const Matrix out = policy_.forward(stack(obs), &cache);

    double mean_ret = 0.0;
    for (const auto* s : batch) mean_ret += s->ret;
    mean_ret /= static_cast<double>(batch.size());

    const auto n = static_cast<double>(batch.size());
    Matrix grad_out = Matrix::Zero(out.rows(), out.cols());
    double surrogate = 0.0;
    for (std::size_t j = 0; j < batch.size(); ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        const Vector mean = out.col(col).head(kActionDim);
        const Vector stddev = out.col(col).tail(kActionDim);
        const auto& s = *batch[j];
        const double logp = nn::diag_gaussian_log_prob(mean, stddev, s.raw_action);
        const double w = std::clamp(std::exp(logp - s.behavior_log_prob), 0.0, config_.importance_clip);
        const double adv = s.ret - mean_ret;
        if (!std::isfinite(w) || !std::isfinite(logp)) {
            ++pg.dropped;
            continue;
        }
        ++pg.used;
        surrogate += w * adv * logp;
        const auto g = nn::diag_gaussian_log_prob_grad(mean, stddev, s.raw_action);
        grad_out.col(col).head(kActionDim) = -(w * adv / n) * g.d_mean;
        grad_out.col(col).tail(kActionDim) = -(w * adv / n) * g.d_std;
    }
    pg.loss = -surrogate / n;
    pg.grads = policy_.backward(cache, grad_out);
    return pg;
}

std::pair<nn::Gradients, double> PggdAgent::supervision_gradient(const std::vector<std::span<const double>>& obs,
                                                                 const std::vector<Vector>& targets) const {
    if (obs.size() != targets.size()) throw DomainError("supervision_gradient: size mismatch");
    if (obs.empty()) return {nn::Gradients::zeros_like(policy_), 0.0};
    nn::ForwardCache cache;
    const Matrix out = policy_.forward(stack(obs), &cache);
    const double denom = static_cast<double>(obs.size()) * kActionDim;
    Matrix grad_out = Matrix::Zero(out.rows(), out.cols());
    double loss = 0.0;
    for (std::size_t j = 0; j < obs.size(); ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        const Vector diff = out.col(col).head(kActionDim) - targets[j];
        loss += diff.squaredNorm();
        grad_out.col(col).head(kActionDim) = (2.0 / denom) * diff;
    }
    return {policy_.backward(cache, grad_out), loss / denom};
}

PggdUpdateStats PggdAgent::update(const std::vector<const PggdSample*>& batch) {
    PggdUpdateStats stats;
    const PolicyGradient pg = policy_gradient(batch);
    stats.loss = pg.loss;
    stats.dropped = pg.dropped;
    if (!std::isfinite(pg.loss)) {
        stats.applied = false;
        return stats;
    }
    stats.applied = apply(pg.grads);
    return stats;
}

std::vector<double> rewards_to_go(const std::vector<double>& rewards, double gamma) {
    std::vector<double> out(rewards.size());
    double acc = 0.0;
    for (std::size_t i = rewards.size(); i-- > 0;) {
        acc = rewards[i] + gamma * acc;
        out[i] = acc;
    }
    return out;
}

} // namespace blockbench::agents
