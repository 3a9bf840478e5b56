#pragma once

#include <span>
#include <vector>

#include "blockbench/agents/ddpg.hpp"
#include "blockbench/nn/gaussian.hpp"

namespace blockbench::agents {

struct PggdConfig {
    std::vector<int> hidden{256, 256, 256};
    double learning_rate = 1e-4;
    /// Discount for reward-to-go returns.
    double gamma = 0.98;
    /// Upper clip on importance weights pi / pi_behavior.
    double importance_clip = 5.0;
    std::size_t buffer_capacity = 1'000'000;
    double final_scale = 0.01;

    friend bool operator==(const PggdConfig&, const PggdConfig&) = default;
};

enum class PolicyMode { Train, Test };

/// One learner sample for the policy-gradient update.
struct PggdSample {
    std::vector<double> obs;
    /// Pre-clip action the density was evaluated at.
    nn::Vector raw_action;
    /// Discounted reward-to-go from this step.
    double ret = 0.0;
    double behavior_log_prob = 0.0;
};

struct PggdAction {
    physics::Action action;
    nn::Vector raw;
    double log_prob = 0.0;
};

struct PggdUpdateStats {
    double loss = 0.0;
    int dropped = 0;
    bool applied = true;
};

/// Gradient of a policy-gradient surrogate, not yet applied.
struct PolicyGradient {
    nn::Gradients grads;
    double loss = 0.0;
    int dropped = 0;
    int used = 0;
};

/// Gaussian policy a ~ N(mu(s), sigma(s)^2) with no critic.
class PggdAgent {
public:
    PggdAgent(task::ObservationLayout layout, PggdConfig config, Rng& rng);

    /// Train mode samples and clips, reporting the pre-clip log-density;
    /// Test mode returns clip(mu) and the density at the mean.
    [[nodiscard]] PggdAction act(std::span<const double> obs, PolicyMode mode, Rng& rng) const;
    [[nodiscard]] PggdAction act_normalized(const nn::Vector& obs, PolicyMode mode, Rng& rng) const;

    /// Mean and standard deviation for a raw observation.
    [[nodiscard]] std::pair<nn::Vector, nn::Vector> distribution(std::span<const double> obs) const;

    /// Gradient of -mean(w * A * log pi(a|s)) with w = clip(pi / pi_b, 0,
    /// importance_clip) held constant and A = return - batch mean return.
    [[nodiscard]] PolicyGradient policy_gradient(const std::vector<const PggdSample*>& batch) const;

    /// Gradient of mean ||mu(s) - a*||^2 / dim over (raw obs, target action) pairs.
    [[nodiscard]] std::pair<nn::Gradients, double> supervision_gradient(
        const std::vector<std::span<const double>>& obs, const std::vector<nn::Vector>& targets) const;

    /// policy_gradient followed by one Adam step.
    PggdUpdateStats update(const std::vector<const PggdSample*>& batch);

    bool apply(const nn::Gradients& grads) { return nn::adam_step(policy_, grads, optimizer_); }

    void observe(const nn::Matrix& raw_obs) { normalizer_.update(raw_obs); }

    [[nodiscard]] const task::ObservationLayout& layout() const { return layout_; }
    [[nodiscard]] const PggdConfig& config() const { return config_; }
    [[nodiscard]] const nn::Mlp& policy() const { return policy_; }
    nn::Mlp& policy() { return policy_; }
    [[nodiscard]] const nn::RunningNormalizer& normalizer() const { return normalizer_; }
    nn::RunningNormalizer& normalizer() { return normalizer_; }
    nn::AdamState& optimizer() { return optimizer_; }

private:
    nn::Matrix stack(const std::vector<std::span<const double>>& obs) const;

    task::ObservationLayout layout_;
    PggdConfig config_;
    nn::Mlp policy_;
    nn::AdamState optimizer_;
    nn::RunningNormalizer normalizer_;
};

/// Discounted reward-to-go for each step of one episode.
std::vector<double> rewards_to_go(const std::vector<double>& rewards, double gamma);

} // namespace blockbench::agents
