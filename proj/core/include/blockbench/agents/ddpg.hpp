#pragma once

#include <span>
#include <vector>

#include "blockbench/agents/replay.hpp"
#include "blockbench/nn/adam.hpp"
#include "blockbench/nn/mlp.hpp"
#include "blockbench/nn/normalizer.hpp"
#include "blockbench/task/task.hpp"

namespace blockbench::agents {

inline constexpr int kActionDim = 4;

struct DdpgConfig {
    std::vector<int> hidden{256, 256, 256};
    double gamma = 0.98;
    double tau = 0.05;
    double noise_scale = 0.2;
    double random_eps = 0.3;
    double actor_lr = 1e-3;
    double critic_lr = 1e-3;
    std::size_t buffer_capacity = 1'000'000;
    /// Clamp bootstrapped targets to the attainable return range [-1, 1].
    bool clip_target = true;
    /// Initial scale of the actor's final layer.
    double actor_final_scale = 0.01;

    friend bool operator==(const DdpgConfig&, const DdpgConfig&) = default;
};

struct DdpgUpdateStats {
    double critic_loss = 0.0;
    /// Batch mean of Q(s, mu(s)) before the actor step.
    double actor_objective = 0.0;
    bool applied = true;
};

/// Deterministic actor with tanh output, critic on (state, action), and
/// polyak-averaged target copies of both.
class DdpgAgent {
public:
    DdpgAgent(task::ObservationLayout layout, DdpgConfig config, Rng& rng);

    /// `obs` is a raw observation; the agent applies its own normalizer.
    /// Throws DomainError on a layout size mismatch.
    [[nodiscard]] physics::Action act(std::span<const double> obs, bool explore, Rng& rng) const;
    /// Same on an already normalized observation.
    [[nodiscard]] physics::Action act_normalized(const nn::Vector& obs, bool explore, Rng& rng) const;

    /// One critic step on the TD targets, one actor step through the
    /// critic, then a soft update of both targets.
    DdpgUpdateStats update(const std::vector<const Transition*>& batch);

    /// TD targets r + gamma * (1 - done) * Q'(s', mu'(s')) for a batch.
    [[nodiscard]] nn::Vector td_targets(const std::vector<const Transition*>& batch) const;

    /// Folds raw observations (one per column) into the normalizer.
    void observe(const nn::Matrix& raw_obs) { normalizer_.update(raw_obs); }

    /// Q(s, a) on raw observations.
    [[nodiscard]] nn::Vector q_values(const nn::Matrix& raw_obs, const nn::Matrix& actions) const;

    [[nodiscard]] const task::ObservationLayout& layout() const { return layout_; }
    [[nodiscard]] const DdpgConfig& config() const { return config_; }
    [[nodiscard]] const nn::Mlp& actor() const { return actor_; }
    [[nodiscard]] const nn::Mlp& critic() const { return critic_; }
    [[nodiscard]] const nn::Mlp& target_actor() const { return target_actor_; }
    [[nodiscard]] const nn::Mlp& target_critic() const { return target_critic_; }
    [[nodiscard]] const nn::RunningNormalizer& normalizer() const { return normalizer_; }
    nn::Mlp& actor() { return actor_; }
    nn::Mlp& critic() { return critic_; }
    nn::Mlp& target_actor() { return target_actor_; }
    nn::Mlp& target_critic() { return target_critic_; }
    nn::RunningNormalizer& normalizer() { return normalizer_; }
    nn::AdamState& actor_optimizer() { return actor_opt_; }
    nn::AdamState& critic_optimizer() { return critic_opt_; }

private:
    nn::Matrix batch_obs(const std::vector<const Transition*>& batch, bool next) const;

    task::ObservationLayout layout_;
    DdpgConfig config_;
    nn::Mlp actor_;
    nn::Mlp critic_;
    nn::Mlp target_actor_;
    nn::Mlp target_critic_;
    nn::AdamState actor_opt_;
    nn::AdamState critic_opt_;
    nn::RunningNormalizer normalizer_;
};

/// Stacks `[obs; action]` column-wise for the critic.
nn::Matrix critic_input(const nn::Matrix& normalized_obs, const nn::Matrix& actions);

physics::Action to_action(const nn::Vector& v);

} // namespace blockbench::agents
