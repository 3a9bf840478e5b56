#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "blockbench/agents/ddpg.hpp"
#include "blockbench/agents/pggd.hpp"
#include "blockbench/task/env.hpp"

namespace blockbench::imitation {

/// Teacher-forcing probability beta0 + (1 - beta0) * exp(-epoch / t0).
double beta(double epoch, double beta0, double t0);

/// A policy that can take control of the robot during roll-in.
class ExpertPolicy {
public:
    virtual ~ExpertPolicy() = default;

    [[nodiscard]] virtual physics::Action act(const physics::WorldState& state, const task::Observation& obs) const = 0;

    /// The expert's own advantage estimate for `action`, when it has a critic.
    [[nodiscard]] virtual std::optional<double> advantage(const task::Observation& /*obs*/,
                                                          const physics::Action& /*action*/) const {
        return std::nullopt;
    }

    [[nodiscard]] virtual std::string name() const = 0;
};

/// Geometric pusher: gets behind the blue block on the blue-to-green line,
/// then pushes toward green. Reads the world state directly and ignores
/// grey blocks. Returns a zero action when blue and green coincide.
physics::Action scripted_expert_act(const physics::WorldState& state, const physics::PhysicsParams& params);

class ScriptedExpert final : public ExpertPolicy {
public:
    explicit ScriptedExpert(physics::PhysicsParams params) : params_(params) {}

    [[nodiscard]] physics::Action act(const physics::WorldState& state, const task::Observation& obs) const override;
    [[nodiscard]] std::string name() const override { return "scripted"; }

private:
    physics::PhysicsParams params_;
};

/// A trained two-block DDPG agent that only ever sees the grey-filtered view.
class TrainedExpert final : public ExpertPolicy {
public:
    /// Throws ConfigError unless the agent's layout has no grey segment.
    explicit TrainedExpert(agents::DdpgAgent agent);

    [[nodiscard]] physics::Action act(const physics::WorldState& state, const task::Observation& obs) const override;
    /// Q*(s~, a) - Q*(s~, mu*(s~)) on the filtered observation s~.
    [[nodiscard]] std::optional<double> advantage(const task::Observation& obs,
                                                  const physics::Action& action) const override;
    [[nodiscard]] std::string name() const override { return "trained"; }

    [[nodiscard]] const agents::DdpgAgent& agent() const { return agent_; }

private:
    agents::DdpgAgent agent_;
};

enum class MixingGranularity { Episode, Step };

MixingGranularity granularity_from_string(const std::string& s);
const char* to_string(MixingGranularity g);

/// Learner, expert and the annealed mixing probability between them.
struct MixedPolicy {
    agents::PggdAgent* learner = nullptr;
    const ExpertPolicy* expert = nullptr;
    double beta0 = 0.0;
    double t0 = 50.0;
    int epoch = 0;
    MixingGranularity granularity = MixingGranularity::Episode;
    /// Use the expert critic's advantage in the reinforcement term.
    bool expert_critic_advantage = false;

    [[nodiscard]] double current_beta() const { return beta(epoch, beta0, t0); }
};

enum class Controller { Expert, Learner };

/// One executed step with its controller. The expert's action is recorded
/// on every step (executed or merely queried); learner steps also carry
/// the sampled pre-clip action and its behavior log-density.
struct ControlledStep {
    agents::Transition transition;
    Controller controller = Controller::Learner;
    physics::Action expert_action;
    std::optional<nn::Vector> learner_raw_action;
    std::optional<double> behavior_log_prob;
    /// Discounted reward-to-go, filled when the episode ends.
    double ret = 0.0;
    /// Expert-critic advantage when requested and available.
    std::optional<double> expert_advantage;
};

struct RollInEpisode {
    std::vector<ControlledStep> steps;
    task::Status status = task::Status::Ongoing;
    double total_return = 0.0;
    bool expert_controlled = false;
};

/// Runs one episode from `start` under the mixed policy. With episode
/// granularity a single Bernoulli(beta) draw picks the controller for the
/// whole episode; with step granularity one draw per step.
RollInEpisode roll_in(const MixedPolicy& mixed, task::BlocksEnv& env, const physics::WorldState& start, Rng& rng);

struct AggrevatedStats {
    double supervision_loss = 0.0;
    double pg_loss = 0.0;
    double beta = 0.0;
    int learner_steps = 0;
    bool applied = true;
};

/// beta * (mean squared error of the learner mean against the expert's
/// action over all steps) + (1 - beta) * (policy-gradient surrogate over
/// learner-controlled steps), applied as a single Adam step.
AggrevatedStats aggrevated_update(MixedPolicy& mixed, const std::vector<const ControlledStep*>& batch);

} // namespace blockbench::imitation
