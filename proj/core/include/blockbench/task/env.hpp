#pragma once

#include <vector>

#include "blockbench/physics/world.hpp"
#include "blockbench/task/task.hpp"

namespace blockbench::task {

struct StepResult {
    Observation obs;
    double reward = 0.0;
    /// Episode over: success, failure or horizon reached.
    bool done = false;
    /// Ended by success/failure rather than by the horizon.
    bool terminal = false;
    Status status = Status::Ongoing;
};

/// A single episode of a block task: physics, color rules and reward.
class BlocksEnv {
public:
    BlocksEnv(EnvKind kind, physics::PhysicsParams params, int horizon);

    Observation reset(const WorldState& start);
    StepResult step(const physics::Action& action);

    [[nodiscard]] const WorldState& state() const { return state_; }
    [[nodiscard]] const TaskProgress& progress() const { return progress_; }
    [[nodiscard]] const std::vector<ContactPair>& contacts() const { return contacts_; }
    [[nodiscard]] Observation observe() const { return encode_observation(state_, kind_); }
    [[nodiscard]] EnvKind kind() const { return kind_; }
    [[nodiscard]] int horizon() const { return horizon_; }
    [[nodiscard]] const physics::PhysicsParams& params() const { return params_; }
    [[nodiscard]] bool done() const { return done_; }

private:
    EnvKind kind_;
    physics::PhysicsParams params_;
    int horizon_;
    WorldState state_;
    std::map<int, Color> colors_;
    TaskProgress progress_;
    std::vector<ContactPair> contacts_;
    bool done_ = true;
};

} // namespace blockbench::task
