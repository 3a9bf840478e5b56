#include "blockbench/task/env.hpp"

namespace blockbench::task {

BlocksEnv::BlocksEnv(EnvKind kind, physics::PhysicsParams params, int horizon)
    : kind_(kind), params_(params), horizon_(horizon) {
    params_.validate();
    if (horizon_ < 1) throw ConfigError("horizon must be >= 1");
}

Observation BlocksEnv::reset(const WorldState& start) {
    state_ = start;
    state_.step_count = 0;
    colors_ = color_map(state_);
    contacts_ = physics::detect_contacts(state_, params_.contact_margin);
    progress_ = apply_off_table_rule(evaluate_status(initial_progress(colors_), contacts_, colors_), state_);
    done_ = progress_.status != Status::Ongoing;
    return observe();
}

StepResult BlocksEnv::step(const physics::Action& action) {
    if (done_) throw DomainError("BlocksEnv::step called on a finished episode");
    state_ = physics::step_world(state_, action, params_);
    contacts_ = physics::detect_contacts(state_, params_.contact_margin);
    const TaskProgress prev = progress_;
    progress_ = apply_off_table_rule(evaluate_status(progress_, contacts_, colors_), state_);

    StepResult r;
    r.reward = compute_reward(prev, progress_);
    r.status = progress_.status;
    r.terminal = progress_.status != Status::Ongoing;
    r.done = r.terminal || state_.step_count >= horizon_;
    done_ = r.done;
    r.obs = observe();
    return r;
}

} // namespace blockbench::task
