#pragma once

#include <iosfwd>
#include <string>

#include "blockbench/agents/ddpg.hpp"
#include "blockbench/agents/pggd.hpp"
#include "blockbench/curriculum/curriculum.hpp"
#include "blockbench/imitation/imitation.hpp"
#include "blockbench/physics/trace.hpp"
#include "blockbench/task/env.hpp"

namespace blockbench::harness {

/// Train evaluations explore; test and finals act deterministically.
enum class EvalMode { Train, Test, Finals };

const char* to_string(EvalMode m);
EvalMode eval_mode_from_string(const std::string& s);

/// Anything that can drive the robot for an episode.
class Policy {
public:
    virtual ~Policy() = default;
    [[nodiscard]] virtual physics::Action act(const physics::WorldState& state, const task::Observation& obs,
                                              bool deterministic, Rng& rng) const = 0;
    [[nodiscard]] virtual std::string name() const = 0;
};

class DdpgPolicy final : public Policy {
public:
    explicit DdpgPolicy(const agents::DdpgAgent& agent) : agent_(agent) {}
    physics::Action act(const physics::WorldState&, const task::Observation& obs, bool deterministic,
                        Rng& rng) const override {
        return agent_.act(obs.values, !deterministic, rng);
    }
    std::string name() const override { return "ddpg"; }

private:
    const agents::DdpgAgent& agent_;
};

class PggdPolicy final : public Policy {
public:
    explicit PggdPolicy(const agents::PggdAgent& agent) : agent_(agent) {}
    physics::Action act(const physics::WorldState&, const task::Observation& obs, bool deterministic,
                        Rng& rng) const override {
        return agent_.act(obs.values, deterministic ? agents::PolicyMode::Test : agents::PolicyMode::Train, rng).action;
    }
    std::string name() const override { return "pggd"; }

private:
    const agents::PggdAgent& agent_;
};

/// Experts are deterministic; the mode is ignored.
class ExpertAsPolicy final : public Policy {
public:
    explicit ExpertAsPolicy(const imitation::ExpertPolicy& expert) : expert_(expert) {}
    physics::Action act(const physics::WorldState& state, const task::Observation& obs, bool, Rng&) const override {
        return expert_.act(state, obs);
    }
    std::string name() const override { return "expert-" + expert_.name(); }

private:
    const imitation::ExpertPolicy& expert_;
};

/// Uniform actions in [-1, 1]^4 regardless of mode.
class RandomPolicy final : public Policy {
public:
    physics::Action act(const physics::WorldState&, const task::Observation&, bool, Rng& rng) const override;
    std::string name() const override { return "random"; }
};

class StillPolicy final : public Policy {
public:
    physics::Action act(const physics::WorldState&, const task::Observation&, bool, Rng&) const override {
        return {};
    }
    std::string name() const override { return "still"; }
};

/// Environment settings shared by every evaluation episode.
struct EvalSetup {
    curriculum::SpawnSpec spawn;
    physics::PhysicsParams physics;
    int horizon = 50;
    /// When set, every episode is written as an NDJSON trace.
    std::ostream* trace = nullptr;
};

struct EpisodeOutcome {
    task::Status status = task::Status::Ongoing;
    double total_return = 0.0;
    int steps = 0;
};

/// Plays one episode from `start`; writes a trace when `trace` is non-null.
EpisodeOutcome run_episode(const Policy& policy, task::BlocksEnv& env, const physics::WorldState& start,
                           bool deterministic, Rng& rng, physics::TraceWriter* trace = nullptr, int episode = 0);

struct EvalResult {
    int episodes = 0;
    int successes = 0;
    int failures = 0;
    double mean_return = 0.0;

    [[nodiscard]] double rate() const { return episodes ? static_cast<double>(successes) / episodes : 0.0; }
};

/// `n` episodes from scenes sampled at `level`. Throws DomainError if n < 1.
EvalResult evaluate(const Policy& policy, const curriculum::CurriculumLevel& level, EvalMode mode, int n, Rng& rng,
                    const EvalSetup& setup);

/// `n` deterministic episodes from challenge scenes. BlocksChoose only.
EvalResult challenge_eval(const Policy& policy, int n, Rng& rng, const EvalSetup& setup);

} // namespace blockbench::harness
