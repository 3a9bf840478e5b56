#include "blockbench/harness/evaluate.hpp"

namespace blockbench::harness {

const char* to_string(EvalMode m) {
    switch (m) {
    case EvalMode::Train: return "train";
    case EvalMode::Test: return "test";
    case EvalMode::Finals: return "finals";
    }
    return "?";
}

EvalMode eval_mode_from_string(const std::string& s) {
    if (s == "train") return EvalMode::Train;
    if (s == "test") return EvalMode::Test;
    if (s == "finals") return EvalMode::Finals;
    throw ConfigError("unknown evaluation mode '" + s + "' (expected train, test or finals)");
}

physics::Action RandomPolicy::act(const physics::WorldState&, const task::Observation&, bool, Rng& rng) const {
    physics::Action a;
    for (auto& v : a.values) v = uniform(rng, -1.0, 1.0);
    return a;
}

EpisodeOutcome run_episode(const Policy& policy, task::BlocksEnv& env, const physics::WorldState& start,
                           bool deterministic, Rng& rng, physics::TraceWriter* trace, int episode) {
    EpisodeOutcome out;
    task::Observation obs = env.reset(start);
    if (trace) {
        trace->header({env.params(), task::to_string(env.kind()), episode});
        trace->record({0, env.state(), std::nullopt, env.contacts()});
    }
    while (!env.done()) {
        const physics::Action a = policy.act(env.state(), obs, deterministic, rng).clipped();
        const auto r = env.step(a);
        out.total_return += r.reward;
        ++out.steps;
        if (trace) trace->record({out.steps, env.state(), a, env.contacts()});
        obs = r.obs;
    }
    out.status = env.progress().status;
    return out;
}

namespace {

template <class Draw>
EvalResult run_many(const Policy& policy, int n, bool deterministic, Rng& rng, const EvalSetup& setup, Draw draw) {
    if (n < 1) throw DomainError("evaluate: n must be >= 1");
    task::BlocksEnv env(setup.spawn.kind, setup.physics, setup.horizon);
    std::optional<physics::TraceWriter> writer;
    if (setup.trace) writer.emplace(*setup.trace);
    EvalResult res;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const physics::WorldState start = draw();
        const auto o = run_episode(policy, env, start, deterministic, rng, writer ? &*writer : nullptr, i);
        ++res.episodes;
        res.successes += o.status == task::Status::Success;
        res.failures += o.status == task::Status::Failure;
        total += o.total_return;
    }
    res.mean_return = total / n;
    return res;
}

} // namespace

EvalResult evaluate(const Policy& policy, const curriculum::CurriculumLevel& level, EvalMode mode, int n, Rng& rng,
                    const EvalSetup& setup) {
    return run_many(policy, n, mode != EvalMode::Train, rng, setup,
                    [&] { return curriculum::sample_scene(level, setup.spawn, rng); });
}

EvalResult challenge_eval(const Policy& policy, int n, Rng& rng, const EvalSetup& setup) {
    return run_many(policy, n, true, rng, setup,
                    [&] { return curriculum::challenge_scene(setup.spawn, rng); });
}

} // namespace blockbench::harness
