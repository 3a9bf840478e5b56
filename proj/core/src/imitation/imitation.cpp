#include "blockbench/imitation/imitation.hpp"

#include <cmath>

namespace blockbench::imitation {

using physics::Action;
using physics::Vec3;

double beta(double epoch, double beta0, double t0) {
    if (!(t0 > 0.0)) throw DomainError("beta: t0 must be > 0");
    return beta0 + (1.0 - beta0) * std::exp(-epoch / t0);
}

namespace {

// Planar displacement request -> action at full speed, or less when close.
Action steer(Vec3 from, Vec3 to, double step) {
    double dx = to.x - from.x;
    double dy = to.y - from.y;
    const double len = std::hypot(dx, dy);
    if (len > step) {
        dx *= step / len;
        dy *= step / len;
    }
    Action a;
    a.values = {dx / step, dy / step, 0.0, 0.0};
    return a.clipped();
}

} // namespace

Action scripted_expert_act(const physics::WorldState& state, const physics::PhysicsParams& params) {
    const physics::BlockBody* blue = nullptr;
    const physics::BlockBody* green = nullptr;
    for (const auto& b : state.blocks) {
        if (!blue && b.color == physics::Color::Blue) blue = &b;
        if (!green && b.color == physics::Color::Green) green = &b;
    }
    if (!blue || !green) return {};

    const double sep = physics::planar_distance(blue->pos, green->pos);
    if (sep < 1e-9) return {};

    const double step = params.v_max * params.dt;
    const Vec3 e = state.effector.pos;
    const Vec3 b = blue->pos;
    const double ux = (green->pos.x - b.x) / sep;
    const double uy = (green->pos.y - b.y) / sep;
    const double px = -uy;
    const double py = ux;

    const double reach = blue->radius + state.effector.radius;
    const double standoff = reach + 0.01;
    const double rx = e.x - b.x;
    const double ry = e.y - b.y;
    const double along = rx * ux + ry * uy;
    const double lat = rx * px + ry * py;
    const double side = lat >= 0.0 ? 1.0 : -1.0;

    auto point = [&](double a, double l) { return Vec3{b.x + a * ux + l * px, b.y + a * uy + l * py, e.z}; };

    if (along < -0.5 * reach) {
        if (std::abs(lat) <= 0.2 * blue->radius) return steer(e, point(0.05, 0.0), step);
        return steer(e, point(-standoff, 0.0), step);
    }
    // In front of or beside the block: clear it sideways, then drop back.
    if (std::abs(lat) < standoff) return steer(e, point(along, side * 1.2 * standoff), step);
    return steer(e, point(-standoff, side * std::max(std::abs(lat), standoff)), step);
}

Action ScriptedExpert::act(const physics::WorldState& state, const task::Observation&) const {
    return scripted_expert_act(state, params_);
}

TrainedExpert::TrainedExpert(agents::DdpgAgent agent) : agent_(std::move(agent)) {
    if (agent_.layout().grey_range())
        throw ConfigError("trained expert must be a grey-free (two-block) policy, got layout " +
                          agent_.layout().describe());
}

Action TrainedExpert::act(const physics::WorldState&, const task::Observation& obs) const {
    const task::Observation view = task::filter_grey(obs);
    Rng unused(0);
    return agent_.act(view.values, false, unused);
}

std::optional<double> TrainedExpert::advantage(const task::Observation& obs, const Action& action) const {
    const task::Observation view = task::filter_grey(obs);
    Rng unused(0);
    const Action best = agent_.act(view.values, false, unused);
    nn::Matrix s(view.values.size(), 2);
    s.col(0) = Eigen::Map<const nn::Vector>(view.values.data(), static_cast<Eigen::Index>(view.values.size()));
    s.col(1) = s.col(0);
    nn::Matrix a(agents::kActionDim, 2);
    for (int i = 0; i < agents::kActionDim; ++i) {
        a(i, 0) = action.clipped().values[static_cast<std::size_t>(i)];
        a(i, 1) = best.values[static_cast<std::size_t>(i)];
    }
    const nn::Vector q = agent_.q_values(s, a);
    return q(0) - q(1);
}

MixingGranularity granularity_from_string(const std::string& s) {
    if (s == "episode") return MixingGranularity::Episode;
    if (s == "step") return MixingGranularity::Step;
    throw ConfigError("unknown mixing granularity '" + s + "' (expected episode or step)");
}

const char* to_string(MixingGranularity g) { return g == MixingGranularity::Episode ? "episode" : "step"; }

RollInEpisode roll_in(const MixedPolicy& mixed, task::BlocksEnv& env, const physics::WorldState& start, Rng& rng) {
    if (!mixed.learner || !mixed.expert) throw DomainError("roll_in: learner and expert are required");
    const double b = mixed.current_beta();
    RollInEpisode ep;

    task::Observation obs = env.reset(start);
    bool expert_turn = bernoulli(rng, b);
    ep.expert_controlled = expert_turn;
    std::vector<double> rewards;

    while (!env.done()) {
        if (mixed.granularity == MixingGranularity::Step && !ep.steps.empty()) expert_turn = bernoulli(rng, b);

        ControlledStep cs;
        cs.expert_action = mixed.expert->act(env.state(), obs);
        Action executed;
        if (expert_turn) {
            cs.controller = Controller::Expert;
            executed = cs.expert_action;
        } else {
            cs.controller = Controller::Learner;
            const auto la = mixed.learner->act(obs.values, agents::PolicyMode::Train, rng);
            cs.learner_raw_action = la.raw;
            cs.behavior_log_prob = la.log_prob;
            executed = la.action;
            if (mixed.expert_critic_advantage) cs.expert_advantage = mixed.expert->advantage(obs, executed);
        }

        const auto r = env.step(executed);
        cs.transition = {obs.values, executed, r.reward, r.obs.values, r.terminal};
        rewards.push_back(r.reward);
        ep.total_return += r.reward;
        ep.steps.push_back(std::move(cs));
        obs = r.obs;
    }
    ep.status = env.progress().status;

    const auto rtg = agents::rewards_to_go(rewards, mixed.learner->config().gamma);
    for (std::size_t i = 0; i < ep.steps.size(); ++i) ep.steps[i].ret = rtg[i];
    return ep;
}

AggrevatedStats aggrevated_update(MixedPolicy& mixed, const std::vector<const ControlledStep*>& batch) {
    if (!mixed.learner) throw DomainError("aggrevated_update: learner is required");
    auto& learner = *mixed.learner;
    AggrevatedStats stats;
    stats.beta = mixed.current_beta();
    if (batch.empty()) {
        stats.applied = false;
        return stats;
    }

    std::vector<std::span<const double>> obs;
    std::vector<nn::Vector> targets;
    obs.reserve(batch.size());
    targets.reserve(batch.size());
    for (const auto* s : batch) {
        obs.emplace_back(s->transition.obs);
        nn::Vector t(agents::kActionDim);
        for (int i = 0; i < agents::kActionDim; ++i) t(i) = s->expert_action.values[static_cast<std::size_t>(i)];
        targets.push_back(std::move(t));
    }
    auto [grads, sup_loss] = learner.supervision_gradient(obs, targets);
    stats.supervision_loss = sup_loss;
    grads *= stats.beta;

    std::vector<agents::PggdSample> samples;
    bool use_expert_adv = mixed.expert_critic_advantage;
    for (const auto* s : batch) {
        if (s->controller != Controller::Learner) continue;
        if (use_expert_adv && !s->expert_advantage) use_expert_adv = false;
        samples.push_back({s->transition.obs, *s->learner_raw_action, s->ret, *s->behavior_log_prob});
    }
    if (use_expert_adv) {
        std::size_t k = 0;
        for (const auto* s : batch)
            if (s->controller == Controller::Learner) samples[k++].ret = *s->expert_advantage;
    }
    stats.learner_steps = static_cast<int>(samples.size());

    if (!samples.empty() && stats.beta < 1.0) {
        std::vector<const agents::PggdSample*> ptrs;
        for (const auto& s : samples) ptrs.push_back(&s);
        auto pg = learner.policy_gradient(ptrs);
        stats.pg_loss = pg.loss;
        pg.grads *= 1.0 - stats.beta;
        grads += pg.grads;
    }

    if (!std::isfinite(stats.supervision_loss) || !std::isfinite(stats.pg_loss)) {
        stats.applied = false;
        return stats;
    }
    stats.applied = learner.apply(grads);
    return stats;
}

} // namespace blockbench::imitation
