#include <gtest/gtest.h>

#include <cmath>

#include "blockbench/curriculum/curriculum.hpp"
#include "blockbench/imitation/imitation.hpp"
#include "support.hpp"

using namespace blockbench;
using namespace blockbench::imitation;
using blockbench::testing::block;
using blockbench::testing::scene;

namespace {

const auto kChoose = task::ObservationLayout::for_kind(task::EnvKind::BlocksChoose);
const auto kTouch = task::ObservationLayout::for_kind(task::EnvKind::BlocksTouch);

agents::PggdConfig small_pggd() {
    agents::PggdConfig c;
    c.hidden = {32, 32};
    c.learning_rate = 1e-3;
    return c;
}

physics::WorldState choose_start(Rng& rng) {
    curriculum::SpawnSpec spec{task::EnvKind::BlocksChoose, {}};
    return curriculum::sample_scene({0, 0.15, 0.0}, spec, rng);
}

class ConstantExpert final : public ExpertPolicy {
public:
    physics::Action act(const physics::WorldState&, const task::Observation&) const override {
        return blockbench::testing::action(0.5, -0.25);
    }
    std::string name() const override { return "constant"; }
};

} // namespace

TEST(Beta, ClosedFormExamples) {
    EXPECT_EQ(beta(0, 0.0, 50.0), 1.0);
    EXPECT_NEAR(beta(50, 0.0, 50.0), std::exp(-1.0), 1e-15);
    EXPECT_EQ(beta(17, 1.0, 50.0), 1.0);
    EXPECT_NEAR(beta(100, 0.2, 50.0), 0.2 + 0.8 * std::exp(-2.0), 1e-15);
    EXPECT_THROW(beta(1, 0.0, 0.0), DomainError);
}

TEST(Beta, MonotoneAndBounded) {
    double prev = 2.0;
    for (int t = 0; t <= 1000; ++t) {
        const double b = beta(t, 0.1, 50.0);
        ASSERT_LE(b, prev);
        ASSERT_GE(b, 0.1);
        ASSERT_LE(b, 1.0);
        prev = b;
    }
}

TEST(ScriptedExpert, PushesTowardGreenFromBehindBlue) {
    const auto s = scene(-0.1, 0.0,
                         {block(curriculum::kGreenId, physics::Color::Green, 0.2, 0.0),
                          block(curriculum::kBlueId, physics::Color::Blue, 0.1, 0.0)});
    const auto a = scripted_expert_act(s, {});
    EXPECT_GT(a.values[0], 0.0);
    EXPECT_NEAR(a.values[1], 0.0, 1e-12);
    for (double v : a.values) EXPECT_LE(std::abs(v), 1.0);
}

TEST(ScriptedExpert, IgnoresGreyBlock) {
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        auto s = choose_start(rng);
        const auto a = scripted_expert_act(s, {});
        for (auto& b : s.blocks)
            if (b.color == physics::Color::Grey) b.pos = {uniform(rng, -0.2, 0.2), uniform(rng, -0.3, 0.3), b.pos.z};
        ASSERT_EQ(scripted_expert_act(s, {}).values, a.values);
    }
}

TEST(ScriptedExpert, CoincidentBlocksGiveZeroAction) {
    const auto s = scene(0.0, 0.0,
                         {block(curriculum::kGreenId, physics::Color::Green, 0.1, 0.1),
                          block(curriculum::kBlueId, physics::Color::Blue, 0.1, 0.1)});
    EXPECT_EQ(scripted_expert_act(s, {}).values, physics::Action{}.values);
}

TEST(TrainedExpert, BlindToGreyEntries) {
    Rng rng(2);
    agents::DdpgConfig cfg;
    cfg.hidden = {16};
    cfg.actor_final_scale = 1.0;
    TrainedExpert expert(agents::DdpgAgent(kTouch, cfg, rng));
    for (int i = 0; i < 50; ++i) {
        const auto s = choose_start(rng);
        auto obs = task::encode_observation(s, task::EnvKind::BlocksChoose);
        const auto a = expert.act(s, obs);
        const auto adv = expert.advantage(obs, a);
        const auto [lo, hi] = *obs.layout.grey_range();
        for (int k = lo; k < hi; ++k) obs.values[static_cast<std::size_t>(k)] = standard_normal(rng) * 10.0;
        ASSERT_EQ(expert.act(s, obs).values, a.values);
        ASSERT_EQ(*expert.advantage(obs, a), *adv);
        // Its own greedy action has zero advantage.
        ASSERT_NEAR(*adv, 0.0, 1e-12);
    }
}

TEST(TrainedExpert, RejectsThreeBlockAgent) {
    Rng rng(3);
    agents::DdpgConfig cfg;
    cfg.hidden = {8};
    EXPECT_THROW(TrainedExpert(agents::DdpgAgent(kChoose, cfg, rng)), ConfigError);
}

TEST(RollIn, BetaOneIsAllExpertBetaZeroAllLearner) {
    Rng rng(4);
    agents::PggdAgent learner(kChoose, small_pggd(), rng);
    ScriptedExpert expert({});
    task::BlocksEnv env(task::EnvKind::BlocksChoose, {}, 50);

    MixedPolicy all_expert{&learner, &expert, 1.0, 50.0, 10};
    MixedPolicy all_learner{&learner, &expert, 0.0, 1e-9, 10};
    for (auto g : {MixingGranularity::Episode, MixingGranularity::Step}) {
        all_expert.granularity = g;
        all_learner.granularity = g;
        for (int i = 0; i < 10; ++i) {
            const auto start = choose_start(rng);
            for (const auto& st : roll_in(all_expert, env, start, rng).steps) {
                ASSERT_EQ(st.controller, Controller::Expert);
                ASSERT_EQ(st.transition.action.values, st.expert_action.values);
            }
            for (const auto& st : roll_in(all_learner, env, start, rng).steps) {
                ASSERT_EQ(st.controller, Controller::Learner);
                ASSERT_TRUE(st.learner_raw_action && st.behavior_log_prob);
            }
        }
    }
}

TEST(RollIn, HalfBetaSelectsExpertAboutHalfTheEpisodes) {
    Rng rng(5);
    agents::PggdAgent learner(kChoose, small_pggd(), rng);
    ConstantExpert expert;
    task::BlocksEnv env(task::EnvKind::BlocksChoose, {}, 5);
    // beta0 = 0 and epoch = t0 * ln 2 gives beta = 0.5.
    MixedPolicy mixed{&learner, &expert, 0.0, 1.0 / std::log(2.0), 1};
    ASSERT_NEAR(mixed.current_beta(), 0.5, 1e-12);
    const auto start = choose_start(rng);
    int expert_eps = 0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        const auto ep = roll_in(mixed, env, start, rng);
        expert_eps += ep.expert_controlled;
        for (const auto& st : ep.steps)
            ASSERT_EQ(st.controller == Controller::Expert, ep.expert_controlled);
    }
    // sd = sqrt(2000 * 0.25) ~ 22.4; allow 5 sd.
    EXPECT_NEAR(expert_eps, n / 2, 112);
}

TEST(RollIn, ReturnsToGoAndTerminalFlags) {
    Rng rng(6);
    agents::PggdAgent learner(kChoose, small_pggd(), rng);
    ScriptedExpert expert({});
    task::BlocksEnv env(task::EnvKind::BlocksChoose, {}, 50);
    MixedPolicy mixed{&learner, &expert, 1.0, 50.0, 0};
    int successes = 0;
    for (int i = 0; i < 20; ++i) {
        const auto ep = roll_in(mixed, env, choose_start(rng), rng);
        ASSERT_FALSE(ep.steps.empty());
        std::vector<double> rewards;
        for (const auto& st : ep.steps) rewards.push_back(st.transition.reward);
        const auto rtg = agents::rewards_to_go(rewards, learner.config().gamma);
        for (std::size_t k = 0; k < rtg.size(); ++k) ASSERT_EQ(ep.steps[k].ret, rtg[k]);
        for (std::size_t k = 0; k + 1 < ep.steps.size(); ++k) ASSERT_FALSE(ep.steps[k].transition.done);
        successes += ep.status == task::Status::Success;
        if (ep.status != task::Status::Ongoing) ASSERT_TRUE(ep.steps.back().transition.done);
    }
    EXPECT_GT(successes, 10);
}

TEST(Aggrevated, SupervisionLossDecreasesAndConverges) {
    Rng rng(7);
    agents::PggdAgent learner(kChoose, small_pggd(), rng);
    ConstantExpert expert;
    task::BlocksEnv env(task::EnvKind::BlocksChoose, {}, 20);
    MixedPolicy mixed{&learner, &expert, 1.0, 50.0, 0};
    std::vector<ControlledStep> data;
    for (int i = 0; i < 5; ++i)
        for (auto& st : roll_in(mixed, env, choose_start(rng), rng).steps) data.push_back(std::move(st));
    std::vector<const ControlledStep*> batch;
    for (const auto& st : data) batch.push_back(&st);

    const double first = aggrevated_update(mixed, batch).supervision_loss;
    double last = first;
    for (int i = 0; i < 1500; ++i) last = aggrevated_update(mixed, batch).supervision_loss;
    EXPECT_LT(last, first);
    EXPECT_LT(last, 1e-3);
    const auto [mean, sd] = learner.distribution(data.front().transition.obs);
    EXPECT_NEAR(mean(0), 0.5, 0.05);
    EXPECT_NEAR(mean(1), -0.25, 0.05);
}

TEST(Aggrevated, BetaOneIgnoresReinforcementTerm) {
    Rng rng(8);
    agents::PggdAgent a(kChoose, small_pggd(), rng);
    agents::PggdAgent b = a;
    ConstantExpert expert;
    task::BlocksEnv env(task::EnvKind::BlocksChoose, {}, 10);
    MixedPolicy roll{&a, &expert, 0.0, 1e-9, 5};
    std::vector<ControlledStep> data;
    for (auto& st : roll_in(roll, env, choose_start(rng), rng).steps) data.push_back(std::move(st));
    std::vector<const ControlledStep*> batch;
    for (const auto& st : data) batch.push_back(&st);
    for (std::size_t i = 0; i < data.size(); ++i) data[i].ret = static_cast<double>(i);

    MixedPolicy sup_a{&a, &expert, 1.0, 50.0, 0};
    aggrevated_update(sup_a, batch);
    for (auto& st : data) st.ret = 0.0;
    MixedPolicy sup_b{&b, &expert, 1.0, 50.0, 0};
    aggrevated_update(sup_b, batch);
    EXPECT_EQ(a.policy().flatten(), b.policy().flatten());
}
