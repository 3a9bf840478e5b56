#include <benchmark/benchmark.h>

#include "blockbench/agents/ddpg.hpp"
#include "blockbench/agents/replay.hpp"
#include "blockbench/curriculum/curriculum.hpp"
#include "blockbench/physics/world.hpp"

using namespace blockbench;

namespace {

physics::Action random_action(Rng& rng) {
    physics::Action a;
    for (auto& v : a.values) v = uniform(rng, -1.0, 1.0);
    return a;
}

void BM_StepWorld(benchmark::State& state) {
    Rng rng(1);
    const physics::PhysicsParams p;
    const curriculum::SpawnSpec spec{task::EnvKind::BlocksChoose, {}};
    auto s = curriculum::sample_scene({0, 0.2, 0.0}, spec, rng);
    const auto start = s;
    for (auto _ : state) {
        s = physics::step_world(s, random_action(rng), p);
        if (s.step_count >= 50) s = start;
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_StepWorld);

void BM_MlpForwardBackward(benchmark::State& state) {
    const int width = static_cast<int>(state.range(0));
    const int batch = static_cast<int>(state.range(1));
    Rng rng(2);
    const nn::Mlp net({48, width, width, width, 1}, nn::OutputActivation::Identity, rng);
    const nn::Matrix x = nn::Matrix::Random(48, batch);
    const nn::Matrix g = nn::Matrix::Ones(1, batch);
    for (auto _ : state) {
        nn::ForwardCache cache;
        net.forward(x, &cache);
        auto grads = net.backward(cache, g);
        benchmark::DoNotOptimize(grads);
    }
}
BENCHMARK(BM_MlpForwardBackward)->Args({64, 128})->Args({256, 256});

void BM_DdpgUpdate(benchmark::State& state) {
    const int width = static_cast<int>(state.range(0));
    Rng rng(3);
    const auto layout = task::ObservationLayout::for_kind(task::EnvKind::BlocksChoose);
    agents::DdpgConfig cfg;
    cfg.hidden = std::vector<int>(width > 64 ? 3 : 2, width);
    agents::DdpgAgent agent(layout, cfg, rng);
    agents::ReplayBuffer<agents::Transition> buffer(4096);
    for (int i = 0; i < 4096; ++i) {
        agents::Transition t;
        t.obs.resize(static_cast<std::size_t>(layout.size()));
        t.next_obs.resize(t.obs.size());
        for (auto& v : t.obs) v = standard_normal(rng);
        for (auto& v : t.next_obs) v = standard_normal(rng);
        t.action = random_action(rng);
        buffer.push(std::move(t));
    }
    const auto batch_size = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(agent.update(buffer.sample(batch_size, rng)));
}
BENCHMARK(BM_DdpgUpdate)->Args({64, 128})->Args({256, 256})->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
