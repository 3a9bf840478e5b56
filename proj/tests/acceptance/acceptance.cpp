// Acceptance gate: runs each criterion at its stated tolerance and prints one
// PASS/FAIL line per criterion. Exit status 0 only when every selected
// criterion passes.
//
//   blockbench_acceptance [--only 1,3,5] [--full] [--configs DIR]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "blockbench/agents/checkpoint.hpp"
#include "blockbench/curriculum/curriculum.hpp"
#include "blockbench/harness/config.hpp"
#include "blockbench/harness/evaluate.hpp"
#include "blockbench/harness/replay.hpp"
#include "blockbench/harness/selfcheck.hpp"
#include "blockbench/harness/train.hpp"
#include "blockbench/imitation/imitation.hpp"
#include "blockbench/physics/world.hpp"

using namespace blockbench;
using namespace blockbench::harness;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Options {
    std::set<int> only;
    bool full = false;
    fs::path configs = BLOCKBENCH_CONFIG_DIR;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

TrainConfig load_config(const Options& opt, const std::string& name, const KeyValues& overrides = {}) {
    TrainConfig c;
    apply_settings(c, read_config_file(opt.configs / name));
    apply_settings(c, overrides);
    c.validate();
    return c;
}

EvalSetup setup_of(const TrainConfig& c) { return {c.spawn(), c.physics, c.horizon}; }

void progress(const std::string& tag, const EpochStats& s) {
    std::cerr << "  [" << tag << "] epoch " << s.epoch << " level " << s.level << " train " << fmt(s.train_rate, 2)
              << " test " << fmt(s.test_rate, 2) << " finals " << fmt(s.finals_rate, 2) << " (" << fmt(s.seconds, 1)
              << " s)\n";
}

// 1. Gradient oracle.
Outcome gradient_oracle() {
    const auto t0 = Clock::now();
    Rng rng(2024);
    const auto results = check_agent_networks(false, rng);
    double worst = 0.0;
    std::size_t checked = 0;
    std::string failed;
    for (const auto& r : results) {
        worst = std::max(worst, r.max_relative_error);
        checked += r.checked;
        if (!r.passed) failed += " " + r.name;
    }
    const double secs = seconds_since(t0);
    const bool pass = failed.empty() && secs < 60.0;
    return {pass, std::to_string(results.size()) + " networks, " + std::to_string(checked) +
                      " coordinates, max rel err " + fmt(worst * 1e6, 2) + "e-6 (tol 1e-4), " + fmt(secs, 1) +
                      " s (limit 60)" + (failed.empty() ? "" : ", failed:" + failed)};
}

// 2. Physics properties over randomized steps.
Outcome physics_properties() {
    const auto t0 = Clock::now();
    Rng rng(77);
    const physics::PhysicsParams p;
    const curriculum::SpawnSpec spec{task::EnvKind::BlocksChoose, {}};
    const curriculum::CurriculumLevel level{0, 0.35, 0.0};
    long determinism = 0, penetration = 0, symmetry = 0, containment = 0;
    double worst_block_overlap = 0.0;
    int steps = 0;
    const int kSteps = 10'000;
    while (steps < kSteps) {
        physics::WorldState s = curriculum::sample_scene(level, spec, rng);
        const auto ws = physics::workspace_of(s.table, p);
        for (int t = 0; t < 50 && steps < kSteps; ++t, ++steps) {
            physics::Action a;
            for (auto& v : a.values) v = uniform(rng, -1.0, 1.0);
            const auto next = physics::step_world(s, a, p);
            if (!bitwise_equal(next, physics::step_world(s, a, p))) ++determinism;

            if (!ws.contains(next.effector.pos, 1e-12)) ++containment;
            for (std::size_t i = 0; i < next.blocks.size(); ++i) {
                const auto& b = next.blocks[i];
                const auto& prev = s.blocks[i];
                if (b.on_table) {
                    if (!next.table.contains(b.pos)) ++containment;
                    if (physics::planar_distance(b.pos, next.effector.pos) < b.radius + next.effector.radius - 1e-9)
                        ++penetration;
                    for (std::size_t j = i + 1; j < next.blocks.size(); ++j) {
                        const auto& c = next.blocks[j];
                        if (!c.on_table) continue;
                        const double overlap = b.radius + c.radius - physics::planar_distance(b.pos, c.pos);
                        worst_block_overlap = std::max(worst_block_overlap, overlap);
                        if (overlap > 1e-9) ++penetration;
                    }
                } else if (!prev.on_table && !(b.pos == prev.pos)) {
                    ++containment;
                }
            }

            // Symmetry: the detected set equals the relation evaluated in both
            // argument orders, each pair once with a < b.
            const auto contacts = physics::detect_contacts(next, p.contact_margin);
            std::vector<std::pair<int, std::pair<physics::Vec3, double>>> ents{
                {physics::kEffectorId, {next.effector.pos, next.effector.radius}}};
            for (const auto& b : next.blocks)
                if (b.on_table) ents.push_back({b.id, {b.pos, b.radius}});
            std::set<physics::ContactPair> forward, backward;
            for (std::size_t i = 0; i < ents.size(); ++i)
                for (std::size_t j = 0; j < ents.size(); ++j) {
                    if (i == j) continue;
                    const double d = physics::planar_distance(ents[i].second.first, ents[j].second.first);
                    if (d > ents[i].second.second + ents[j].second.second + p.contact_margin) continue;
                    const int lo = std::min(ents[i].first, ents[j].first);
                    const int hi = std::max(ents[i].first, ents[j].first);
                    (i < j ? forward : backward).insert({lo, hi});
                }
            if (forward != backward || std::vector<physics::ContactPair>(forward.begin(), forward.end()) != contacts)
                ++symmetry;
            s = next;
        }
    }
    const double secs = seconds_since(t0);
    const long violations = determinism + penetration + symmetry + containment;
    return {violations == 0 && secs < 60.0,
            std::to_string(steps) + " steps, violations: determinism " + std::to_string(determinism) +
                ", interpenetration " + std::to_string(penetration) + ", contact symmetry " + std::to_string(symmetry) +
                ", containment " + std::to_string(containment) + "; worst block overlap " +
                fmt(worst_block_overlap * 1e3, 4) + " mm, " + fmt(secs, 1) + " s (limit 60)"};
}

// 3. Scripted expert solvability.
Outcome solvability() {
    const auto t0 = Clock::now();
    TrainConfig c;
    c.env = task::EnvKind::BlocksTouch;
    imitation::ScriptedExpert expert(c.physics);
    ExpertAsPolicy policy(expert);
    Rng rng(3);
    const auto low = evaluate(policy, c.schedule.levels.front(), EvalMode::Test, 500, rng, setup_of(c));
    const auto high = evaluate(policy, c.schedule.max_level(), EvalMode::Finals, 500, rng, setup_of(c));
    const double secs = seconds_since(t0);
    return {low.rate() >= 0.9 && high.rate() >= 0.6 && secs < 120.0,
            "lowest level " + fmt(low.rate()) + " (>= 0.9), max level " + fmt(high.rate()) + " (>= 0.6), 500 each, " +
                fmt(secs, 1) + " s (limit 120)"};
}

// 4. Random policy negative control.
Outcome negative_control() {
    TrainConfig c;
    c.env = task::EnvKind::BlocksTouch;
    Rng rng(4);
    const auto r = evaluate(RandomPolicy(), c.schedule.max_level(), EvalMode::Finals, 500, rng, setup_of(c));
    return {r.rate() <= 0.1, "finals " + fmt(r.rate()) + " over 500 (<= 0.1)"};
}

// 5. Curriculum trend. The smoke run's agent doubles as the trained 2-block
// expert for criterion 7.
struct TouchRun {
    std::optional<TrainResult> result;
    TrainConfig config;
    int first_pass_epoch = -1;
    double seconds = 0.0;
};

TouchRun run_touch(const Options& opt, bool full) {
    TouchRun run;
    if (full) {
        run.config = TrainConfig{};
        run.config.env = task::EnvKind::BlocksTouch;
        run.config.algorithm = Algorithm::Ddpg;
        run.config.workers = 4;
        run.config.epochs = 150;
        run.config.seed = 1;
        run.config.checkpoint_every = 0;
    } else {
        run.config = load_config(opt, "smoke-touch.cfg");
    }
    TrainOptions to;
    to.on_epoch = [&](const EpochStats& s) {
        progress(full ? "touch-full" : "touch-smoke", s);
        if (run.first_pass_epoch < 0 && s.finals_rate >= 0.7) run.first_pass_epoch = s.epoch + 1;
    };
    to.stop_when = [](const EpochStats& s) { return s.finals_rate >= 0.7; };
    const auto t0 = Clock::now();
    run.result = train(run.config, to);
    run.seconds = seconds_since(t0);
    return run;
}

Outcome curriculum_trend(const TouchRun& run, bool full) {
    const auto& log = run.result->log;
    const int limit = full ? 150 : 30;
    const double time_limit = full ? 1e300 : 20 * 60.0;
    double best = 0.0;
    for (const auto& e : log.epochs) best = std::max(best, e.finals_rate);
    const bool pass = !run.result->aborted() && run.first_pass_epoch > 0 && run.first_pass_epoch <= limit &&
                      run.seconds < time_limit;
    std::string detail = std::string(full ? "full run, " : "smoke variant, ") + std::to_string(run.config.workers) +
                         " workers: ";
    detail += run.first_pass_epoch > 0 ? "finals >= 0.70 at epoch " + std::to_string(run.first_pass_epoch)
                                       : "best finals " + fmt(best, 2) + " after " + std::to_string(log.epochs.size()) +
                                             " epochs";
    detail += " (limit " + std::to_string(limit) + "), " + fmt(run.seconds / 60.0, 1) + " min";
    if (!full) detail += " (limit 20)";
    if (run.result->aborted()) detail += ", aborted: " + log.summary.diagnostic;
    return {pass, detail};
}

// 6. Imitation kickstart.
int epochs_to_pass_level(const TrainConfig& c, int level, const std::string& tag) {
    int passed = -1;
    TrainOptions to;
    to.on_epoch = [&](const EpochStats& s) {
        progress(tag, s);
        const double rate = c.advance_on_test ? s.test_rate : s.train_rate;
        if (passed < 0 && s.level == level &&
            curriculum::advance(c.schedule.levels[static_cast<std::size_t>(s.level)], c.schedule, rate).index > level)
            passed = s.epoch + 1;
    };
    to.stop_when = [&](const EpochStats&) { return passed > 0; };
    const auto r = train(c, to);
    if (r.aborted()) throw RunError(tag + " aborted: " + r.log.summary.diagnostic);
    return passed;
}

Outcome imitation_kickstart(const Options& opt) {
    const auto t0 = Clock::now();
    int wins = 0;
    std::string detail;
    const int kLevel = 2;
    for (unsigned seed : {1u, 2u, 3u}) {
        const std::string s = std::to_string(seed);
        const auto plain_cfg = load_config(opt, "smoke-choose-pggd.cfg", {{"train.seed", s}});
        const auto imit_cfg =
            load_config(opt, "smoke-choose-pggd.cfg", {{"train.seed", s}, {"run.algo", "pggd-aggrevated"}});
        const int plain = epochs_to_pass_level(plain_cfg, kLevel, "pggd seed " + s);
        const int imit = epochs_to_pass_level(imit_cfg, kLevel, "pggd+aggrevated seed " + s);
        // A run that never passes counts as one epoch past its budget.
        const int plain_n = plain > 0 ? plain : plain_cfg.epochs + 1;
        const bool win = imit > 0 && 2 * imit <= plain_n;
        wins += win;
        detail += (detail.empty() ? "" : "; ") + std::string("seed ") + s + ": aggrevated " +
                  (imit > 0 ? std::to_string(imit) : ">" + std::to_string(imit_cfg.epochs)) + " vs pggd " +
                  (plain > 0 ? std::to_string(plain) : ">" + std::to_string(plain_cfg.epochs)) +
                  (win ? " (ok)" : " (not <= half)");
    }
    return {wins >= 2, "epochs to pass level " + std::to_string(kLevel) + ": " + detail + "; " +
                           std::to_string(wins) + "/3 pairs, " + fmt(seconds_since(t0) / 60.0, 1) + " min"};
}

// 7. Ordering of trained DDPG, the grey-blind expert and the scripted pusher.
Outcome ordering(const Options& opt, const TouchRun& touch) {
    const auto t0 = Clock::now();
    const auto cfg = load_config(opt, "smoke-choose-ddpg.cfg");
    TrainOptions to;
    to.on_epoch = [](const EpochStats& s) { progress("choose-ddpg", s); };
    const auto trained = train(cfg, to);
    if (trained.aborted()) return {false, "3-block DDPG aborted: " + trained.log.summary.diagnostic};

    const imitation::TrainedExpert blind(*touch.result->ddpg);
    const imitation::ScriptedExpert scripted(cfg.physics);
    const DdpgPolicy learner(*trained.ddpg);
    const ExpertAsPolicy blind_policy(blind);
    const ExpertAsPolicy scripted_policy(scripted);

    struct Row {
        std::string name;
        double normal;
        double challenge;
    };
    std::vector<Row> rows;
    for (const Policy* p : std::initializer_list<const Policy*>{&learner, &blind_policy, &scripted_policy}) {
        Rng r1(700);
        Rng r2(701);
        const auto normal = evaluate(*p, cfg.schedule.max_level(), EvalMode::Finals, 500, r1, setup_of(cfg));
        const auto challenge = challenge_eval(*p, 500, r2, setup_of(cfg));
        rows.push_back({p->name(), normal.rate(), challenge.rate()});
    }
    bool pass = rows[0].normal >= rows[1].normal && rows[0].challenge >= rows[1].challenge;
    std::string detail;
    for (const auto& r : rows) {
        pass = pass && r.challenge <= r.normal + 0.05;
        detail += (detail.empty() ? "" : "; ") + r.name + " normal " + fmt(r.normal) + " challenge " + fmt(r.challenge);
    }
    return {pass, "500 episodes each: " + detail + "; 3-block DDPG trained " +
                      std::to_string(trained.log.epochs.size()) + " epochs, " + fmt(seconds_since(t0) / 60.0, 1) +
                      " min"};
}

// 8. Teacher-forcing schedule.
Outcome beta_schedule() {
    double worst = 0.0;
    for (int t = 0; t <= 1000; ++t) {
        const double expected = 0.0 + (1.0 - 0.0) * std::exp(-static_cast<double>(t) / 50.0);
        worst = std::max(worst, std::abs(imitation::beta(t, 0.0, 50.0) - expected));
    }
    return {worst <= 1e-12, "max |beta - closed form| = " + fmt(worst * 1e12, 3) + "e-12 over epochs 0..1000"};
}

// 9. Accounting audit.
Outcome accounting() {
    TrainConfig c;
    c.env = task::EnvKind::BlocksTouch;
    c.epochs = 1;
    c.cycles = 50;
    c.batches = 40;
    c.rollouts = 2;
    c.workers = 1;
    c.seed = 9;
    c.checkpoint_every = 0;
    // Counts do not depend on network width; small networks keep this quick.
    c.ddpg.hidden = {64, 64};
    const auto r = train(c);
    const auto& s = r.log.summary;
    const bool pass = !r.aborted() && s.total_episodes == 100 && s.total_batches == 2000 &&
                      r.log.epochs.size() == 1 && r.log.epochs[0].episodes == 100 && r.log.epochs[0].batches == 2000;
    return {pass, "logged " + std::to_string(s.total_episodes) + " episodes (100) and " +
                      std::to_string(s.total_batches) + " batches (2000)"};
}

// 10. Checkpoint round trip and deterministic replay.
Outcome round_trip() {
    const auto dir = fs::temp_directory_path() / "blockbench_acceptance_c10";
    fs::remove_all(dir);
    TrainConfig c;
    c.env = task::EnvKind::BlocksTouch;
    c.epochs = 1;
    c.cycles = 10;
    c.batches = 10;
    c.seed = 10;
    c.checkpoint_every = 0;
    c.ddpg.hidden = {64, 64};
    TrainOptions to;
    to.out_dir = dir / "a";
    const auto a = train(c, to);
    to.out_dir = dir / "b";
    const auto b = train(c, to);
    if (a.aborted() || b.aborted()) return {false, "training aborted: " + a.log.summary.diagnostic};
    const bool same_log = a.log.to_json(false) == b.log.to_json(false);

    const auto loaded = agents::load_checkpoint(dir / "a" / "checkpoints" / "final.bbck");
    const auto& agent = std::get<agents::DdpgAgent>(loaded.agent);
    const bool same_params = agent.actor() == a.ddpg->actor() && agent.critic() == a.ddpg->critic() &&
                             agent.target_actor() == a.ddpg->target_actor() &&
                             agent.target_critic() == a.ddpg->target_critic() &&
                             agent.normalizer() == a.ddpg->normalizer();

    std::stringstream trace_a, trace_b;
    EvalSetup sa = setup_of(c);
    sa.trace = &trace_a;
    EvalSetup sb = setup_of(c);
    sb.trace = &trace_b;
    Rng r1(5), r2(5);
    const auto ea = evaluate(DdpgPolicy(*a.ddpg), c.schedule.max_level(), EvalMode::Finals, 20, r1, sa);
    const auto eb = evaluate(DdpgPolicy(agent), c.schedule.max_level(), EvalMode::Finals, 20, r2, sb);
    const bool same_eval = ea.successes == eb.successes && ea.mean_return == eb.mean_return &&
                           trace_a.str() == trace_b.str();
    const auto report = replay(physics::read_trace(trace_a));
    fs::remove_all(dir);
    const bool pass = same_log && same_params && same_eval && report.ok();
    return {pass, std::string("rerun log ") + (same_log ? "identical" : "differs") + ", checkpoint parameters " +
                      (same_params ? "identical" : "differ") + ", evaluation from checkpoint " +
                      (same_eval ? "identical" : "differs") + ", replay " + std::to_string(report.steps) +
                      " steps with " + std::to_string(report.mismatches) + " mismatches"};
}

std::set<int> parse_only(const std::string& s) {
    std::set<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.insert(std::stoi(item));
    return out;
}

} // namespace

int main(int argc, char** argv) {
    Options opt;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--full") {
            opt.full = true;
        } else if (arg == "--only" && i + 1 < argc) {
            opt.only = parse_only(argv[++i]);
        } else if (arg == "--configs" && i + 1 < argc) {
            opt.configs = argv[++i];
        } else {
            std::cerr << "usage: " << argv[0] << " [--only 1,2,...] [--full] [--configs DIR]\n";
            return 2;
        }
    }
    const auto selected = [&](int id) { return opt.only.empty() || opt.only.count(id) > 0; };

    std::optional<TouchRun> touch;
    const auto touch_run = [&]() -> const TouchRun& {
        if (!touch) touch = run_touch(opt, opt.full);
        return *touch;
    };

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"gradient-oracle", gradient_oracle},
        {"physics-properties", physics_properties},
        {"solvability-oracle", solvability},
        {"negative-control", negative_control},
        {"curriculum-trend", [&] { return curriculum_trend(touch_run(), opt.full); }},
        {"imitation-kickstart", [&] { return imitation_kickstart(opt); }},
        {"ordering", [&] {
             // The grey-blind expert is the smoke-trained 2-block agent.
             if (opt.full) {
                 Options smoke = opt;
                 smoke.full = false;
                 static const TouchRun expert = run_touch(smoke, false);
                 return ordering(opt, expert);
             }
             return ordering(opt, touch_run());
         }},
        {"beta-schedule", beta_schedule},
        {"accounting-audit", accounting},
        {"checkpoint-replay", round_trip},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected(id)) continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << "C" << id << " " << (o.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": " << o.detail
                  << " [" << fmt(seconds_since(t0), 1) << " s]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
