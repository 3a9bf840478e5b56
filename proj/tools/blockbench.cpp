// blockbench command-line interface: train, eval, replay, gradcheck.
//
// Exit codes: 0 ok, 2 configuration or usage error, 3 run failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>

#include "blockbench/agents/checkpoint.hpp"
#include "blockbench/harness/replay.hpp"
#include "blockbench/harness/selfcheck.hpp"
#include "blockbench/harness/train.hpp"

namespace bb = blockbench;
using bb::harness::TrainConfig;

namespace {

constexpr int kOk = 0;
constexpr int kConfigExit = 2;
constexpr int kRunExit = 3;

struct TrainArgs {
    std::string env;
    std::string algo;
    int epochs = -1;
    long long seed = -1;
    int workers = 0;
    std::string config;
    std::string out_dir = "run";
    std::string expert;
    std::vector<std::string> settings;
    bool quiet = false;
};

struct EvalArgs {
    std::string checkpoint;
    std::string policy;
    std::string config;
    std::string env;
    std::string mode = "finals";
    int level = -1;
    int episodes = 500;
    bool challenge = false;
    unsigned long long seed = 0;
    std::string trace;
    std::vector<std::string> settings;
};

bb::harness::KeyValues parse_settings(const std::vector<std::string>& items) {
    bb::harness::KeyValues kv;
    for (const auto& s : items) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw bb::ConfigError("--set expects key=value, got '" + s + "'");
        kv[s.substr(0, eq)] = s.substr(eq + 1);
    }
    return kv;
}

int run_train(const TrainArgs& a) {
    TrainConfig cfg;
    if (!a.config.empty()) bb::harness::apply_settings(cfg, bb::harness::read_config_file(a.config));
    bb::harness::KeyValues kv = parse_settings(a.settings);
    if (!a.env.empty()) kv["run.env"] = a.env;
    if (!a.algo.empty()) kv["run.algo"] = a.algo;
    if (a.epochs >= 0) kv["train.epochs"] = std::to_string(a.epochs);
    if (a.seed >= 0) kv["train.seed"] = std::to_string(a.seed);
    if (a.workers > 0) kv["train.workers"] = std::to_string(a.workers);
    if (!a.expert.empty()) {
        if (a.expert == "scripted") {
            kv["imitation.expert"] = "scripted";
        } else {
            kv["imitation.expert"] = "trained";
            kv["imitation.expert_path"] = a.expert;
        }
    }
    bb::harness::apply_settings(cfg, kv);

    bb::harness::TrainOptions opts;
    opts.out_dir = a.out_dir;
    if (!a.quiet)
        opts.on_epoch = [](const bb::harness::EpochStats& s) {
            std::cerr << "epoch " << s.epoch << " level " << s.level << " train " << s.train_rate << " test "
                      << s.test_rate << " finals " << s.finals_rate << " (" << s.seconds << " s)\n";
        };
    const auto result = bb::harness::train(cfg, opts);
    const auto& sum = result.log.summary;
    std::cout << "status=" << sum.status << " epochs=" << sum.epochs_run << " episodes=" << sum.total_episodes
              << " batches=" << sum.total_batches << " final_level=" << sum.final_level
              << " best_finals=" << sum.best_finals_rate << " out=" << a.out_dir << "\n";
    if (result.aborted()) {
        std::cerr << "run aborted: " << sum.diagnostic << "\n";
        return kRunExit;
    }
    return kOk;
}

int run_eval(const EvalArgs& a) {
    if ((a.checkpoint.empty()) == (a.policy.empty()))
        throw bb::ConfigError("eval needs exactly one of --checkpoint or --policy");
    if (a.episodes < 1) throw bb::ConfigError("--episodes must be >= 1");

    std::optional<bb::agents::LoadedCheckpoint> loaded;
    TrainConfig cfg;
    if (!a.checkpoint.empty()) {
        loaded = bb::agents::load_checkpoint(std::filesystem::path(a.checkpoint));
        cfg = bb::harness::config_from_key_values(loaded->metadata);
    }
    if (!a.config.empty()) bb::harness::apply_settings(cfg, bb::harness::read_config_file(a.config));
    bb::harness::apply_settings(cfg, parse_settings(a.settings));
    if (!a.env.empty()) cfg.env = bb::task::env_kind_from_string(a.env);
    cfg.validate();

    const auto env_layout = bb::task::ObservationLayout::for_kind(cfg.env);
    std::unique_ptr<bb::imitation::ExpertPolicy> expert;
    std::unique_ptr<bb::harness::Policy> policy;
    if (loaded) {
        if (auto* d = std::get_if<bb::agents::DdpgAgent>(&loaded->agent)) {
            if (d->layout() == env_layout) {
                policy = std::make_unique<bb::harness::DdpgPolicy>(*d);
            } else {
                // A two-block agent acting on the grey-filtered view of a three-block scene.
                expert = std::make_unique<bb::imitation::TrainedExpert>(*d);
                policy = std::make_unique<bb::harness::ExpertAsPolicy>(*expert);
            }
        } else {
            const auto& p = std::get<bb::agents::PggdAgent>(loaded->agent);
            if (!(p.layout() == env_layout))
                throw bb::ConfigError("checkpoint layout " + p.layout().describe() + " does not match " +
                                      env_layout.describe());
            policy = std::make_unique<bb::harness::PggdPolicy>(p);
        }
    } else if (a.policy == "scripted") {
        expert = std::make_unique<bb::imitation::ScriptedExpert>(cfg.physics);
        policy = std::make_unique<bb::harness::ExpertAsPolicy>(*expert);
    } else if (a.policy == "random") {
        policy = std::make_unique<bb::harness::RandomPolicy>();
    } else if (a.policy == "still") {
        policy = std::make_unique<bb::harness::StillPolicy>();
    } else {
        throw bb::ConfigError("unknown --policy '" + a.policy + "' (expected scripted, random or still)");
    }

    const auto& levels = cfg.schedule.levels;
    bb::curriculum::CurriculumLevel level = cfg.schedule.max_level();
    if (a.level >= 0) {
        if (a.level >= static_cast<int>(levels.size()))
            throw bb::ConfigError("--level " + std::to_string(a.level) + " out of range (schedule has " +
                                  std::to_string(levels.size()) + " levels)");
        level = levels[static_cast<std::size_t>(a.level)];
    }

    std::ofstream trace_file;
    bb::harness::EvalSetup setup{cfg.spawn(), cfg.physics, cfg.horizon, nullptr};
    if (!a.trace.empty()) {
        trace_file.open(a.trace);
        if (!trace_file) throw bb::RunError("cannot open trace file " + a.trace);
        setup.trace = &trace_file;
    }
    bb::Rng rng(a.seed);
    const auto mode = bb::harness::eval_mode_from_string(a.mode);
    const auto res = a.challenge ? bb::harness::challenge_eval(*policy, a.episodes, rng, setup)
                                 : bb::harness::evaluate(*policy, level, mode, a.episodes, rng, setup);
    std::cout << "policy=" << policy->name() << " env=" << bb::task::to_string(cfg.env)
              << " mode=" << (a.challenge ? "challenge" : a.mode) << " level=" << level.index
              << " episodes=" << res.episodes << " successes=" << res.successes << " failures=" << res.failures
              << " success_rate=" << res.rate() << "\n";
    return kOk;
}

int run_replay(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw bb::RunError("cannot open trace " + path);
    const auto episodes = bb::physics::read_trace(in);
    const auto report = bb::harness::replay(episodes, [](const bb::harness::ReplayStep& s) {
        const bb::physics::TraceRecord rec{s.step, s.simulated, std::nullopt, {}};
        auto j = nlohmann::json::parse(bb::physics::to_json_line(rec));
        j["episode"] = s.episode;
        j["match"] = s.match;
        std::cout << j.dump() << '\n';
    });
    std::cerr << "replayed " << report.episodes << " episodes, " << report.steps << " steps, " << report.mismatches
              << " mismatches" << (report.ok() ? "" : " (first at " + report.first_mismatch + ")") << "\n";
    return report.ok() ? kOk : kRunExit;
}

int run_gradcheck(bool quick) {
    bb::Rng rng(12345);
    bool ok = true;
    for (const auto& r : bb::harness::check_agent_networks(quick, rng)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " checked=" << r.checked << " skipped=" << r.skipped
                  << " max_rel_err=" << r.max_relative_error << "\n";
        ok = ok && r.passed;
    }
    return ok ? kOk : kRunExit;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"blockbench: block-pushing RL tasks with curriculum and imitation"};
    app.require_subcommand(1);

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "Train an agent; writes runlog.json, metrics.csv and checkpoints");
    train->add_option("--env", ta.env, "blocks-touch or blocks-choose");
    train->add_option("--algo", ta.algo, "ddpg, pggd or pggd-aggrevated");
    train->add_option("--epochs", ta.epochs, "Epoch limit");
    train->add_option("--seed", ta.seed, "Random seed");
    train->add_option("--workers", ta.workers, "Rollout workers");
    train->add_option("--config", ta.config, "key = value config file");
    train->add_option("--out-dir", ta.out_dir, "Output directory")->capture_default_str();
    train->add_option("--expert", ta.expert, "'scripted' or a two-block DDPG checkpoint (pggd-aggrevated)");
    train->add_option("--set", ta.settings, "Override a config key: --set key=value");
    train->add_flag("--quiet", ta.quiet, "No per-epoch progress on stderr");

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint or a built-in policy");
    eval->add_option("--checkpoint", ea.checkpoint, "Checkpoint file");
    eval->add_option("--policy", ea.policy, "Built-in policy: scripted, random or still");
    eval->add_option("--config", ea.config, "key = value config file (applied after checkpoint metadata)");
    eval->add_option("--env", ea.env, "Override the environment");
    eval->add_option("--mode", ea.mode, "train, test or finals")->capture_default_str();
    eval->add_option("--level", ea.level, "Curriculum level index (default: last)");
    eval->add_option("--episodes", ea.episodes, "Episodes")->capture_default_str();
    eval->add_flag("--challenge", ea.challenge, "Challenge scenes (blocks-choose)");
    eval->add_option("--seed", ea.seed, "Random seed")->capture_default_str();
    eval->add_option("--trace", ea.trace, "Write NDJSON traces of every episode");
    eval->add_option("--set", ea.settings, "Override a config key: --set key=value");

    std::string trace_path;
    auto* rep = app.add_subcommand("replay", "Re-simulate a trace; prints per-step JSON");
    rep->add_option("--trace", trace_path, "NDJSON trace")->required();

    bool quick = false;
    auto* grad = app.add_subcommand("gradcheck", "Finite-difference checks of every network architecture");
    grad->add_flag("--quick", quick, "Sample parameters on every architecture");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kConfigExit;
    }

    try {
        if (*train) return run_train(ta);
        if (*eval) return run_eval(ea);
        if (*rep) return run_replay(trace_path);
        if (*grad) return run_gradcheck(quick);
    } catch (const bb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigExit;
    } catch (const bb::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRunExit;
    } catch (const std::exception& e) {
        std::cerr << "run failure: " << e.what() << "\n";
        return kRunExit;
    }
    return kOk;
}
