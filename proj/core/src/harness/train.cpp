#include "blockbench/harness/train.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <thread>

#include "blockbench/agents/checkpoint.hpp"

namespace blockbench::harness {

namespace {

using json = nlohmann::json;

Rng stream_rng(unsigned long long seed, unsigned long long stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), 0x62626eu};
    return Rng(seq);
}

constexpr unsigned long long kInitStream = 1;
constexpr unsigned long long kUpdateStream = 2;
constexpr unsigned long long kEvalStream = 3;

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

// What one worker gathered during a cycle.
struct Gathered {
    std::vector<agents::Transition> transitions;
    std::vector<agents::PggdSample> samples;
    std::vector<imitation::ControlledStep> steps;
    std::vector<std::vector<double>> observations;
    int episodes = 0;
    int successes = 0;
    double total_return = 0.0;
};

void note_episode(Gathered& g, task::Status status, double ret) {
    ++g.episodes;
    g.successes += status == task::Status::Success;
    g.total_return += ret;
}

void ddpg_episode(const agents::DdpgAgent& agent, task::BlocksEnv& env, const physics::WorldState& start, Rng& rng,
                  Gathered& g) {
    task::Observation obs = env.reset(start);
    g.observations.push_back(obs.values);
    double ret = 0.0;
    while (!env.done()) {
        const physics::Action a = agent.act(obs.values, true, rng);
        auto r = env.step(a);
        ret += r.reward;
        g.observations.push_back(r.obs.values);
        g.transitions.push_back({obs.values, a, r.reward, r.obs.values, r.terminal});
        obs = std::move(r.obs);
    }
    note_episode(g, env.progress().status, ret);
}

void pggd_episode(const agents::PggdAgent& agent, task::BlocksEnv& env, const physics::WorldState& start, Rng& rng,
                  Gathered& g) {
    task::Observation obs = env.reset(start);
    g.observations.push_back(obs.values);
    std::vector<double> rewards;
    const std::size_t first = g.samples.size();
    while (!env.done()) {
        const auto a = agent.act(obs.values, agents::PolicyMode::Train, rng);
        auto r = env.step(a.action);
        rewards.push_back(r.reward);
        g.observations.push_back(r.obs.values);
        g.samples.push_back({obs.values, a.raw, 0.0, a.log_prob});
        obs = std::move(r.obs);
    }
    const auto rtg = agents::rewards_to_go(rewards, agent.config().gamma);
    for (std::size_t i = 0; i < rtg.size(); ++i) g.samples[first + i].ret = rtg[i];
    double ret = 0.0;
    for (double r : rewards) ret += r;
    note_episode(g, env.progress().status, ret);
}

void mixed_episode(const imitation::MixedPolicy& mixed, task::BlocksEnv& env, const physics::WorldState& start,
                   Rng& rng, Gathered& g) {
    auto ep = imitation::roll_in(mixed, env, start, rng);
    if (!ep.steps.empty()) g.observations.push_back(ep.steps.front().transition.obs);
    for (auto& s : ep.steps) {
        g.observations.push_back(s.transition.next_obs);
        g.steps.push_back(std::move(s));
    }
    note_episode(g, ep.status, ep.total_return);
}

nn::Matrix stack_columns(const std::vector<std::vector<double>>& cols) {
    nn::Matrix m(static_cast<Eigen::Index>(cols.front().size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
        m.col(static_cast<Eigen::Index>(j)) =
            Eigen::Map<const nn::Vector>(cols[j].data(), static_cast<Eigen::Index>(cols[j].size()));
    return m;
}

class Trainer {
public:
    Trainer(const TrainConfig& config, const TrainOptions& options) : cfg_(config), opt_(options) {}

    TrainResult run();

private:
    void setup();
    std::vector<Gathered> collect(int epoch);
    void absorb(std::vector<Gathered>& gathered, EpochStats& stats, double& returns);
    void update(EpochStats& stats, double& critic_sum, double& actor_sum, int& loss_count);
    bool finite() const;
    void write_outputs(bool final_write);
    void save(const std::string& name, int epoch);

    const TrainConfig& cfg_;
    const TrainOptions& opt_;
    TrainResult result_;
    curriculum::SpawnSpec spawn_;
    curriculum::CurriculumLevel level_;
    std::vector<Rng> worker_rngs_;
    Rng update_rng_{0};
    Rng eval_rng_{0};
    std::unique_ptr<imitation::ExpertPolicy> expert_;
    imitation::MixedPolicy mixed_;
    std::optional<agents::ReplayBuffer<agents::Transition>> transitions_;
    std::optional<agents::ReplayBuffer<agents::PggdSample>> samples_;
    std::optional<agents::ReplayBuffer<imitation::ControlledStep>> steps_;
};

void Trainer::setup() {
    spawn_ = cfg_.spawn();
    level_ = cfg_.schedule.levels.front();
    for (int w = 0; w < cfg_.workers; ++w) worker_rngs_.emplace_back(cfg_.seed + static_cast<unsigned long long>(w));
    update_rng_ = stream_rng(cfg_.seed, kUpdateStream);
    eval_rng_ = stream_rng(cfg_.seed, kEvalStream);

    Rng init = stream_rng(cfg_.seed, kInitStream);
    const auto layout = task::ObservationLayout::for_kind(cfg_.env);
    if (cfg_.algorithm == Algorithm::Ddpg) {
        result_.ddpg.emplace(layout, cfg_.ddpg, init);
        transitions_.emplace(cfg_.ddpg.buffer_capacity);
        return;
    }
    result_.pggd.emplace(layout, cfg_.pggd, init);
    if (cfg_.algorithm == Algorithm::Pggd) {
        samples_.emplace(cfg_.pggd.buffer_capacity);
        return;
    }
    if (cfg_.imitation.expert == ExpertKind::Scripted) {
        expert_ = std::make_unique<imitation::ScriptedExpert>(cfg_.physics);
    } else {
        expert_ = std::make_unique<imitation::TrainedExpert>(agents::load_ddpg(
            cfg_.imitation.expert_path, task::ObservationLayout::for_kind(task::EnvKind::BlocksTouch)));
    }
    mixed_.learner = &*result_.pggd;
    mixed_.expert = expert_.get();
    mixed_.beta0 = cfg_.imitation.beta0;
    mixed_.t0 = cfg_.imitation.t0;
    mixed_.granularity = cfg_.imitation.granularity;
    mixed_.expert_critic_advantage = cfg_.imitation.expert_critic_advantage;
    steps_.emplace(cfg_.pggd.buffer_capacity);
}

std::vector<Gathered> Trainer::collect(int epoch) {
    mixed_.epoch = epoch;
    std::vector<Gathered> out(static_cast<std::size_t>(cfg_.workers));
    auto work = [this, &out](int w) {
        task::BlocksEnv env(cfg_.env, cfg_.physics, cfg_.horizon);
        Rng& rng = worker_rngs_[static_cast<std::size_t>(w)];
        Gathered& g = out[static_cast<std::size_t>(w)];
        for (int r = 0; r < cfg_.rollouts; ++r) {
            const auto start = curriculum::sample_scene(level_, spawn_, rng);
            switch (cfg_.algorithm) {
            case Algorithm::Ddpg: ddpg_episode(*result_.ddpg, env, start, rng, g); break;
            case Algorithm::Pggd: pggd_episode(*result_.pggd, env, start, rng, g); break;
            case Algorithm::PggdAggrevated: mixed_episode(mixed_, env, start, rng, g); break;
            }
        }
    };
    if (cfg_.workers == 1) {
        work(0);
        return out;
    }
    std::vector<std::exception_ptr> errors(out.size());
    std::vector<std::thread> threads;
    for (int w = 0; w < cfg_.workers; ++w)
        threads.emplace_back([&, w] {
            try {
                work(w);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

void Trainer::absorb(std::vector<Gathered>& gathered, EpochStats& stats, double& returns) {
    for (auto& g : gathered) {
        stats.episodes += g.episodes;
        stats.train_rate += g.successes;
        returns += g.total_return;
        for (auto& t : g.transitions) transitions_->push(std::move(t));
        for (auto& s : g.samples) samples_->push(std::move(s));
        for (auto& s : g.steps) steps_->push(std::move(s));
        if (g.observations.empty()) continue;
        const nn::Matrix obs = stack_columns(g.observations);
        if (result_.ddpg) result_.ddpg->observe(obs);
        if (result_.pggd) result_.pggd->observe(obs);
    }
}

void Trainer::update(EpochStats& stats, double& critic_sum, double& actor_sum, int& loss_count) {
    const auto n = static_cast<std::size_t>(cfg_.batch_size);
    for (int b = 0; b < cfg_.batches; ++b) {
        ++stats.batches;
        bool applied = true;
        switch (cfg_.algorithm) {
        case Algorithm::Ddpg: {
            const auto s = result_.ddpg->update(transitions_->sample(n, update_rng_));
            applied = s.applied;
            if (applied) {
                critic_sum += s.critic_loss;
                actor_sum += -s.actor_objective;
            }
            break;
        }
        case Algorithm::Pggd: {
            const auto s = result_.pggd->update(samples_->sample(n, update_rng_));
            applied = s.applied;
            if (applied) actor_sum += s.loss;
            break;
        }
        case Algorithm::PggdAggrevated: {
            const auto s = imitation::aggrevated_update(mixed_, steps_->sample(n, update_rng_));
            applied = s.applied;
            if (applied) {
                critic_sum += s.supervision_loss;
                actor_sum += s.pg_loss;
            }
            break;
        }
        }
        if (applied)
            ++loss_count;
        else
            ++stats.rejected_updates;
    }
}

bool Trainer::finite() const {
    if (result_.ddpg) {
        const auto& a = *result_.ddpg;
        return a.actor().all_finite() && a.critic().all_finite() && a.target_actor().all_finite() &&
               a.target_critic().all_finite() && a.normalizer().mean().allFinite() &&
               a.normalizer().variance().allFinite();
    }
    const auto& a = *result_.pggd;
    return a.policy().all_finite() && a.normalizer().mean().allFinite() && a.normalizer().variance().allFinite();
}

void Trainer::save(const std::string& name, int epoch) {
    if (!opt_.out_dir) return;
    const std::filesystem::path rel = std::filesystem::path("checkpoints") / name;
    const auto path = *opt_.out_dir / rel;
    std::filesystem::create_directories(path.parent_path());
    agents::Metadata meta = result_.log.config;
    meta["checkpoint.epoch"] = std::to_string(epoch);
    if (result_.ddpg)
        agents::save_checkpoint(path, *result_.ddpg, meta);
    else
        agents::save_checkpoint(path, *result_.pggd, meta);
    result_.log.checkpoints.push_back(rel.generic_string());
}

void Trainer::write_outputs(bool final_write) {
    if (!opt_.out_dir) return;
    const auto dir = *opt_.out_dir;
    {
        std::ofstream out(dir / "runlog.json");
        out << result_.log.to_json() << '\n';
        if (!out) throw RunError("cannot write " + (dir / "runlog.json").string());
    }
    if (final_write) return;
    std::ofstream csv(dir / "metrics.csv", std::ios::app);
    csv << metrics_row(result_.log.epochs.back()) << '\n';
    if (!csv) throw RunError("cannot write " + (dir / "metrics.csv").string());
}

TrainResult Trainer::run() {
    result_.log.config = to_key_values(cfg_);
    if (opt_.out_dir) {
        std::filesystem::create_directories(*opt_.out_dir);
        std::ofstream(*opt_.out_dir / "config.txt") << to_config_text(cfg_);
        std::ofstream(*opt_.out_dir / "metrics.csv") << kMetricsHeader << '\n';
    }
    auto& summary = result_.log.summary;

    try {
        setup();
        for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
            const auto t0 = std::chrono::steady_clock::now();
            EpochStats stats;
            stats.epoch = epoch;
            stats.level = level_.index;
            if (cfg_.algorithm == Algorithm::PggdAggrevated) {
                mixed_.epoch = epoch;
                stats.beta = mixed_.current_beta();
            }
            double returns = 0.0;
            double critic_sum = 0.0;
            double actor_sum = 0.0;
            int loss_count = 0;
            for (int c = 0; c < cfg_.cycles; ++c) {
                auto gathered = collect(epoch);
                absorb(gathered, stats, returns);
                update(stats, critic_sum, actor_sum, loss_count);
            }
            stats.train_rate /= static_cast<double>(stats.episodes);
            stats.mean_return = returns / static_cast<double>(stats.episodes);
            if (loss_count > 0) {
                stats.actor_loss = actor_sum / loss_count;
                if (cfg_.algorithm != Algorithm::Pggd) stats.critic_loss = critic_sum / loss_count;
            }

            if (stats.rejected_updates == stats.batches || !finite()) {
                summary.status = "aborted";
                summary.diagnostic = "non-finite training collapse in epoch " + std::to_string(epoch) + " (" +
                                     std::to_string(stats.rejected_updates) + " of " +
                                     std::to_string(stats.batches) + " updates rejected)";
                break;
            }

            std::unique_ptr<Policy> policy;
            if (result_.ddpg)
                policy = std::make_unique<DdpgPolicy>(*result_.ddpg);
            else
                policy = std::make_unique<PggdPolicy>(*result_.pggd);
            const EvalSetup setup{spawn_, cfg_.physics, cfg_.horizon, nullptr};
            stats.test_rate = evaluate(*policy, level_, EvalMode::Test, cfg_.eval_episodes, eval_rng_, setup).rate();
            stats.finals_rate =
                evaluate(*policy, cfg_.schedule.max_level(), EvalMode::Finals, cfg_.eval_episodes, eval_rng_, setup)
                    .rate();
            level_ = curriculum::advance(level_, cfg_.schedule,
                                         cfg_.advance_on_test ? stats.test_rate : stats.train_rate);
            stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

            result_.log.epochs.push_back(stats);
            summary.epochs_run = epoch + 1;
            summary.total_episodes += stats.episodes;
            summary.total_batches += stats.batches;
            summary.best_finals_rate = std::max(summary.best_finals_rate, stats.finals_rate);
            summary.final_level = level_.index;
            if (cfg_.checkpoint_every > 0 && (epoch + 1) % cfg_.checkpoint_every == 0) {
                char name[32];
                std::snprintf(name, sizeof name, "epoch_%04d.bbck", epoch + 1);
                save(name, epoch + 1);
            }
            write_outputs(false);
            if (opt_.on_epoch) opt_.on_epoch(stats);
            if (opt_.stop_when && opt_.stop_when(stats)) {
                summary.status = "stopped";
                break;
            }
        }
        if (summary.status != "aborted" && summary.epochs_run > 0) save("final.bbck", summary.epochs_run);
    } catch (const ConfigError& e) {
        summary.status = "aborted";
        summary.diagnostic = e.what();
    } catch (const DomainError& e) {
        summary.status = "aborted";
        summary.diagnostic = e.what();
    }
    write_outputs(true);
    return std::move(result_);
}

} // namespace

std::string metrics_row(const EpochStats& s) {
    return std::to_string(s.epoch) + ',' + std::to_string(s.level) + ',' + format_double(s.train_rate) + ',' +
           format_double(s.test_rate) + ',' + format_double(s.finals_rate) + ',' + format_double(s.mean_return) +
           ',' + opt(s.critic_loss) + ',' + format_double(s.actor_loss) + ',' + opt(s.beta) + ',' +
           format_double(s.seconds);
}

std::string RunLog::to_json(bool include_timing) const {
    json j;
    j["config"] = config;
    j["epochs"] = json::array();
    for (const auto& s : epochs) {
        json e{{"epoch", s.epoch},
               {"level", s.level},
               {"train_rate", s.train_rate},
               {"test_rate", s.test_rate},
               {"finals_rate", s.finals_rate},
               {"mean_return", s.mean_return},
               {"critic_loss", s.critic_loss ? json(*s.critic_loss) : json(nullptr)},
               {"actor_loss", s.actor_loss},
               {"beta", s.beta ? json(*s.beta) : json(nullptr)},
               {"episodes", s.episodes},
               {"batches", s.batches},
               {"rejected_updates", s.rejected_updates}};
        if (include_timing) e["seconds"] = s.seconds;
        j["epochs"].push_back(std::move(e));
    }
    j["summary"] = {{"status", summary.status},
                    {"diagnostic", summary.diagnostic},
                    {"epochs_run", summary.epochs_run},
                    {"final_level", summary.final_level},
                    {"best_finals_rate", summary.best_finals_rate},
                    {"total_episodes", summary.total_episodes},
                    {"total_batches", summary.total_batches}};
    j["checkpoints"] = checkpoints;
    return j.dump(2);
}

TrainResult train(const TrainConfig& config, const TrainOptions& options) {
    config.validate();
    Trainer t(config, options);
    return t.run();
}

TrainConfig config_from_key_values(const KeyValues& kv) {
    TrainConfig c;
    KeyValues filtered;
    for (const auto& [k, v] : kv)
        if (k.rfind("checkpoint.", 0) != 0) filtered.emplace(k, v);
    apply_settings(c, filtered);
    return c;
}

} // namespace blockbench::harness
