#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "blockbench/harness/config.hpp"
#include "blockbench/harness/evaluate.hpp"

namespace blockbench::harness {

struct EpochStats {
    int epoch = 0;
    /// Curriculum level trained on during this epoch.
    int level = 0;
    double train_rate = 0.0;
    double test_rate = 0.0;
    double finals_rate = 0.0;
    /// Mean undiscounted return of this epoch's training episodes.
    double mean_return = 0.0;
    /// Mean critic loss (DDPG) or supervision loss (AggreVaTeD); absent otherwise.
    std::optional<double> critic_loss;
    /// Mean actor loss: -Q(s, mu(s)) for DDPG, the surrogate for PGGD.
    double actor_loss = 0.0;
    std::optional<double> beta;
    double seconds = 0.0;
    long long episodes = 0;
    long long batches = 0;
    /// Updates rejected because their gradients were non-finite.
    long long rejected_updates = 0;
};

struct RunSummary {
    /// "completed", "stopped" (stop callback) or "aborted".
    std::string status = "completed";
    std::string diagnostic;
    int epochs_run = 0;
    int final_level = 0;
    double best_finals_rate = 0.0;
    long long total_episodes = 0;
    long long total_batches = 0;
};

/// Append-only record of a run.
struct RunLog {
    KeyValues config;
    std::vector<EpochStats> epochs;
    RunSummary summary;
    std::vector<std::string> checkpoints;

    [[nodiscard]] std::string to_json(bool include_timing = true) const;
};

/// Header line of metrics.csv.
inline constexpr const char* kMetricsHeader =
    "epoch,level,train_rate,test_rate,finals_rate,mean_return,critic_loss,actor_loss,beta,seconds";

std::string metrics_row(const EpochStats& s);

struct TrainOptions {
    /// Directory for runlog.json, metrics.csv, config.txt and checkpoints.
    std::optional<std::filesystem::path> out_dir;
    std::function<void(const EpochStats&)> on_epoch;
    /// Ends the run after the current epoch when it returns true.
    std::function<bool(const EpochStats&)> stop_when;
};

struct TrainResult {
    RunLog log;
    std::optional<agents::DdpgAgent> ddpg;
    std::optional<agents::PggdAgent> pggd;

    [[nodiscard]] bool aborted() const { return log.summary.status == "aborted"; }
};

/// Runs the epoch/cycle/batch loop. Each cycle collects `rollouts` episodes
/// per worker at the current level against a frozen parameter snapshot
/// (worker w draws from Rng(seed + w)), merges them in worker order, then
/// performs `batches` updates of `batch_size` samples. After each epoch: test evaluation at the current
/// level, finals at the last level, curriculum advance on the test rate.
///
/// Throws ConfigError if `config` is invalid. Failures once the run has
/// started (infeasible level, unusable expert, non-finite collapse) end the
/// run with summary status "aborted" and a diagnostic.
TrainResult train(const TrainConfig& config, const TrainOptions& options = {});

/// Rebuilds the configuration stored in a RunLog or checkpoint metadata.
TrainConfig config_from_key_values(const KeyValues& kv);

} // namespace blockbench::harness
