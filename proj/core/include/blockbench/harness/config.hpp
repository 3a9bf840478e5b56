#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "blockbench/agents/ddpg.hpp"
#include "blockbench/agents/pggd.hpp"
#include "blockbench/curriculum/curriculum.hpp"
#include "blockbench/imitation/imitation.hpp"

namespace blockbench::harness {

enum class Algorithm { Ddpg, Pggd, PggdAggrevated };

const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

enum class ExpertKind { Scripted, Trained };

struct ImitationConfig {
    double beta0 = 0.0;
    double t0 = 50.0;
    ExpertKind expert = ExpertKind::Scripted;
    std::string expert_path;
    imitation::MixingGranularity granularity = imitation::MixingGranularity::Episode;
    bool expert_critic_advantage = false;

    friend bool operator==(const ImitationConfig&, const ImitationConfig&) = default;
};

struct TrainConfig {
    task::EnvKind env = task::EnvKind::BlocksTouch;
    Algorithm algorithm = Algorithm::Ddpg;
    int epochs = 200;
    int cycles = 50;
    int batches = 40;
    int rollouts = 2;
    int workers = 1;
    int batch_size = 256;
    unsigned long long seed = 0;
    int horizon = 50;
    /// Episodes per test and finals evaluation after each epoch.
    int eval_episodes = 20;
    /// Write a checkpoint every this many epochs (0: only the final one).
    int checkpoint_every = 10;
    /// Advance the curriculum on the test (deterministic) success rate;
    /// false uses the training (exploration) rate.
    bool advance_on_test = true;

    physics::PhysicsParams physics;
    curriculum::SceneConfig scene;
    curriculum::CurriculumSchedule schedule =
        curriculum::CurriculumSchedule::linear(8, 0.08, 0.35, 0.10, 0.0, 0.7);
    agents::DdpgConfig ddpg;
    agents::PggdConfig pggd{.hidden = {256, 256, 256}, .learning_rate = 1e-4};
    ImitationConfig imitation;

    /// Throws ConfigError on non-positive counts, an invalid schedule or
    /// physics block, or an imitation run without a usable expert.
    void validate() const;

    /// Spawn settings; the scene's contact margin follows physics.contact_margin.
    [[nodiscard]] curriculum::SpawnSpec spawn() const {
        curriculum::SpawnSpec s{env, scene};
        s.scene.contact_margin = physics.contact_margin;
        return s;
    }

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

using KeyValues = std::map<std::string, std::string>;

/// Applies `key=value` settings. Keys are namespaced (`train.epochs`,
/// `physics.dt`, `curriculum.h`, `agent.tau`, `imitation.t0`, ...);
/// unknown keys and unparsable values throw ConfigError.
void apply_settings(TrainConfig& config, const KeyValues& settings);

/// Parses flat `key = value` text; `#` starts a comment.
KeyValues parse_config_text(const std::string& text);
KeyValues read_config_file(const std::filesystem::path& path);

/// Every key with its current value; feeding it back through
/// apply_settings reproduces `config`.
KeyValues to_key_values(const TrainConfig& config);
std::string to_config_text(const TrainConfig& config);

/// All recognised keys, sorted.
std::vector<std::string> known_keys();

} // namespace blockbench::harness
