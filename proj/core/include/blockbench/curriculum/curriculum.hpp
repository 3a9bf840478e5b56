#pragma once

#include <string>
#include <vector>

#include "blockbench/common.hpp"
#include "blockbench/physics/world.hpp"
#include "blockbench/task/task.hpp"

namespace blockbench::curriculum {

using physics::WorldState;
using task::EnvKind;

/// One start-state distribution: blocks spawn within `radius` of their
/// anchor; the grey block stays at least `min_radius` from the colored
/// blocks' midpoint.
struct CurriculumLevel {
    int index = 0;
    double radius = 0.1;
    double min_radius = 0.0;

    friend bool operator==(const CurriculumLevel&, const CurriculumLevel&) = default;
};

struct CurriculumSchedule {
    std::vector<CurriculumLevel> levels;
    /// Success rate at or above which the next level unlocks.
    double threshold = 0.7;

    /// Throws ConfigError unless levels are indexed 0..n-1, radius is
    /// positive and non-decreasing, min_radius non-increasing and zero at
    /// the last level, and threshold lies in (0, 1).
    void validate() const;

    [[nodiscard]] const CurriculumLevel& max_level() const { return levels.back(); }

    friend bool operator==(const CurriculumSchedule&, const CurriculumSchedule&) = default;

    /// `count` levels with radius and min_radius interpolated linearly.
    static CurriculumSchedule linear(int count, double r_first, double r_last, double r_min_first,
                                     double r_min_last, double threshold);
};

/// Scene geometry shared by every episode of a run.
struct SceneConfig {
    physics::Table table;
    double block_radius = 0.025;
    double effector_radius = 0.01;
    /// Fixed effector start, every episode.
    physics::Vec3 arm_start{0.0, 0.0, 0.025};
    double contact_margin = 1e-3;

    friend bool operator==(const SceneConfig&, const SceneConfig&) = default;
};

struct SpawnSpec {
    EnvKind kind = EnvKind::BlocksTouch;
    SceneConfig scene;
};

inline constexpr int kRejectionCap = 10'000;
/// Minimum colored-block separation in challenge scenes.
inline constexpr double kChallengeSeparation = 0.15;

/// Block ids used by sampled scenes.
inline constexpr int kGreenId = 0;
inline constexpr int kBlueId = 1;
inline constexpr int kGreyId = 2;

/// Draws a start state for `level`.
///
/// The blue block is uniform in the disc of radius R around the arm's table
/// projection, the green block uniform in the disc of radius R around the
/// blue one. The grey block (BlocksChoose) is uniform over the table and
/// rejected while within R_min of the colored midpoint. Every block must
/// sit fully on the table and start out of contact with everything else.
/// Throws ConfigError when 10,000 draws do not produce a valid scene.
WorldState sample_scene(const CurriculumLevel& level, const SpawnSpec& spec, Rng& rng);

/// Next level when `rate >= threshold` and one exists, else `current`.
CurriculumLevel advance(const CurriculumLevel& current, const CurriculumSchedule& schedule, double rate);

/// Adversarial scene: colored blocks anywhere on the table but at least 0.15
/// apart, grey block exactly at their midpoint. BlocksChoose only.
WorldState challenge_scene(const SpawnSpec& spec, Rng& rng);

/// Re-checks a sampled scene against its level's constraints.
bool satisfies_level(const WorldState& scene, const CurriculumLevel& level, const SpawnSpec& spec);

/// Bare scene with the effector at its start position and no blocks.
WorldState empty_scene(const SceneConfig& scene);

} // namespace blockbench::curriculum
