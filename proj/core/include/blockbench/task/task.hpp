#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blockbench/physics/world.hpp"

namespace blockbench::task {

using physics::Color;
using physics::ContactPair;
using physics::WorldState;

enum class Status { Ongoing, Success, Failure };

const char* to_string(Status s);

/// Latched progress of one episode under the color rules.
struct TaskProgress {
    /// blue block id -> has touched a green block at some point
    std::map<int, bool> touched_green;
    Status status = Status::Ongoing;

    friend bool operator==(const TaskProgress&, const TaskProgress&) = default;
};

/// Fresh progress tracking every blue block in `colors`.
TaskProgress initial_progress(const std::map<int, Color>& colors);

/// Applies the color rules to one step's contacts:
///  - red touching blue fails the task;
///  - a blue touching any green latches its flag;
///  - all blue flags set completes the task.
/// Success and Failure are absorbing. Grey contacts, red-green contacts and
/// effector contacts have no effect. Throws DomainError for contact ids
/// missing from `colors`.
TaskProgress evaluate_status(const TaskProgress& progress, const std::vector<ContactPair>& contacts,
                             const std::map<int, Color>& colors);

/// Fails an ongoing task if any blue or green block has left the table.
TaskProgress apply_off_table_rule(const TaskProgress& progress, const WorldState& state);

/// Sparse reward: +1 entering Success, -1 entering Failure, 0 otherwise.
double compute_reward(const TaskProgress& prev, const TaskProgress& next);

std::map<int, Color> color_map(const WorldState& state);

enum class EnvKind { BlocksTouch, BlocksChoose };

const char* to_string(EnvKind k);
EnvKind env_kind_from_string(const std::string& s);

/// Block colors in observation order: green, blue, then grey when present.
std::vector<Color> layout_colors(EnvKind kind);

inline constexpr int kRobotSegment = 8;
inline constexpr int kBlockSegment = 12;

/// Shape of a flat observation vector.
struct ObservationLayout {
    int robot_len = kRobotSegment;
    int block_len = kBlockSegment;
    std::vector<Color> block_colors;

    [[nodiscard]] int size() const { return robot_len + block_len * static_cast<int>(block_colors.size()); }
    /// [begin, end) of the grey segment, if any. Grey is always last.
    [[nodiscard]] std::optional<std::pair<int, int>> grey_range() const;
    [[nodiscard]] std::string describe() const;

    static ObservationLayout for_kind(EnvKind kind);
    static ObservationLayout parse(const std::string& descriptor);

    friend bool operator==(const ObservationLayout&, const ObservationLayout&) = default;
};

struct Observation {
    std::vector<double> values;
    ObservationLayout layout;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Concatenates effector pos(3), vel(3), gripper(2), then per block in
/// layout order pos(3), yaw, lin_vel(3), ang_vel and a red/blue/green/grey
/// one-hot. Throws DomainError when the block colors do not match `kind`.
Observation encode_observation(const WorldState& state, EnvKind kind);

/// Drops the grey segment; identity when there is none.
Observation filter_grey(const Observation& obs);

/// Per-segment view of an observation, for inspection and tests.
struct DecodedBlock {
    physics::Vec3 pos;
    double yaw = 0.0;
    physics::Vec3 lin_vel;
    double ang_vel = 0.0;
    Color color = Color::Grey;
};

struct DecodedObservation {
    physics::Vec3 effector_pos;
    physics::Vec3 effector_vel;
    std::array<double, 2> gripper{};
    std::vector<DecodedBlock> blocks;
};

DecodedObservation decode_observation(const Observation& obs);

} // namespace blockbench::task
