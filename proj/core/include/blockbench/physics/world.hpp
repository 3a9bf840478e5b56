#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "blockbench/common.hpp"

namespace blockbench::physics {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
    friend Vec3 operator*(double s, Vec3 a) { return a * s; }
    friend bool operator==(const Vec3&, const Vec3&) = default;

    [[nodiscard]] bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
};

/// Distance in the table plane; contacts and pushes ignore height.
inline double planar_distance(Vec3 a, Vec3 b) { return std::hypot(a.x - b.x, a.y - b.y); }

enum class Color : std::uint8_t { Red, Blue, Green, Grey };

const char* to_string(Color c);
Color color_from_string(const std::string& s);

struct BlockBody {
    int id = 0;
    Color color = Color::Grey;
    double radius = 0.025;
    Vec3 pos;
    double yaw = 0.0;
    Vec3 lin_vel;
    double ang_vel = 0.0;
    bool on_table = true;

    friend bool operator==(const BlockBody&, const BlockBody&) = default;
};

struct EffectorState {
    Vec3 pos;
    Vec3 vel;
    double radius = 0.01;
    /// Locked gripper finger positions; carried into observations, never actuated.
    std::array<double, 2> gripper{0.05, 0.05};

    friend bool operator==(const EffectorState&, const EffectorState&) = default;
};

/// Axis-aligned table top. `center.z` is the table surface height.
struct Table {
    Vec3 center;
    double half_x = 0.25;
    double half_y = 0.35;

    [[nodiscard]] bool contains(Vec3 p, double inset = 0.0) const {
        return std::abs(p.x - center.x) <= half_x - inset && std::abs(p.y - center.y) <= half_y - inset;
    }

    friend bool operator==(const Table&, const Table&) = default;
};

struct WorldState {
    EffectorState effector;
    std::vector<BlockBody> blocks;
    Table table;
    int step_count = 0;

    [[nodiscard]] const BlockBody* find(int id) const;

    friend bool operator==(const WorldState&, const WorldState&) = default;
};

struct PhysicsParams {
    double dt = 0.04;
    /// Effector speed at |action| = 1, m/s.
    double v_max = 0.5;
    /// Fraction of block velocity removed per step (table friction).
    double block_damping = 0.8;
    double contact_margin = 1e-3;
    /// The effector may travel this far beyond the table edge in x/y.
    double workspace_margin = 0.05;
    /// Effector height band above the table surface.
    double workspace_height = 0.15;
    /// Overlap resolution sweeps per step.
    int solver_iterations = 4;

    void validate() const;

    friend bool operator==(const PhysicsParams&, const PhysicsParams&) = default;
};

struct Action {
    std::array<double, 4> values{};

    /// Copy with every component clipped to [-1, 1].
    [[nodiscard]] Action clipped() const;
    [[nodiscard]] bool finite() const;

    friend bool operator==(const Action&, const Action&) = default;
};

/// Id used for the effector in contact pairs.
inline constexpr int kEffectorId = -1;

/// Contact between two entities, stored with `a < b`.
struct ContactPair {
    int a = 0;
    int b = 0;

    friend bool operator==(const ContactPair&, const ContactPair&) = default;
    friend auto operator<=>(const ContactPair&, const ContactPair&) = default;
};

/// Effector bounds: the table rectangle grown by the workspace margin, and a
/// height band above the table surface.
struct Workspace {
    Vec3 lo;
    Vec3 hi;

    [[nodiscard]] Vec3 clamp(Vec3 p) const;
    [[nodiscard]] bool contains(Vec3 p, double eps = 0.0) const;
};

Workspace workspace_of(const Table& table, const PhysicsParams& params);

/// Wraps an angle into [-pi, pi).
double wrap_angle(double a);

/// Advances the world by one fixed timestep.
///
/// The first three action components are velocity commands for the effector,
/// scaled by `v_max`; the fourth (gripper) is ignored. Blocks glide on their
/// damped velocity, are pushed out of the effector and out of each other, and
/// leave the simulation once their center crosses the table edge. Reported
/// block velocities are the net displacement over the step divided by `dt`.
///
/// Throws DomainError on non-finite action or state.
WorldState step_world(const WorldState& state, const Action& action, const PhysicsParams& params);

/// All touching pairs among the effector and on-table blocks, sorted, with
/// `a < b`. Touching means planar center distance <= r_a + r_b + margin.
std::vector<ContactPair> detect_contacts(const WorldState& state, double margin);

/// Moves `block` radially away from the effector until the two discs no
/// longer overlap. Coincident centers push along the effector velocity, or
/// +x when the effector is at rest. Sets the block velocity to
/// displacement / dt. Blocks that are not overlapping or not on the table
/// are returned unchanged.
BlockBody resolve_push(const EffectorState& effector, const BlockBody& block, const PhysicsParams& params);

} // namespace blockbench::physics
