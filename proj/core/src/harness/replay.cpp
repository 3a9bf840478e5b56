#include "blockbench/harness/replay.hpp"

#include <bit>
#include <cstdint>

namespace blockbench::harness {

namespace {

bool same(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool same(const physics::Vec3& a, const physics::Vec3& b) { return same(a.x, b.x) && same(a.y, b.y) && same(a.z, b.z); }

} // namespace

bool bitwise_equal(const physics::WorldState& a, const physics::WorldState& b) {
    const auto& ea = a.effector;
    const auto& eb = b.effector;
    if (!same(ea.pos, eb.pos) || !same(ea.vel, eb.vel) || !same(ea.radius, eb.radius)) return false;
    for (std::size_t i = 0; i < ea.gripper.size(); ++i)
        if (!same(ea.gripper[i], eb.gripper[i])) return false;
    if (a.step_count != b.step_count || !(a.table == b.table) || a.blocks.size() != b.blocks.size()) return false;
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        const auto& x = a.blocks[i];
        const auto& y = b.blocks[i];
        if (x.id != y.id || x.color != y.color || x.on_table != y.on_table || !same(x.radius, y.radius) ||
            !same(x.pos, y.pos) || !same(x.yaw, y.yaw) || !same(x.lin_vel, y.lin_vel) || !same(x.ang_vel, y.ang_vel))
            return false;
    }
    return true;
}

ReplayReport replay(const std::vector<physics::TraceEpisode>& episodes,
                    const std::function<void(const ReplayStep&)>& on_step) {
    ReplayReport report;
    for (const auto& ep : episodes) {
        ++report.episodes;
        for (std::size_t i = 1; i < ep.records.size(); ++i) {
            const auto& prev = ep.records[i - 1];
            const auto& cur = ep.records[i];
            if (!cur.action) throw DomainError("replay: step " + std::to_string(cur.step) + " has no action");
            ReplayStep rs;
            rs.episode = ep.header.episode;
            rs.step = cur.step;
            rs.simulated = physics::step_world(prev.state, *cur.action, ep.header.params);
            rs.match = bitwise_equal(rs.simulated, cur.state);
            ++report.steps;
            if (!rs.match && report.mismatches++ == 0)
                report.first_mismatch = "episode " + std::to_string(rs.episode) + " step " + std::to_string(rs.step);
            if (on_step) on_step(rs);
        }
    }
    return report;
}

} // namespace blockbench::harness
