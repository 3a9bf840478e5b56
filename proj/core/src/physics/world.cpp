#include "blockbench/physics/world.hpp"

#include <algorithm>
#include <string>

namespace blockbench::physics {

const char* to_string(Color c) {
    switch (c) {
    case Color::Red: return "red";
    case Color::Blue: return "blue";
    case Color::Green: return "green";
    case Color::Grey: return "grey";
    }
    return "?";
}

Color color_from_string(const std::string& s) {
    if (s == "red") return Color::Red;
    if (s == "blue") return Color::Blue;
    if (s == "green") return Color::Green;
    if (s == "grey") return Color::Grey;
    throw DomainError("unknown color '" + s + "'");
}

const BlockBody* WorldState::find(int id) const {
    for (const auto& b : blocks) {
        if (b.id == id) return &b;
    }
    return nullptr;
}

void PhysicsParams::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("physics.dt must be > 0");
    if (!(v_max > 0.0) || !std::isfinite(v_max)) throw ConfigError("physics.v_max must be > 0");
    if (!(block_damping >= 0.0 && block_damping <= 1.0))
        throw ConfigError("physics.block_damping must lie in [0, 1]");
    if (!(contact_margin >= 0.0)) throw ConfigError("physics.contact_margin must be >= 0");
    if (!(workspace_margin >= 0.0)) throw ConfigError("physics.workspace_margin must be >= 0");
    if (!(workspace_height > 0.0)) throw ConfigError("physics.workspace_height must be > 0");
    if (solver_iterations < 1) throw ConfigError("physics.solver_iterations must be >= 1");
}

Action Action::clipped() const {
    Action out;
    for (std::size_t i = 0; i < values.size(); ++i) out.values[i] = std::clamp(values[i], -1.0, 1.0);
    return out;
}

bool Action::finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

Vec3 Workspace::clamp(Vec3 p) const {
    return {std::clamp(p.x, lo.x, hi.x), std::clamp(p.y, lo.y, hi.y), std::clamp(p.z, lo.z, hi.z)};
}

bool Workspace::contains(Vec3 p, double eps) const {
    return p.x >= lo.x - eps && p.x <= hi.x + eps && p.y >= lo.y - eps && p.y <= hi.y + eps &&
           p.z >= lo.z - eps && p.z <= hi.z + eps;
}

Workspace workspace_of(const Table& table, const PhysicsParams& params) {
    const double m = params.workspace_margin;
    return {{table.center.x - table.half_x - m, table.center.y - table.half_y - m, table.center.z},
            {table.center.x + table.half_x + m, table.center.y + table.half_y + m,
             table.center.z + params.workspace_height}};
}

double wrap_angle(double a) {
    if (a >= -std::numbers::pi && a < std::numbers::pi) return a;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(a + std::numbers::pi, two_pi);
    if (w < 0.0) w += two_pi;
    w -= std::numbers::pi;
    // fmod rounding can land exactly on +pi
    if (w >= std::numbers::pi) w -= two_pi;
    return w;
}

namespace {

void check_finite(const WorldState& s) {
    const auto& e = s.effector;
    if (!e.pos.finite() || !e.vel.finite() || !std::isfinite(e.radius) || !std::isfinite(e.gripper[0]) ||
        !std::isfinite(e.gripper[1]))
        throw DomainError("step_world: non-finite effector state");
    for (const auto& b : s.blocks) {
        if (!b.pos.finite() || !b.lin_vel.finite() || !std::isfinite(b.yaw) || !std::isfinite(b.ang_vel) ||
            !(b.radius > 0.0))
            throw DomainError("step_world: invalid block " + std::to_string(b.id));
    }
}

// Splits the overlap between two blocks evenly along their center line.
void separate(BlockBody& a, BlockBody& b) {
    const double dx = b.pos.x - a.pos.x;
    const double dy = b.pos.y - a.pos.y;
    const double dist = std::hypot(dx, dy);
    const double min_dist = a.radius + b.radius;
    if (dist >= min_dist) return;
    double nx = 1.0;
    double ny = 0.0;
    if (dist > 0.0) {
        nx = dx / dist;
        ny = dy / dist;
    }
    const double half = 0.5 * (min_dist - dist);
    a.pos.x -= nx * half;
    a.pos.y -= ny * half;
    b.pos.x += nx * half;
    b.pos.y += ny * half;
}

void push_out_of_effector(const EffectorState& eff, std::vector<BlockBody>& blocks, const PhysicsParams& params) {
    for (auto& b : blocks) {
        const Vec3 vel = b.lin_vel;
        b = resolve_push(eff, b, params);
        b.lin_vel = vel;
    }
}

} // namespace

BlockBody resolve_push(const EffectorState& effector, const BlockBody& block, const PhysicsParams& params) {
    if (!block.on_table) return block;
    const double dx = block.pos.x - effector.pos.x;
    const double dy = block.pos.y - effector.pos.y;
    const double dist = std::hypot(dx, dy);
    const double min_dist = effector.radius + block.radius;
    if (dist >= min_dist) return block;

    double nx = 1.0;
    double ny = 0.0;
    if (dist > 0.0) {
        nx = dx / dist;
        ny = dy / dist;
    } else {
        const double speed = std::hypot(effector.vel.x, effector.vel.y);
        if (speed > 0.0) {
            nx = effector.vel.x / speed;
            ny = effector.vel.y / speed;
        }
    }

    BlockBody out = block;
    out.pos.x = effector.pos.x + nx * min_dist;
    out.pos.y = effector.pos.y + ny * min_dist;
    out.lin_vel = {(out.pos.x - block.pos.x) / params.dt, (out.pos.y - block.pos.y) / params.dt, 0.0};
    return out;
}

WorldState step_world(const WorldState& state, const Action& action, const PhysicsParams& params) {
    if (!action.finite()) throw DomainError("step_world: non-finite action");
    check_finite(state);

    const Action a = action.clipped();
    WorldState next = state;
    const Workspace ws = workspace_of(state.table, params);

    // Effector: velocity command, clamped to the workspace.
    const double scale = params.v_max * params.dt;
    const Vec3 target = state.effector.pos + Vec3{a.values[0] * scale, a.values[1] * scale, a.values[2] * scale};
    next.effector.pos = ws.clamp(target);
    next.effector.vel = (next.effector.pos - state.effector.pos) * (1.0 / params.dt);

    // Blocks glide on damped velocity.
    const double keep = 1.0 - params.block_damping;
    for (auto& b : next.blocks) {
        if (!b.on_table) continue;
        b.lin_vel = b.lin_vel * keep;
        b.ang_vel *= keep;
        b.pos.x += b.lin_vel.x * params.dt;
        b.pos.y += b.lin_vel.y * params.dt;
        if (b.ang_vel != 0.0) b.yaw = wrap_angle(b.yaw + b.ang_vel * params.dt);
    }

    // Overlap resolution: the effector is kinematic, blocks share overlap evenly.
    for (int it = 0; it < params.solver_iterations; ++it) {
        push_out_of_effector(next.effector, next.blocks, params);
        for (std::size_t i = 0; i < next.blocks.size(); ++i) {
            if (!next.blocks[i].on_table) continue;
            for (std::size_t j = i + 1; j < next.blocks.size(); ++j) {
                if (!next.blocks[j].on_table) continue;
                separate(next.blocks[i], next.blocks[j]);
            }
        }
    }
    push_out_of_effector(next.effector, next.blocks, params);

    for (std::size_t i = 0; i < next.blocks.size(); ++i) {
        auto& b = next.blocks[i];
        if (!b.on_table) continue;
        const auto& before = state.blocks[i];
        b.lin_vel = {(b.pos.x - before.pos.x) / params.dt, (b.pos.y - before.pos.y) / params.dt, 0.0};
        if (!state.table.contains(b.pos)) {
            b.on_table = false;
            b.lin_vel = {};
            b.ang_vel = 0.0;
        }
    }

    ++next.step_count;
    return next;
}

std::vector<ContactPair> detect_contacts(const WorldState& state, double margin) {
    std::vector<ContactPair> out;
    const auto& blocks = state.blocks;
    auto add = [&out](int i, int j) { out.push_back(i < j ? ContactPair{i, j} : ContactPair{j, i}); };

    for (const auto& b : blocks) {
        if (!b.on_table) continue;
        if (planar_distance(b.pos, state.effector.pos) <= b.radius + state.effector.radius + margin)
            add(kEffectorId, b.id);
    }
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (!blocks[i].on_table) continue;
        for (std::size_t j = i + 1; j < blocks.size(); ++j) {
            if (!blocks[j].on_table) continue;
            if (planar_distance(blocks[i].pos, blocks[j].pos) <= blocks[i].radius + blocks[j].radius + margin)
                add(blocks[i].id, blocks[j].id);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace blockbench::physics
