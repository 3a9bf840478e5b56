#include "blockbench/task/task.hpp"

#include <algorithm>
#include <sstream>

namespace blockbench::task {

const char* to_string(Status s) {
    switch (s) {
    case Status::Ongoing: return "ongoing";
    case Status::Success: return "success";
    case Status::Failure: return "failure";
    }
    return "?";
}

TaskProgress initial_progress(const std::map<int, Color>& colors) {
    TaskProgress p;
    for (const auto& [id, c] : colors) {
        if (c == Color::Blue) p.touched_green[id] = false;
    }
    return p;
}

TaskProgress evaluate_status(const TaskProgress& progress, const std::vector<ContactPair>& contacts,
                             const std::map<int, Color>& colors) {
    auto color_of = [&colors](int id) -> std::optional<Color> {
        if (id == physics::kEffectorId) return std::nullopt;
        const auto it = colors.find(id);
        if (it == colors.end()) throw DomainError("evaluate_status: unknown entity id " + std::to_string(id));
        return it->second;
    };

    // Validate ids even when the status is already latched.
    std::vector<std::pair<std::optional<Color>, std::optional<Color>>> colored;
    colored.reserve(contacts.size());
    for (const auto& c : contacts) colored.emplace_back(color_of(c.a), color_of(c.b));

    if (progress.status != Status::Ongoing) return progress;

    TaskProgress next = progress;
    for (const auto& [id, c] : colors) {
        if (c == Color::Blue) next.touched_green.try_emplace(id, false);
    }
    auto is = [](const std::optional<Color>& c, Color want) { return c && *c == want; };

    for (const auto& [ca, cb] : colored) {
        if ((is(ca, Color::Red) && is(cb, Color::Blue)) || (is(ca, Color::Blue) && is(cb, Color::Red))) {
            next.status = Status::Failure;
            return next;
        }
    }
    for (std::size_t i = 0; i < contacts.size(); ++i) {
        const auto& [ca, cb] = colored[i];
        if (is(ca, Color::Blue) && is(cb, Color::Green)) next.touched_green[contacts[i].a] = true;
        if (is(cb, Color::Blue) && is(ca, Color::Green)) next.touched_green[contacts[i].b] = true;
    }
    const bool all = !next.touched_green.empty() &&
                     std::all_of(next.touched_green.begin(), next.touched_green.end(),
                                 [](const auto& kv) { return kv.second; });
    if (all) next.status = Status::Success;
    return next;
}

TaskProgress apply_off_table_rule(const TaskProgress& progress, const WorldState& state) {
    if (progress.status != Status::Ongoing) return progress;
    for (const auto& b : state.blocks) {
        if (!b.on_table && (b.color == Color::Blue || b.color == Color::Green)) {
            TaskProgress next = progress;
            next.status = Status::Failure;
            return next;
        }
    }
    return progress;
}

double compute_reward(const TaskProgress& prev, const TaskProgress& next) {
    if (prev.status != Status::Ongoing) return 0.0;
    switch (next.status) {
    case Status::Success: return 1.0;
    case Status::Failure: return -1.0;
    case Status::Ongoing: return 0.0;
    }
    return 0.0;
}

std::map<int, Color> color_map(const WorldState& state) {
    std::map<int, Color> out;
    for (const auto& b : state.blocks) out[b.id] = b.color;
    return out;
}

const char* to_string(EnvKind k) {
    return k == EnvKind::BlocksTouch ? "blocks-touch" : "blocks-choose";
}

EnvKind env_kind_from_string(const std::string& s) {
    if (s == "blocks-touch" || s == "BlocksTouch") return EnvKind::BlocksTouch;
    if (s == "blocks-choose" || s == "BlocksChoose") return EnvKind::BlocksChoose;
    throw ConfigError("unknown env '" + s + "' (expected blocks-touch or blocks-choose)");
}

std::vector<Color> layout_colors(EnvKind kind) {
    if (kind == EnvKind::BlocksTouch) return {Color::Green, Color::Blue};
    return {Color::Green, Color::Blue, Color::Grey};
}

std::optional<std::pair<int, int>> ObservationLayout::grey_range() const {
    if (block_colors.empty() || block_colors.back() != Color::Grey) return std::nullopt;
    const int end = size();
    return std::make_pair(end - block_len, end);
}

std::string ObservationLayout::describe() const {
    std::ostringstream os;
    os << "robot=" << robot_len << ";block=" << block_len << ";colors=";
    for (std::size_t i = 0; i < block_colors.size(); ++i) {
        if (i) os << ',';
        os << physics::to_string(block_colors[i]);
    }
    return os.str();
}

ObservationLayout ObservationLayout::for_kind(EnvKind kind) {
    ObservationLayout l;
    l.block_colors = layout_colors(kind);
    return l;
}

ObservationLayout ObservationLayout::parse(const std::string& descriptor) {
    ObservationLayout l;
    std::istringstream is(descriptor);
    std::string part;
    bool have_colors = false;
    while (std::getline(is, part, ';')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw DomainError("layout descriptor: malformed '" + part + "'");
        const std::string key = part.substr(0, eq);
        const std::string val = part.substr(eq + 1);
        if (key == "robot") {
            l.robot_len = std::stoi(val);
        } else if (key == "block") {
            l.block_len = std::stoi(val);
        } else if (key == "colors") {
            have_colors = true;
            std::istringstream cs(val);
            std::string c;
            while (std::getline(cs, c, ',')) l.block_colors.push_back(physics::color_from_string(c));
        } else {
            throw DomainError("layout descriptor: unknown key '" + key + "'");
        }
    }
    if (!have_colors) throw DomainError("layout descriptor: missing colors");
    return l;
}

namespace {

std::size_t color_slot(Color c) {
    switch (c) {
    case Color::Red: return 0;
    case Color::Blue: return 1;
    case Color::Green: return 2;
    case Color::Grey: return 3;
    }
    return 0;
}

} // namespace

Observation encode_observation(const WorldState& state, EnvKind kind) {
    Observation obs;
    obs.layout = ObservationLayout::for_kind(kind);
    const auto& colors = obs.layout.block_colors;
    if (state.blocks.size() != colors.size())
        throw DomainError("encode_observation: expected " + std::to_string(colors.size()) + " blocks, got " +
                          std::to_string(state.blocks.size()));

    std::vector<const physics::BlockBody*> ordered;
    std::vector<bool> used(state.blocks.size(), false);
    for (Color want : colors) {
        const physics::BlockBody* found = nullptr;
        for (std::size_t i = 0; i < state.blocks.size(); ++i) {
            if (!used[i] && state.blocks[i].color == want) {
                used[i] = true;
                found = &state.blocks[i];
                break;
            }
        }
        if (!found)
            throw DomainError(std::string("encode_observation: missing ") + physics::to_string(want) + " block");
        ordered.push_back(found);
    }

    auto& v = obs.values;
    v.reserve(static_cast<std::size_t>(obs.layout.size()));
    const auto& e = state.effector;
    v.insert(v.end(), {e.pos.x, e.pos.y, e.pos.z, e.vel.x, e.vel.y, e.vel.z, e.gripper[0], e.gripper[1]});
    for (const auto* b : ordered) {
        v.insert(v.end(), {b->pos.x, b->pos.y, b->pos.z, b->yaw, b->lin_vel.x, b->lin_vel.y, b->lin_vel.z, b->ang_vel});
        std::array<double, 4> onehot{};
        onehot[color_slot(b->color)] = 1.0;
        v.insert(v.end(), onehot.begin(), onehot.end());
    }
    return obs;
}

Observation filter_grey(const Observation& obs) {
    const auto range = obs.layout.grey_range();
    if (!range) return obs;
    Observation out;
    out.layout = obs.layout;
    out.layout.block_colors.pop_back();
    out.values.assign(obs.values.begin(), obs.values.begin() + range->first);
    return out;
}

DecodedObservation decode_observation(const Observation& obs) {
    const auto& l = obs.layout;
    if (static_cast<int>(obs.values.size()) != l.size()) throw DomainError("decode_observation: size mismatch");
    const auto& v = obs.values;
    DecodedObservation d;
    d.effector_pos = {v[0], v[1], v[2]};
    d.effector_vel = {v[3], v[4], v[5]};
    d.gripper = {v[6], v[7]};
    for (std::size_t k = 0; k < l.block_colors.size(); ++k) {
        const std::size_t o = static_cast<std::size_t>(l.robot_len) + k * static_cast<std::size_t>(l.block_len);
        DecodedBlock b;
        b.pos = {v[o], v[o + 1], v[o + 2]};
        b.yaw = v[o + 3];
        b.lin_vel = {v[o + 4], v[o + 5], v[o + 6]};
        b.ang_vel = v[o + 7];
        b.color = l.block_colors[k];
        d.blocks.push_back(b);
    }
    return d;
}

} // namespace blockbench::task
