#include "blockbench/physics/trace.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

namespace blockbench::physics {

using nlohmann::json;

namespace {

json vec(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec_from(const json& j) {
    if (!j.is_array() || j.size() != 3) throw DomainError("trace: expected 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json state_json(const WorldState& s) {
    json blocks = json::array();
    for (const auto& b : s.blocks) {
        blocks.push_back({{"id", b.id},
                          {"color", to_string(b.color)},
                          {"radius", b.radius},
                          {"pos", vec(b.pos)},
                          {"yaw", b.yaw},
                          {"vel", vec(b.lin_vel)},
                          {"ang_vel", b.ang_vel},
                          {"on_table", b.on_table}});
    }
    return {{"effector",
             {{"pos", vec(s.effector.pos)},
              {"vel", vec(s.effector.vel)},
              {"radius", s.effector.radius},
              {"gripper", {s.effector.gripper[0], s.effector.gripper[1]}}}},
            {"blocks", blocks},
            {"table", {{"center", vec(s.table.center)}, {"half_x", s.table.half_x}, {"half_y", s.table.half_y}}},
            {"step_count", s.step_count}};
}

WorldState state_from(const json& j) {
    WorldState s;
    const auto& e = j.at("effector");
    s.effector.pos = vec_from(e.at("pos"));
    s.effector.vel = vec_from(e.at("vel"));
    s.effector.radius = e.at("radius").get<double>();
    s.effector.gripper = {e.at("gripper")[0].get<double>(), e.at("gripper")[1].get<double>()};
    for (const auto& jb : j.at("blocks")) {
        BlockBody b;
        b.id = jb.at("id").get<int>();
        b.color = color_from_string(jb.at("color").get<std::string>());
        b.radius = jb.at("radius").get<double>();
        b.pos = vec_from(jb.at("pos"));
        b.yaw = jb.at("yaw").get<double>();
        b.lin_vel = vec_from(jb.at("vel"));
        b.ang_vel = jb.at("ang_vel").get<double>();
        b.on_table = jb.at("on_table").get<bool>();
        s.blocks.push_back(b);
    }
    const auto& t = j.at("table");
    s.table.center = vec_from(t.at("center"));
    s.table.half_x = t.at("half_x").get<double>();
    s.table.half_y = t.at("half_y").get<double>();
    s.step_count = j.at("step_count").get<int>();
    return s;
}

} // namespace

std::string to_json_line(const TraceHeader& h) {
    const auto& p = h.params;
    json j = {{"type", "header"},
              {"env", h.env},
              {"episode", h.episode},
              {"physics",
               {{"dt", p.dt},
                {"v_max", p.v_max},
                {"block_damping", p.block_damping},
                {"contact_margin", p.contact_margin},
                {"workspace_margin", p.workspace_margin},
                {"workspace_height", p.workspace_height},
                {"solver_iterations", p.solver_iterations}}}};
    return j.dump();
}

std::string to_json_line(const TraceRecord& r) {
    json contacts = json::array();
    for (const auto& c : r.contacts) contacts.push_back({c.a, c.b});
    json j = {{"type", "step"}, {"step", r.step}, {"state", state_json(r.state)}, {"contacts", contacts}};
    if (r.action) {
        const auto& v = r.action->values;
        j["action"] = {v[0], v[1], v[2], v[3]};
    } else {
        j["action"] = nullptr;
    }
    return j.dump();
}

TraceHeader parse_trace_header(const std::string& line) {
    try {
        const json j = json::parse(line);
        if (j.at("type") != "header") throw DomainError("trace: expected header line");
        TraceHeader h;
        h.env = j.at("env").get<std::string>();
        h.episode = j.at("episode").get<int>();
        const auto& p = j.at("physics");
        h.params.dt = p.at("dt").get<double>();
        h.params.v_max = p.at("v_max").get<double>();
        h.params.block_damping = p.at("block_damping").get<double>();
        h.params.contact_margin = p.at("contact_margin").get<double>();
        h.params.workspace_margin = p.at("workspace_margin").get<double>();
        h.params.workspace_height = p.at("workspace_height").get<double>();
        h.params.solver_iterations = p.at("solver_iterations").get<int>();
        return h;
    } catch (const json::exception& e) {
        throw DomainError(std::string("trace: malformed header: ") + e.what());
    }
}

TraceRecord parse_trace_record(const std::string& line) {
    try {
        const json j = json::parse(line);
        if (j.at("type") != "step") throw DomainError("trace: expected step line");
        TraceRecord r;
        r.step = j.at("step").get<int>();
        r.state = state_from(j.at("state"));
        for (const auto& c : j.at("contacts")) r.contacts.push_back({c[0].get<int>(), c[1].get<int>()});
        const auto& a = j.at("action");
        if (!a.is_null()) {
            Action act;
            for (std::size_t i = 0; i < 4; ++i) act.values[i] = a.at(i).get<double>();
            r.action = act;
        }
        return r;
    } catch (const json::exception& e) {
        throw DomainError(std::string("trace: malformed step: ") + e.what());
    }
}

void TraceWriter::header(const TraceHeader& h) { out_ << to_json_line(h) << '\n'; }

void TraceWriter::record(const TraceRecord& r) { out_ << to_json_line(r) << '\n'; }

std::vector<TraceEpisode> read_trace(std::istream& in) {
    std::vector<TraceEpisode> episodes;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.find("\"type\":\"header\"") != std::string::npos) {
            episodes.push_back({parse_trace_header(line), {}});
            continue;
        }
        if (episodes.empty()) throw DomainError("trace: step line before any header");
        episodes.back().records.push_back(parse_trace_record(line));
    }
    return episodes;
}

} // namespace blockbench::physics
