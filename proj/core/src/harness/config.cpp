#include "blockbench/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

namespace blockbench::harness {

const char* to_string(Algorithm a) {
    switch (a) {
    case Algorithm::Ddpg: return "ddpg";
    case Algorithm::Pggd: return "pggd";
    case Algorithm::PggdAggrevated: return "pggd-aggrevated";
    }
    return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "ddpg") return Algorithm::Ddpg;
    if (s == "pggd") return Algorithm::Pggd;
    if (s == "pggd-aggrevated" || s == "pggd+aggrevated") return Algorithm::PggdAggrevated;
    throw ConfigError("unknown algorithm '" + s + "' (expected ddpg, pggd or pggd-aggrevated)");
}

void TrainConfig::validate() const {
    auto positive = [](int v, const char* name) {
        if (v < 1) throw ConfigError(std::string(name) + " must be >= 1");
    };
    if (epochs < 0) throw ConfigError("train.epochs must be >= 0");
    positive(cycles, "train.cycles");
    positive(batches, "train.batches");
    positive(rollouts, "train.rollouts");
    positive(workers, "train.workers");
    positive(batch_size, "train.batch_size");
    positive(horizon, "train.horizon");
    positive(eval_episodes, "train.eval_episodes");
    if (checkpoint_every < 0) throw ConfigError("train.checkpoint_every must be >= 0");
    physics.validate();
    schedule.validate();
    if (!(scene.block_radius > 0.0) || !(scene.effector_radius > 0.0))
        throw ConfigError("scene radii must be > 0");
    if (!(scene.table.half_x > scene.block_radius) || !(scene.table.half_y > scene.block_radius))
        throw ConfigError("scene table must be larger than a block");
    if (!(ddpg.tau > 0.0 && ddpg.tau <= 1.0)) throw ConfigError("agent.tau must lie in (0, 1]");
    if (!(ddpg.gamma >= 0.0 && ddpg.gamma < 1.0)) throw ConfigError("agent.gamma must lie in [0, 1)");
    if (!(imitation.t0 > 0.0)) throw ConfigError("imitation.t0 must be > 0");
    if (!(imitation.beta0 >= 0.0 && imitation.beta0 <= 1.0)) throw ConfigError("imitation.beta0 must lie in [0, 1]");
    if (algorithm == Algorithm::PggdAggrevated) {
        if (env != task::EnvKind::BlocksChoose)
            throw ConfigError("pggd-aggrevated runs on blocks-choose (the expert sees the grey-filtered view)");
        if (imitation.expert == ExpertKind::Trained && imitation.expert_path.empty())
            throw ConfigError("pggd-aggrevated with a trained expert needs imitation.expert_path");
    }
}

namespace {

double parse_double(const std::string& key, const std::string& s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw ConfigError("config: '" + key + "' expects a number, got '" + s + "'");
    return v;
}

long long parse_int(const std::string& key, const std::string& s) {
    long long v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw ConfigError("config: '" + key + "' expects an integer, got '" + s + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1" || s == "on") return true;
    if (s == "false" || s == "0" || s == "off") return false;
    throw ConfigError("config: '" + key + "' expects true/false, got '" + s + "'");
}

std::vector<double> parse_doubles(const std::string& key, const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError("config: '" + key + "' expects a comma-separated list");
    return out;
}

std::vector<int> parse_ints(const std::string& key, const std::string& s) {
    std::vector<int> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) out.push_back(static_cast<int>(parse_int(key, item)));
    if (out.empty()) throw ConfigError("config: '" + key + "' expects a comma-separated list");
    return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_floating_point_v<T>)
            out += format_double(v[i]);
        else
            out += std::to_string(v[i]);
    }
    return out;
}

struct Field {
    std::function<void(TrainConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const TrainConfig&)> get;
};

#define DOUBLE_FIELD(expr)                                                                                \
    Field {                                                                                               \
        [](TrainConfig& c, const std::string& k, const std::string& v) { c.expr = parse_double(k, v); }, \
            [](const TrainConfig& c) { return format_double(c.expr); }                                       \
    }
#define INT_FIELD(expr)                                                                                   \
    Field {                                                                                               \
        [](TrainConfig& c, const std::string& k, const std::string& v) {                                  \
            c.expr = static_cast<decltype(c.expr)>(parse_int(k, v));                                      \
        },                                                                                                \
            [](const TrainConfig& c) { return std::to_string(c.expr); }                                   \
    }
#define BOOL_FIELD(expr)                                                                                  \
    Field {                                                                                               \
        [](TrainConfig& c, const std::string& k, const std::string& v) { c.expr = parse_bool(k, v); },   \
            [](const TrainConfig& c) { return std::string(c.expr ? "true" : "false"); }                   \
    }

const std::map<std::string, Field>& registry() {
    static const std::map<std::string, Field> fields = {
        {"run.env", {[](TrainConfig& c, const std::string&, const std::string& v) { c.env = task::env_kind_from_string(v); },
                     [](const TrainConfig& c) { return std::string(task::to_string(c.env)); }}},
        {"run.algo", {[](TrainConfig& c, const std::string&, const std::string& v) { c.algorithm = algorithm_from_string(v); },
                      [](const TrainConfig& c) { return std::string(to_string(c.algorithm)); }}},
        {"train.epochs", INT_FIELD(epochs)},
        {"train.cycles", INT_FIELD(cycles)},
        {"train.batches", INT_FIELD(batches)},
        {"train.rollouts", INT_FIELD(rollouts)},
        {"train.workers", INT_FIELD(workers)},
        {"train.batch_size", INT_FIELD(batch_size)},
        {"train.seed", INT_FIELD(seed)},
        {"train.horizon", INT_FIELD(horizon)},
        {"train.eval_episodes", INT_FIELD(eval_episodes)},
        {"train.checkpoint_every", INT_FIELD(checkpoint_every)},
        {"physics.dt", DOUBLE_FIELD(physics.dt)},
        {"physics.v_max", DOUBLE_FIELD(physics.v_max)},
        {"physics.block_damping", DOUBLE_FIELD(physics.block_damping)},
        {"physics.contact_margin", DOUBLE_FIELD(physics.contact_margin)},
        {"physics.workspace_margin", DOUBLE_FIELD(physics.workspace_margin)},
        {"physics.workspace_height", DOUBLE_FIELD(physics.workspace_height)},
        {"physics.solver_iterations", INT_FIELD(physics.solver_iterations)},
        {"scene.table_center_x", DOUBLE_FIELD(scene.table.center.x)},
        {"scene.table_center_y", DOUBLE_FIELD(scene.table.center.y)},
        {"scene.table_height", DOUBLE_FIELD(scene.table.center.z)},
        {"scene.table_half_x", DOUBLE_FIELD(scene.table.half_x)},
        {"scene.table_half_y", DOUBLE_FIELD(scene.table.half_y)},
        {"scene.block_radius", DOUBLE_FIELD(scene.block_radius)},
        {"scene.effector_radius", DOUBLE_FIELD(scene.effector_radius)},
        {"scene.arm_start_x", DOUBLE_FIELD(scene.arm_start.x)},
        {"scene.arm_start_y", DOUBLE_FIELD(scene.arm_start.y)},
        {"scene.arm_start_z", DOUBLE_FIELD(scene.arm_start.z)},
        {"curriculum.h", DOUBLE_FIELD(schedule.threshold)},
        {"curriculum.advance_on",
         {[](TrainConfig& c, const std::string& k, const std::string& v) {
              if (v != "test" && v != "train") throw ConfigError("config: '" + k + "' expects test or train");
              c.advance_on_test = v == "test";
          },
          [](const TrainConfig& c) { return std::string(c.advance_on_test ? "test" : "train"); }}},
        {"agent.hidden",
         {[](TrainConfig& c, const std::string& k, const std::string& v) { c.ddpg.hidden = parse_ints(k, v); },
          [](const TrainConfig& c) { return join(c.ddpg.hidden); }}},
        {"agent.gamma", DOUBLE_FIELD(ddpg.gamma)},
        {"agent.tau", DOUBLE_FIELD(ddpg.tau)},
        {"agent.noise_scale", DOUBLE_FIELD(ddpg.noise_scale)},
        {"agent.random_eps", DOUBLE_FIELD(ddpg.random_eps)},
        {"agent.actor_lr", DOUBLE_FIELD(ddpg.actor_lr)},
        {"agent.critic_lr", DOUBLE_FIELD(ddpg.critic_lr)},
        {"agent.buffer_capacity", INT_FIELD(ddpg.buffer_capacity)},
        {"agent.clip_target", BOOL_FIELD(ddpg.clip_target)},
        {"agent.actor_final_scale", DOUBLE_FIELD(ddpg.actor_final_scale)},
        {"pggd.hidden",
         {[](TrainConfig& c, const std::string& k, const std::string& v) { c.pggd.hidden = parse_ints(k, v); },
          [](const TrainConfig& c) { return join(c.pggd.hidden); }}},
        {"pggd.learning_rate", DOUBLE_FIELD(pggd.learning_rate)},
        {"pggd.gamma", DOUBLE_FIELD(pggd.gamma)},
        {"pggd.importance_clip", DOUBLE_FIELD(pggd.importance_clip)},
        {"pggd.buffer_capacity", INT_FIELD(pggd.buffer_capacity)},
        {"pggd.final_scale", DOUBLE_FIELD(pggd.final_scale)},
        {"imitation.beta0", DOUBLE_FIELD(imitation.beta0)},
        {"imitation.t0", DOUBLE_FIELD(imitation.t0)},
        {"imitation.expert",
         {[](TrainConfig& c, const std::string& k, const std::string& v) {
              if (v == "scripted")
                  c.imitation.expert = ExpertKind::Scripted;
              else if (v == "trained")
                  c.imitation.expert = ExpertKind::Trained;
              else
                  throw ConfigError("config: '" + k + "' expects scripted or trained");
          },
          [](const TrainConfig& c) {
              return std::string(c.imitation.expert == ExpertKind::Scripted ? "scripted" : "trained");
          }}},
        {"imitation.expert_path",
         {[](TrainConfig& c, const std::string&, const std::string& v) { c.imitation.expert_path = v; },
          [](const TrainConfig& c) { return c.imitation.expert_path; }}},
        {"imitation.granularity",
         {[](TrainConfig& c, const std::string&, const std::string& v) {
              c.imitation.granularity = imitation::granularity_from_string(v);
          },
          [](const TrainConfig& c) { return std::string(imitation::to_string(c.imitation.granularity)); }}},
        {"imitation.expert_critic_advantage", BOOL_FIELD(imitation.expert_critic_advantage)},
    };
    return fields;
}

#undef DOUBLE_FIELD
#undef INT_FIELD
#undef BOOL_FIELD

// Schedule keys interact, so they are applied together after the scalar fields.
const std::vector<std::string> kScheduleKeys = {"curriculum.levels",          "curriculum.radius_first",
                                                "curriculum.radius_last",     "curriculum.min_radius_first",
                                                "curriculum.min_radius_last", "curriculum.radii",
                                                "curriculum.min_radii"};

void apply_schedule(TrainConfig& c, const KeyValues& kv) {
    auto get = [&kv](const std::string& k) -> std::optional<std::string> {
        const auto it = kv.find(k);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    const auto& cur = c.schedule.levels;
    const double threshold = c.schedule.threshold;

    if (auto radii = get("curriculum.radii")) {
        const auto r = parse_doubles("curriculum.radii", *radii);
        std::vector<double> m(r.size(), 0.0);
        if (auto mins = get("curriculum.min_radii")) m = parse_doubles("curriculum.min_radii", *mins);
        if (m.size() != r.size()) throw ConfigError("config: curriculum.radii and curriculum.min_radii differ in length");
        for (const auto& k : {"curriculum.levels", "curriculum.radius_first", "curriculum.radius_last",
                              "curriculum.min_radius_first", "curriculum.min_radius_last"})
            if (kv.count(k)) throw ConfigError(std::string("config: ") + k + " conflicts with curriculum.radii");
        curriculum::CurriculumSchedule s;
        s.threshold = threshold;
        for (std::size_t i = 0; i < r.size(); ++i) s.levels.push_back({static_cast<int>(i), r[i], m[i]});
        c.schedule = s;
        return;
    }
    if (get("curriculum.min_radii")) throw ConfigError("config: curriculum.min_radii requires curriculum.radii");

    bool any = false;
    for (const auto& k : kScheduleKeys) any = any || kv.count(k) > 0;
    if (!any) return;
    const int levels = get("curriculum.levels") ? static_cast<int>(parse_int("curriculum.levels", *get("curriculum.levels")))
                                                : static_cast<int>(cur.size());
    auto num = [&](const std::string& k, double fallback) { return get(k) ? parse_double(k, *get(k)) : fallback; };
    c.schedule = curriculum::CurriculumSchedule::linear(
        levels, num("curriculum.radius_first", cur.front().radius), num("curriculum.radius_last", cur.back().radius),
        num("curriculum.min_radius_first", cur.front().min_radius),
        num("curriculum.min_radius_last", cur.back().min_radius), threshold);
}

} // namespace

void apply_settings(TrainConfig& config, const KeyValues& settings) {
    const auto& reg = registry();
    for (const auto& [k, v] : settings) {
        if (std::find(kScheduleKeys.begin(), kScheduleKeys.end(), k) != kScheduleKeys.end()) continue;
        const auto it = reg.find(k);
        if (it == reg.end()) throw ConfigError("config: unknown key '" + k + "'");
        it->second.set(config, k, v);
    }
    apply_schedule(config, settings);
}

KeyValues parse_config_text(const std::string& text) {
    KeyValues out;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (out.count(key)) throw ConfigError("config: duplicate key '" + key + "'");
        out[key] = value;
    }
    return out;
}

KeyValues read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

KeyValues to_key_values(const TrainConfig& config) {
    KeyValues out;
    for (const auto& [k, f] : registry()) out[k] = f.get(config);
    std::vector<double> r;
    std::vector<double> m;
    for (const auto& l : config.schedule.levels) {
        r.push_back(l.radius);
        m.push_back(l.min_radius);
    }
    out["curriculum.radii"] = join(r);
    out["curriculum.min_radii"] = join(m);
    return out;
}

std::string to_config_text(const TrainConfig& config) {
    std::string out;
    for (const auto& [k, v] : to_key_values(config)) out += k + " = " + v + "\n";
    return out;
}

std::vector<std::string> known_keys() {
    std::vector<std::string> out;
    for (const auto& [k, f] : registry()) out.push_back(k);
    out.insert(out.end(), kScheduleKeys.begin(), kScheduleKeys.end());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace blockbench::harness
