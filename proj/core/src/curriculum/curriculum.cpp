#include "blockbench/curriculum/curriculum.hpp"

#include <cmath>
#include <numbers>
#include <optional>

namespace blockbench::curriculum {

using physics::BlockBody;
using physics::Color;
using physics::Vec3;

void CurriculumSchedule::validate() const {
    if (levels.empty()) throw ConfigError("curriculum: schedule has no levels");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("curriculum: threshold must lie in (0, 1)");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const auto& l = levels[i];
        if (l.index != static_cast<int>(i)) throw ConfigError("curriculum: level indices must be 0..n-1");
        if (!(l.radius > 0.0)) throw ConfigError("curriculum: radius must be > 0");
        if (!(l.min_radius >= 0.0)) throw ConfigError("curriculum: min_radius must be >= 0");
        if (i > 0) {
            if (l.radius < levels[i - 1].radius) throw ConfigError("curriculum: radius must be non-decreasing");
            if (l.min_radius > levels[i - 1].min_radius)
                throw ConfigError("curriculum: min_radius must be non-increasing");
        }
    }
    if (levels.back().min_radius != 0.0) throw ConfigError("curriculum: last level must have min_radius 0");
}

CurriculumSchedule CurriculumSchedule::linear(int count, double r_first, double r_last, double r_min_first,
                                              double r_min_last, double threshold) {
    if (count < 1) throw ConfigError("curriculum: need at least one level");
    CurriculumSchedule s;
    s.threshold = threshold;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 1.0 : static_cast<double>(i) / (count - 1);
        s.levels.push_back({i, r_first + t * (r_last - r_first), r_min_first + t * (r_min_last - r_min_first)});
    }
    // Exact endpoints regardless of rounding.
    s.levels.back().radius = r_last;
    s.levels.back().min_radius = r_min_last;
    return s;
}

namespace {

struct Sampler {
    const SpawnSpec& spec;
    Rng& rng;
    int draws = 0;

    void count() {
        if (++draws > kRejectionCap)
            throw ConfigError("curriculum: no valid scene after " + std::to_string(kRejectionCap) +
                              " draws (infeasible level)");
    }

    Vec3 in_disc(Vec3 center, double radius) {
        count();
        const double r = radius * std::sqrt(uniform(rng, 0.0, 1.0));
        const double theta = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        return {center.x + r * std::cos(theta), center.y + r * std::sin(theta), 0.0};
    }

    Vec3 on_table() {
        count();
        const auto& t = spec.scene.table;
        const double inset = spec.scene.block_radius;
        return {uniform(rng, t.center.x - t.half_x + inset, t.center.x + t.half_x - inset),
                uniform(rng, t.center.y - t.half_y + inset, t.center.y + t.half_y - inset), 0.0};
    }
};

bool fits_on_table(const SceneConfig& sc, Vec3 p) { return sc.table.contains(p, sc.block_radius); }

bool clear_of(const SceneConfig& sc, Vec3 p, Vec3 other, double other_radius) {
    return physics::planar_distance(p, other) > sc.block_radius + other_radius + sc.contact_margin;
}

bool clear_of_effector(const SceneConfig& sc, Vec3 p) { return clear_of(sc, p, sc.arm_start, sc.effector_radius); }

BlockBody make_block(const SceneConfig& sc, int id, Color color, Vec3 p, Rng& rng) {
    BlockBody b;
    b.id = id;
    b.color = color;
    b.radius = sc.block_radius;
    b.pos = {p.x, p.y, sc.table.center.z + sc.block_radius};
    b.yaw = uniform(rng, -std::numbers::pi, std::numbers::pi);
    return b;
}

Vec3 midpoint(Vec3 a, Vec3 b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y), 0.0}; }

} // namespace

WorldState empty_scene(const SceneConfig& scene) {
    WorldState s;
    s.table = scene.table;
    s.effector.pos = scene.arm_start;
    s.effector.radius = scene.effector_radius;
    return s;
}

WorldState sample_scene(const CurriculumLevel& level, const SpawnSpec& spec, Rng& rng) {
    const auto& sc = spec.scene;
    Sampler s{spec, rng};

    Vec3 blue;
    do {
        blue = s.in_disc(sc.arm_start, level.radius);
    } while (!fits_on_table(sc, blue) || !clear_of_effector(sc, blue));

    Vec3 green;
    do {
        green = s.in_disc(blue, level.radius);
    } while (!fits_on_table(sc, green) || !clear_of_effector(sc, green) || !clear_of(sc, green, blue, sc.block_radius));

    WorldState out = empty_scene(sc);
    out.blocks.push_back(make_block(sc, kGreenId, Color::Green, green, rng));
    out.blocks.push_back(make_block(sc, kBlueId, Color::Blue, blue, rng));

    if (spec.kind == EnvKind::BlocksChoose) {
        const Vec3 mid = midpoint(blue, green);
        Vec3 grey;
        do {
            grey = s.on_table();
        } while (physics::planar_distance(grey, mid) < level.min_radius || !clear_of_effector(sc, grey) ||
                 !clear_of(sc, grey, blue, sc.block_radius) || !clear_of(sc, grey, green, sc.block_radius));
        out.blocks.push_back(make_block(sc, kGreyId, Color::Grey, grey, rng));
    }
    return out;
}

CurriculumLevel advance(const CurriculumLevel& current, const CurriculumSchedule& schedule, double rate) {
    const auto next = static_cast<std::size_t>(current.index) + 1;
    if (rate >= schedule.threshold && next < schedule.levels.size()) return schedule.levels[next];
    return current;
}

WorldState challenge_scene(const SpawnSpec& spec, Rng& rng) {
    if (spec.kind != EnvKind::BlocksChoose) throw DomainError("challenge_scene: requires blocks-choose");
    const auto& sc = spec.scene;
    Sampler s{spec, rng};

    for (;;) {
        Vec3 blue;
        do {
            blue = s.on_table();
        } while (!clear_of_effector(sc, blue));

        Vec3 green;
        do {
            green = s.on_table();
        } while (!clear_of_effector(sc, green) || physics::planar_distance(blue, green) < kChallengeSeparation);

        const Vec3 grey = midpoint(blue, green);
        if (!clear_of_effector(sc, grey)) {
            s.count();
            continue;
        }
        WorldState out = empty_scene(sc);
        out.blocks.push_back(make_block(sc, kGreenId, Color::Green, green, rng));
        out.blocks.push_back(make_block(sc, kBlueId, Color::Blue, blue, rng));
        out.blocks.push_back(make_block(sc, kGreyId, Color::Grey, grey, rng));
        return out;
    }
}

bool satisfies_level(const WorldState& scene, const CurriculumLevel& level, const SpawnSpec& spec) {
    const auto& sc = spec.scene;
    const auto* blue = scene.find(kBlueId);
    const auto* green = scene.find(kGreenId);
    if (!blue || !green) return false;
    constexpr double eps = 1e-12;
    if (physics::planar_distance(blue->pos, sc.arm_start) > level.radius + eps) return false;
    if (physics::planar_distance(green->pos, blue->pos) > level.radius + eps) return false;
    for (const auto& b : scene.blocks) {
        if (!fits_on_table(sc, b.pos) || !clear_of_effector(sc, b.pos)) return false;
    }
    for (std::size_t i = 0; i < scene.blocks.size(); ++i)
        for (std::size_t j = i + 1; j < scene.blocks.size(); ++j)
            if (!clear_of(sc, scene.blocks[i].pos, scene.blocks[j].pos, scene.blocks[j].radius)) return false;
    if (spec.kind == EnvKind::BlocksChoose) {
        const auto* grey = scene.find(kGreyId);
        if (!grey) return false;
        if (physics::planar_distance(grey->pos, midpoint(blue->pos, green->pos)) < level.min_radius) return false;
    }
    return true;
}

} // namespace blockbench::curriculum
