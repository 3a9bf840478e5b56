#pragma once

#include <vector>

#include "blockbench/curriculum/curriculum.hpp"
#include "blockbench/physics/world.hpp"

namespace blockbench::testing {

inline physics::BlockBody block(int id, physics::Color color, double x, double y) {
    physics::BlockBody b;
    b.id = id;
    b.color = color;
    b.pos = {x, y, 0.025};
    return b;
}

/// Effector at (ex, ey), green block then blue block, on the default table.
inline physics::WorldState scene(double ex, double ey, std::vector<physics::BlockBody> blocks) {
    physics::WorldState s;
    s.effector.pos = {ex, ey, 0.025};
    s.blocks = std::move(blocks);
    return s;
}

inline physics::WorldState touch_scene(double ex, double ey, double gx, double gy, double bx, double by) {
    return scene(ex, ey,
                 {block(curriculum::kGreenId, physics::Color::Green, gx, gy),
                  block(curriculum::kBlueId, physics::Color::Blue, bx, by)});
}

inline physics::Action action(double x, double y, double z = 0.0, double g = 0.0) {
    physics::Action a;
    a.values = {x, y, z, g};
    return a;
}

inline physics::Action random_action(Rng& rng) {
    physics::Action a;
    for (auto& v : a.values) v = uniform(rng, -1.0, 1.0);
    return a;
}

} // namespace blockbench::testing
