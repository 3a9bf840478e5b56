#pragma once

#include <functional>
#include <string>
#include <vector>

#include "blockbench/physics/trace.hpp"

namespace blockbench::harness {

/// True when every double in both states has the same bit pattern.
bool bitwise_equal(const physics::WorldState& a, const physics::WorldState& b);

struct ReplayStep {
    int episode = 0;
    int step = 0;
    /// State re-simulated from the previous recorded state and the logged action.
    physics::WorldState simulated;
    bool match = true;
};

struct ReplayReport {
    int episodes = 0;
    int steps = 0;
    int mismatches = 0;
    /// "episode E step K" of the first mismatch, empty when none.
    std::string first_mismatch;

    [[nodiscard]] bool ok() const { return mismatches == 0; }
};

/// Re-simulates every logged step with step_world from the previous
/// recorded state and the header's physics parameters, comparing bitwise.
ReplayReport replay(const std::vector<physics::TraceEpisode>& episodes,
                    const std::function<void(const ReplayStep&)>& on_step = {});

} // namespace blockbench::harness
