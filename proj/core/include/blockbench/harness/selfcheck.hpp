#pragma once

#include <vector>

#include "blockbench/nn/gradcheck.hpp"

namespace blockbench::harness {

/// Finite-difference checks of every network the agents build: DDPG actor
/// and critic and the PGGD policy, for both observation layouts and the
/// {64, 64} and {256, 256, 256} hidden stacks. Wide networks, or all of
/// them with `quick`, sample 40 parameters per layer instead of all.
std::vector<nn::GradCheckResult> check_agent_networks(bool quick, Rng& rng);

} // namespace blockbench::harness
