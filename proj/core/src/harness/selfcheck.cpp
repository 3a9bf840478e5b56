#include "blockbench/harness/selfcheck.hpp"

#include <string>

#include "blockbench/agents/ddpg.hpp"
#include "blockbench/agents/pggd.hpp"

namespace blockbench::harness {

std::vector<nn::GradCheckResult> check_agent_networks(bool quick, Rng& rng) {
    std::vector<nn::GradCheckResult> out;
    const std::vector<std::vector<int>> hidden_sets = {{64, 64}, {256, 256, 256}};
    for (const auto& hidden : hidden_sets) {
        for (auto kind : {task::EnvKind::BlocksTouch, task::EnvKind::BlocksChoose}) {
            const auto layout = task::ObservationLayout::for_kind(kind);
            agents::DdpgConfig dc;
            dc.hidden = hidden;
            agents::PggdConfig pc;
            pc.hidden = hidden;
            const agents::DdpgAgent d(layout, dc, rng);
            const agents::PggdAgent p(layout, pc, rng);
            nn::GradCheckOptions opt;
            opt.per_layer = hidden.front() > 64 || quick ? 40 : 0;
            std::string arch;
            for (int w : hidden) arch += (arch.empty() ? "" : "x") + std::to_string(w);
            const std::string tag = std::string(task::to_string(kind)) + "/" + arch;
            out.push_back(nn::check_gradients("ddpg-actor " + tag, d.actor(), rng, opt));
            out.push_back(nn::check_gradients("ddpg-critic " + tag, d.critic(), rng, opt));
            out.push_back(nn::check_gradients("pggd-policy " + tag, p.policy(), rng, opt));
        }
    }
    return out;
}

} // namespace blockbench::harness
