#include "blockbench/agents/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "blockbench/nn/serialize.hpp"

namespace blockbench::agents {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'B', 'B', 'C', 'K'};

json net_json(const std::string& name, const nn::Mlp& net) {
    return {{"name", name}, {"widths", net.widths()}, {"activation", nn::to_string(net.activation())}};
}

json hidden_json(const std::vector<int>& hidden) { return json(hidden); }

void write(std::ostream& out, const json& header, const std::vector<const nn::Mlp*>& nets,
           const nn::RunningNormalizer& norm) {
    nn::BinaryWriter w(out);
    w.bytes(std::string(kMagic, 4));
    w.u32(kCheckpointVersion);
    w.string(header.dump());
    for (const auto* net : nets) nn::write_parameters(w, *net);
    nn::write_normalizer(w, norm);
    if (!out) throw RunError("checkpoint: write failed");
}

void check_net(const json& spec, const nn::Mlp& net) {
    if (spec.at("widths").get<std::vector<int>>() != net.widths() ||
        nn::output_activation_from_string(spec.at("activation").get<std::string>()) != net.activation())
        throw ConfigError("checkpoint: network '" + spec.at("name").get<std::string>() +
                          "' does not match its hyperparameters");
}

} // namespace

void save_checkpoint(std::ostream& out, const DdpgAgent& agent, const Metadata& meta) {
    const auto& c = agent.config();
    json header = {{"agent", "ddpg"},
                   {"layout", agent.layout().describe()},
                   {"networks",
                    {net_json("actor", agent.actor()), net_json("critic", agent.critic()),
                     net_json("target_actor", agent.target_actor()), net_json("target_critic", agent.target_critic())}},
                   {"hyperparameters",
                    {{"hidden", hidden_json(c.hidden)},
                     {"gamma", c.gamma},
                     {"tau", c.tau},
                     {"noise_scale", c.noise_scale},
                     {"random_eps", c.random_eps},
                     {"actor_lr", c.actor_lr},
                     {"critic_lr", c.critic_lr},
                     {"buffer_capacity", c.buffer_capacity},
                     {"clip_target", c.clip_target},
                     {"actor_final_scale", c.actor_final_scale}}},
                   {"metadata", meta}};
    write(out, header, {&agent.actor(), &agent.critic(), &agent.target_actor(), &agent.target_critic()},
          agent.normalizer());
}

void save_checkpoint(std::ostream& out, const PggdAgent& agent, const Metadata& meta) {
    const auto& c = agent.config();
    json header = {{"agent", "pggd"},
                   {"layout", agent.layout().describe()},
                   {"networks", {net_json("policy", agent.policy())}},
                   {"hyperparameters",
                    {{"hidden", hidden_json(c.hidden)},
                     {"learning_rate", c.learning_rate},
                     {"gamma", c.gamma},
                     {"importance_clip", c.importance_clip},
                     {"buffer_capacity", c.buffer_capacity},
                     {"final_scale", c.final_scale}}},
                   {"metadata", meta}};
    write(out, header, {&agent.policy()}, agent.normalizer());
}

void save_checkpoint(const std::filesystem::path& path, const DdpgAgent& agent, const Metadata& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RunError("checkpoint: cannot open " + path.string());
    save_checkpoint(out, agent, meta);
}

void save_checkpoint(const std::filesystem::path& path, const PggdAgent& agent, const Metadata& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RunError("checkpoint: cannot open " + path.string());
    save_checkpoint(out, agent, meta);
}

const task::ObservationLayout& LoadedCheckpoint::layout() const {
    return std::visit([](const auto& a) -> const task::ObservationLayout& { return a.layout(); }, agent);
}

LoadedCheckpoint load_checkpoint(std::istream& in) {
    nn::BinaryReader r(in);
    try {
        if (r.bytes(4) != std::string(kMagic, 4)) throw ConfigError("checkpoint: bad magic");
        const auto version = r.u32();
        if (version != kCheckpointVersion)
            throw ConfigError("checkpoint: unsupported version " + std::to_string(version));
        const json header = json::parse(r.string());
        const auto type = header.at("agent").get<std::string>();
        const auto layout = task::ObservationLayout::parse(header.at("layout").get<std::string>());
        const auto& hp = header.at("hyperparameters");
        const auto& nets = header.at("networks");
        Metadata meta = header.at("metadata").get<Metadata>();
        Rng scratch(0);

        if (type == "ddpg") {
            DdpgConfig c;
            c.hidden = hp.at("hidden").get<std::vector<int>>();
            c.gamma = hp.at("gamma").get<double>();
            c.tau = hp.at("tau").get<double>();
            c.noise_scale = hp.at("noise_scale").get<double>();
            c.random_eps = hp.at("random_eps").get<double>();
            c.actor_lr = hp.at("actor_lr").get<double>();
            c.critic_lr = hp.at("critic_lr").get<double>();
            c.buffer_capacity = hp.at("buffer_capacity").get<std::size_t>();
            c.clip_target = hp.at("clip_target").get<bool>();
            c.actor_final_scale = hp.at("actor_final_scale").get<double>();
            DdpgAgent agent(layout, c, scratch);
            nn::Mlp* order[] = {&agent.actor(), &agent.critic(), &agent.target_actor(), &agent.target_critic()};
            if (nets.size() != 4) throw ConfigError("checkpoint: ddpg needs four networks");
            for (std::size_t i = 0; i < 4; ++i) {
                check_net(nets[i], *order[i]);
                nn::read_parameters(r, *order[i]);
            }
            nn::read_normalizer(r, agent.normalizer());
            return {std::move(agent), std::move(meta)};
        }
        if (type == "pggd") {
            PggdConfig c;
            c.hidden = hp.at("hidden").get<std::vector<int>>();
            c.learning_rate = hp.at("learning_rate").get<double>();
            c.gamma = hp.at("gamma").get<double>();
            c.importance_clip = hp.at("importance_clip").get<double>();
            c.buffer_capacity = hp.at("buffer_capacity").get<std::size_t>();
            c.final_scale = hp.at("final_scale").get<double>();
            PggdAgent agent(layout, c, scratch);
            if (nets.size() != 1) throw ConfigError("checkpoint: pggd needs one network");
            check_net(nets[0], agent.policy());
            nn::read_parameters(r, agent.policy());
            nn::read_normalizer(r, agent.normalizer());
            return {std::move(agent), std::move(meta)};
        }
        throw ConfigError("checkpoint: unknown agent type '" + type + "'");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("checkpoint: malformed header: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("checkpoint: ") + e.what());
    }
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("checkpoint: cannot open " + path.string());
    return load_checkpoint(in);
}

DdpgAgent load_ddpg(const std::filesystem::path& path, const task::ObservationLayout& expected) {
    auto loaded = load_checkpoint(path);
    if (!loaded.is_ddpg()) throw ConfigError("checkpoint " + path.string() + " is not a ddpg agent");
    if (loaded.layout() != expected)
        throw ConfigError("checkpoint layout " + loaded.layout().describe() + " does not match expected " +
                          expected.describe());
    return std::get<DdpgAgent>(std::move(loaded.agent));
}

} // namespace blockbench::agents
