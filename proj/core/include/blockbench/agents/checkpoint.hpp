#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>

#include "blockbench/agents/ddpg.hpp"
#include "blockbench/agents/pggd.hpp"

namespace blockbench::agents {

/// Free-form string pairs stored alongside the weights (the run config).
using Metadata = std::map<std::string, std::string>;

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Checkpoint layout:
///   "BBCK" | u32 version | u64 length + JSON header | f64 parameters | normalizer
/// The header names the agent type, the observation layout descriptor, each
/// network's widths and activation, the hyperparameters and the metadata.
/// Parameters follow in header order, little-endian, layer by layer; the
/// normalizer (count, mean, variance) comes last.
void save_checkpoint(std::ostream& out, const DdpgAgent& agent, const Metadata& meta = {});
void save_checkpoint(std::ostream& out, const PggdAgent& agent, const Metadata& meta = {});
void save_checkpoint(const std::filesystem::path& path, const DdpgAgent& agent, const Metadata& meta = {});
void save_checkpoint(const std::filesystem::path& path, const PggdAgent& agent, const Metadata& meta = {});

struct LoadedCheckpoint {
    std::variant<DdpgAgent, PggdAgent> agent;
    Metadata metadata;

    [[nodiscard]] const task::ObservationLayout& layout() const;
    [[nodiscard]] bool is_ddpg() const { return std::holds_alternative<DdpgAgent>(agent); }
};

/// Throws ConfigError on a bad magic, unknown version or malformed header.
LoadedCheckpoint load_checkpoint(std::istream& in);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Loads a DDPG checkpoint and checks its layout against `expected`.
DdpgAgent load_ddpg(const std::filesystem::path& path, const task::ObservationLayout& expected);

} // namespace blockbench::agents
