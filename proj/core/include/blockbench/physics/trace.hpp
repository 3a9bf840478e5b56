#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "blockbench/physics/world.hpp"

namespace blockbench::physics {

/// One line of a newline-delimited JSON trace. Step 0 carries the initial
/// state and no action; step k carries the action applied at step k-1 and
/// the resulting state.
struct TraceRecord {
    int step = 0;
    WorldState state;
    std::optional<Action> action;
    std::vector<ContactPair> contacts;
};

/// First line of every trace file; holds what is needed to re-simulate.
struct TraceHeader {
    PhysicsParams params;
    std::string env;
    int episode = 0;
};

std::string to_json_line(const TraceHeader& header);
std::string to_json_line(const TraceRecord& record);

/// Parses a step line. Doubles round-trip bit-exactly.
TraceRecord parse_trace_record(const std::string& line);
TraceHeader parse_trace_header(const std::string& line);

/// Appends records for one episode to an NDJSON stream.
class TraceWriter {
public:
    explicit TraceWriter(std::ostream& out) : out_(out) {}

    void header(const TraceHeader& h);
    void record(const TraceRecord& r);

private:
    std::ostream& out_;
};

/// An episode read back from a trace stream.
struct TraceEpisode {
    TraceHeader header;
    std::vector<TraceRecord> records;
};

/// Reads every episode in the stream. A header line starts a new episode.
std::vector<TraceEpisode> read_trace(std::istream& in);

} // namespace blockbench::physics
