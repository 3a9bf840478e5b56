#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "blockbench/nn/mlp.hpp"
#include "blockbench/nn/normalizer.hpp"

namespace blockbench::nn {

/// Little-endian binary writer for checkpoint payloads.
class BinaryWriter {
public:
    explicit BinaryWriter(std::ostream& out) : out_(out) {}

    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void bytes(const std::string& s);
    void string(const std::string& s);

private:
    std::ostream& out_;
};

class BinaryReader {
public:
    explicit BinaryReader(std::istream& in) : in_(in) {}

    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    std::string bytes(std::size_t n);
    std::string string();

private:
    std::istream& in_;
};

/// Parameters only, in layer order: W0 column-major, b0, W1, b1, ...
void write_parameters(BinaryWriter& w, const Mlp& net);
/// Reads into a network whose shape is already set.
void read_parameters(BinaryReader& r, Mlp& net);

/// count, then mean and variance vectors.
void write_normalizer(BinaryWriter& w, const RunningNormalizer& norm);
void read_normalizer(BinaryReader& r, RunningNormalizer& norm);

} // namespace blockbench::nn
