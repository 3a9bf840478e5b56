#include "blockbench/nn/serialize.hpp"

#include <bit>
#include <istream>
#include <ostream>

namespace blockbench::nn {

namespace {

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    } else {
        return v;
    }
}

} // namespace

void BinaryWriter::u32(std::uint32_t v) {
    v = to_little(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void BinaryWriter::u64(std::uint64_t v) {
    v = to_little(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::bytes(const std::string& s) { out_.write(s.data(), static_cast<std::streamsize>(s.size())); }

void BinaryWriter::string(const std::string& s) {
    u64(s.size());
    bytes(s);
}

std::uint32_t BinaryReader::u32() {
    std::uint32_t v = 0;
    if (!in_.read(reinterpret_cast<char*>(&v), sizeof v)) throw DomainError("checkpoint: truncated");
    return to_little(v);
}

std::uint64_t BinaryReader::u64() {
    std::uint64_t v = 0;
    if (!in_.read(reinterpret_cast<char*>(&v), sizeof v)) throw DomainError("checkpoint: truncated");
    return to_little(v);
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::bytes(std::size_t n) {
    std::string s(n, '\0');
    if (n > 0 && !in_.read(s.data(), static_cast<std::streamsize>(n))) throw DomainError("checkpoint: truncated");
    return s;
}

std::string BinaryReader::string() {
    const auto n = u64();
    if (n > (1u << 26)) throw DomainError("checkpoint: implausible string length");
    return bytes(static_cast<std::size_t>(n));
}

void write_parameters(BinaryWriter& w, const Mlp& net) {
    for (double v : net.flatten()) w.f64(v);
}

void read_parameters(BinaryReader& r, Mlp& net) {
    std::vector<double> flat(net.parameter_count());
    for (auto& v : flat) v = r.f64();
    net.assign(flat);
}

void write_normalizer(BinaryWriter& w, const RunningNormalizer& norm) {
    w.f64(norm.count());
    for (Eigen::Index i = 0; i < norm.mean().size(); ++i) w.f64(norm.mean()(i));
    for (Eigen::Index i = 0; i < norm.variance().size(); ++i) w.f64(norm.variance()(i));
}

void read_normalizer(BinaryReader& r, RunningNormalizer& norm) {
    const double count = r.f64();
    Vector mean(norm.dim());
    Vector var(norm.dim());
    for (Eigen::Index i = 0; i < mean.size(); ++i) mean(i) = r.f64();
    for (Eigen::Index i = 0; i < var.size(); ++i) var(i) = r.f64();
    norm.set_state(std::move(mean), std::move(var), count);
}

} // namespace blockbench::nn
