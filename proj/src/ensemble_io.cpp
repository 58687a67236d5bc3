#include "sobolab/ensemble_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace sobolab {

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<char, 8> bytes{};
    for (int i = 0; i < 8; ++i) bytes[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFFu);
    out.write(bytes.data(), bytes.size());
}

std::uint64_t get_u64(std::istream& in) {
    std::array<unsigned char, 8> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!in) throw std::runtime_error("ensemble file is truncated");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[static_cast<std::size_t>(i)];
    return v;
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void write_ensemble(std::ostream& out, const PathEnsemble& e) {
    put_u64(out, e.modes);
    put_u64(out, e.grid.steps());
    put_u64(out, e.nPaths);
    put_u64(out, e.seed);
    put_f64(out, e.grid.horizon());
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(e.values.data()),
                  static_cast<std::streamsize>(e.values.size() * sizeof(double)));
    } else {
        for (double v : e.values) put_f64(out, v);
    }
    if (!out) throw std::runtime_error("failed to write ensemble");
}

void write_ensemble(const std::filesystem::path& file, const PathEnsemble& e) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
    write_ensemble(out, e);
}

PathEnsemble read_ensemble(std::istream& in) {
    const std::uint64_t modes = get_u64(in);
    const std::uint64_t steps = get_u64(in);
    const std::uint64_t paths = get_u64(in);
    const std::uint64_t seed = get_u64(in);
    const double horizon = get_f64(in);
    if (modes == 0 || paths == 0) throw std::runtime_error("ensemble header has zero modes or paths");

    PathEnsemble e;
    e.grid = TimeGrid(horizon, steps);
    e.modes = modes;
    e.nPaths = paths;
    e.seed = seed;
    const std::uint64_t count = paths * (steps + 1) * modes;
    if (count / paths / (steps + 1) != modes) throw std::runtime_error("ensemble header overflows");
    e.values.resize(count);
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(e.values.data()), static_cast<std::streamsize>(count * sizeof(double)));
        if (!in) throw std::runtime_error("ensemble file is truncated");
    } else {
        for (auto& v : e.values) v = get_f64(in);
    }
    return e;
}

PathEnsemble read_ensemble(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    return read_ensemble(in);
}

}  // namespace sobolab
