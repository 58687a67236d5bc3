#pragma once

#include <filesystem>
#include <iosfwd>

#include "sobolab/path_sampler.hpp"

namespace sobolab {

// Flat little-endian dump:
//   u64 modes, u64 steps, u64 nPaths, u64 seed, f64 horizon,
//   then nPaths * (steps + 1) * modes f64 values, path-major, time-major, mode-minor.

void write_ensemble(std::ostream& out, const PathEnsemble& ensemble);
void write_ensemble(const std::filesystem::path& file, const PathEnsemble& ensemble);

/// Throws std::runtime_error on truncated or inconsistent input.
PathEnsemble read_ensemble(std::istream& in);
PathEnsemble read_ensemble(const std::filesystem::path& file);

}  // namespace sobolab
