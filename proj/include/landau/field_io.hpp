#pragma once

// Density snapshots: a CSV of (v1, v2, f) node triples plus a JSON sidecar
// holding the grid, the time and the anisotropy.

#include <filesystem>
#include <optional>

#include "landau/limit_solver.hpp"

namespace landau {

struct FieldFile {
  DensityField field;
  std::optional<Vec> anisotropy;
};

/// Writes <stem>.csv and <stem>.json. Values round-trip bit for bit.
void write_field(const std::filesystem::path& stem, const DensityField& field,
                 const MomentState* moments = nullptr);

/// Reads a snapshot given either file of the pair.
FieldFile read_field(const std::filesystem::path& path);

}  // namespace landau
