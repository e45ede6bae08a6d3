#pragma once

// Field snapshots: a JSON header plus a companion flat binary file of
// row-major little-endian float64 values, components concatenated.
//
//   { "grid": {...}, "components": N, "gauge": "zero-mean",
//     "dtype": "f64-le", "bin": "u.bin" }
//
// The "bin" path is stored relative to the header's directory.

#include <filesystem>
#include <string>

#include "toda/geometry.hpp"

namespace toda {

struct Snapshot {
  Grid grid;
  Field field;
};

/// Writes `<header>` and its binary companion (same stem, ".bin").
void write_snapshot(const std::filesystem::path& header, const Grid& grid, const Field& field);
Snapshot read_snapshot(const std::filesystem::path& header);

/// JSON text for a grid description (used in headers and run manifests).
std::string grid_to_json(const Grid& grid);
Grid grid_from_json(const std::string& json_text);

}  // namespace toda
