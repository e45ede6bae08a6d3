#pragma once

// Append-only run directories. Each run writes its outputs plus a
// manifest.json (command, canonical config, config hash, version, wall time,
// list of outputs). summary.json holds only deterministic values.

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "toda/geometry.hpp"

namespace toda::cli {

using nlohmann::json;

/// FNV-1a 64 of the canonical (sorted-key) dump, as 16 hex digits.
std::string config_hash(const json& config);

class RunDir {
 public:
  /// Fails with ValidationError if `path` exists and is non-empty, unless
  /// `force` is set, in which case its previous contents are removed.
  RunDir(std::filesystem::path path, bool force, std::string command, json config);

  const std::filesystem::path& path() const noexcept { return path_; }

  void write_json(const std::string& name, const json& j);
  /// Header row then rows, comma-separated, 17 significant digits.
  void write_csv(const std::string& name, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows);
  void write_text(const std::string& name, const std::string& text);
  void write_snapshot(const std::string& name, const Grid& grid, const Field& field);

  /// Writes manifest.json with the given status.
  void finish(const std::string& status);

 private:
  std::filesystem::path path_;
  std::string command_;
  json config_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

std::string format_double(double v);

}  // namespace toda::cli
