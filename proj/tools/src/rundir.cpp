#include "rundir.hpp"

#include <cstdio>
#include <fstream>
#include <locale>
#include <sstream>

#include "toda/errors.hpp"
#include "toda/snapshot.hpp"

namespace toda::cli {

namespace fs = std::filesystem;

std::string config_hash(const json& config) {
  const std::string text = config.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

RunDir::RunDir(fs::path path, bool force, std::string command, json config)
    : path_(std::move(path)), command_(std::move(command)), config_(std::move(config)),
      start_(std::chrono::steady_clock::now()) {
  std::error_code ec;
  if (fs::exists(path_)) {
    if (!fs::is_directory(path_)) throw ValidationError(path_.string() + " exists and is not a directory");
    if (!fs::is_empty(path_)) {
      if (!force) throw ValidationError("run directory " + path_.string() + " already exists; use --force");
      for (const auto& e : fs::directory_iterator(path_)) fs::remove_all(e.path());
    }
  }
  fs::create_directories(path_, ec);
  if (ec) throw ValidationError("cannot create " + path_.string() + ": " + ec.message());
}

void RunDir::write_json(const std::string& name, const json& j) {
  write_text(name, j.dump(2) + "\n");
}

void RunDir::write_csv(const std::string& name, const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
    os << "\n";
  }
  write_text(name, os.str());
}

void RunDir::write_text(const std::string& name, const std::string& text) {
  std::ofstream out(path_ / name, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + (path_ / name).string());
  out << text;
  outputs_.push_back(name);
}

void RunDir::write_snapshot(const std::string& name, const Grid& grid, const Field& field) {
  toda::write_snapshot(path_ / name, grid, field);
  outputs_.push_back(name);
  outputs_.push_back(fs::path(name).replace_extension(".bin").string());
}

void RunDir::finish(const std::string& status) {
  json m;
  m["command"] = command_;
  m["config"] = config_;
  m["config_hash"] = config_hash(config_);
  m["version"] = TODA_VERSION;
  m["status"] = status;
  m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  m["outputs"] = outputs_;
  std::ofstream out(path_ / "manifest.json", std::ios::binary);
  if (!out) throw ValidationError("cannot write manifest");
  out << m.dump(2) << "\n";
}

}  // namespace toda::cli
