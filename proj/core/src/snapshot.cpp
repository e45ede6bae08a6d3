#include "toda/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "toda/errors.hpp"

namespace toda {

namespace {

using nlohmann::json;

json grid_json(const Grid& grid) {
  return std::visit(
      [](const auto& g) -> json {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, TorusGrid>) {
          return {{"kind", "torus"}, {"n", g.n()}, {"length", g.length()}, {"unit_measure", g.unit_measure()}};
        } else {
          auto circle = [](const CircleCondition& c) {
            return json{{"dirichlet", c.dirichlet}, {"value", c.value}};
          };
          return {{"kind", "polar"},
                  {"r_in", g.r_in()},
                  {"r_out", g.r_out()},
                  {"n_r", g.n_r()},
                  {"n_t", g.n_t()},
                  {"spacing", g.spacing() == RadialSpacing::uniform ? "uniform" : "geometric"},
                  {"inner", circle(g.inner())},
                  {"outer", circle(g.outer())}};
        }
      },
      grid);
}

Grid parse_grid(const json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "torus")
      return TorusGrid(j.at("n").get<int>(), j.at("length").get<double>(), j.value("unit_measure", false));
    if (kind == "polar") {
      auto circle = [&](const char* key) {
        CircleCondition c;
        if (j.contains(key)) {
          c.dirichlet = j.at(key).value("dirichlet", true);
          c.value = j.at(key).value("value", 0.0);
        }
        return c;
      };
      const std::string sp = j.value("spacing", std::string("uniform"));
      if (sp != "uniform" && sp != "geometric") throw ValidationError("unknown radial spacing '" + sp + "'");
      return PolarGrid(j.at("r_in").get<double>(), j.at("r_out").get<double>(), j.at("n_r").get<int>(),
                       j.at("n_t").get<int>(),
                       sp == "uniform" ? RadialSpacing::uniform : RadialSpacing::geometric, circle("inner"),
                       circle("outer"));
    }
    throw ValidationError("unknown grid kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed grid description: ") + e.what());
  }
}

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
  return r;
}

}  // namespace

std::string grid_to_json(const Grid& grid) { return grid_json(grid).dump(); }

Grid grid_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("grid JSON parse error: ") + e.what());
  }
  return parse_grid(j);
}

void write_snapshot(const std::filesystem::path& header, const Grid& grid, const Field& field) {
  const std::size_t nodes = grid_size(grid);
  for (const auto& c : field.components)
    if (c.size() != nodes) throw InvalidArgument("snapshot component size does not match grid");
  std::filesystem::path bin = header;
  bin.replace_extension(".bin");
  {
    std::ofstream out(bin, std::ios::binary);
    if (!out) throw ValidationError("cannot open " + bin.string() + " for writing");
    for (const auto& c : field.components) {
      for (double v : c) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        bits = to_le(bits);
        out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
      }
    }
    if (!out) throw ValidationError("write failed for " + bin.string());
  }
  json j{{"grid", grid_json(grid)},
         {"components", field.rank()},
         {"gauge", to_string(field.gauge)},
         {"dtype", "f64-le"},
         {"bin", bin.filename().string()}};
  std::ofstream out(header);
  if (!out) throw ValidationError("cannot open " + header.string() + " for writing");
  out << j.dump(2) << '\n';
}

Snapshot read_snapshot(const std::filesystem::path& header) {
  std::ifstream in(header);
  if (!in) throw ValidationError("cannot open snapshot header " + header.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("snapshot header parse error: ") + e.what());
  }
  for (const char* key : {"grid", "components", "gauge", "dtype", "bin"})
    if (!j.contains(key)) throw ValidationError(std::string("snapshot header missing key '") + key + "'");
  if (j.at("dtype").get<std::string>() != "f64-le") throw ValidationError("unsupported snapshot dtype");
  Snapshot snap{parse_grid(j.at("grid")), {}};
  const int rank = j.at("components").get<int>();
  if (rank < 1) throw ValidationError("snapshot must have at least one component");
  const std::size_t nodes = grid_size(snap.grid);
  snap.field = Field(rank, nodes, gauge_from_string(j.at("gauge").get<std::string>()));
  const std::filesystem::path bin = header.parent_path() / j.at("bin").get<std::string>();
  std::ifstream bin_in(bin, std::ios::binary | std::ios::ate);
  if (!bin_in) throw ValidationError("cannot open snapshot data " + bin.string());
  const auto bytes = static_cast<std::size_t>(bin_in.tellg());
  if (bytes != nodes * static_cast<std::size_t>(rank) * 8)
    throw ValidationError("snapshot data size does not match header");
  bin_in.seekg(0);
  for (auto& c : snap.field.components) {
    for (double& v : c) {
      std::uint64_t bits;
      bin_in.read(reinterpret_cast<char*>(&bits), sizeof bits);
      bits = to_le(bits);
      std::memcpy(&v, &bits, sizeof bits);
    }
  }
  return snap;
}

}  // namespace toda
