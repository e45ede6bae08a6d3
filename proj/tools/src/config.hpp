#pragma once

// Strict readers for command configs: every object is checked against its
// allowed keys and every value against its type before anything runs.

#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "toda/geometry.hpp"
#include "toda/meanfield.hpp"
#include "toda/solver.hpp"

namespace toda::cli {

using nlohmann::json;

/// Raises ValidationError for keys outside `allowed` (or a non-object).
void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where);

double get_number(const json& j, const char* key, std::optional<double> fallback, const std::string& where);
int get_int(const json& j, const char* key, std::optional<int> fallback, const std::string& where);
bool get_bool(const json& j, const char* key, bool fallback, const std::string& where);
std::string get_string(const json& j, const char* key, std::optional<std::string> fallback, const std::string& where);
std::vector<double> get_numbers(const json& j, const char* key, std::optional<std::vector<double>> fallback,
                                const std::string& where);
const json& get_object(const json& j, const char* key, const std::string& where);

SolveOptions solve_options(const json& j);
TorusGrid torus_grid(const json& j);
PolarGrid polar_grid(const json& j);

/// "h": list of preset strings, one per component (a single entry is repeated).
std::vector<WeightPreset> weight_presets(const json& j, int rank, double length);
std::vector<WeightFunction> weight_functions(const std::vector<WeightPreset>& p);

/// Parses "1.5,2,3" into numbers.
std::vector<double> parse_list(const std::string& text, const std::string& what);

/// Reads a JSON file, mapping parse failures to ValidationError.
json read_json_file(const std::string& path);

}  // namespace toda::cli
