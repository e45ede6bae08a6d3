#include "config.hpp"

#include <fstream>
#include <sstream>

#include "toda/errors.hpp"

namespace toda::cli {

namespace {

const json& field(const json& j, const char* key) { return j.at(key); }

[[noreturn]] void type_error(const std::string& where, const char* key, const char* expected) {
  throw ValidationError(where + "." + key + " must be " + expected);
}

}  // namespace

void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ValidationError("unknown key '" + key + "' in " + where);
  }
}

double get_number(const json& j, const char* key, std::optional<double> fallback, const std::string& where) {
  if (!j.contains(key)) {
    if (!fallback) throw ValidationError(where + "." + key + " is required");
    return *fallback;
  }
  const auto& v = field(j, key);
  if (!v.is_number()) type_error(where, key, "a number");
  return v.get<double>();
}

int get_int(const json& j, const char* key, std::optional<int> fallback, const std::string& where) {
  if (!j.contains(key)) {
    if (!fallback) throw ValidationError(where + "." + key + " is required");
    return *fallback;
  }
  const auto& v = field(j, key);
  if (!v.is_number_integer()) type_error(where, key, "an integer");
  return v.get<int>();
}

bool get_bool(const json& j, const char* key, bool fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = field(j, key);
  if (!v.is_boolean()) type_error(where, key, "a boolean");
  return v.get<bool>();
}

std::string get_string(const json& j, const char* key, std::optional<std::string> fallback, const std::string& where) {
  if (!j.contains(key)) {
    if (!fallback) throw ValidationError(where + "." + key + " is required");
    return *fallback;
  }
  const auto& v = field(j, key);
  if (!v.is_string()) type_error(where, key, "a string");
  return v.get<std::string>();
}

std::vector<double> get_numbers(const json& j, const char* key, std::optional<std::vector<double>> fallback,
                                const std::string& where) {
  if (!j.contains(key)) {
    if (!fallback) throw ValidationError(where + "." + key + " is required");
    return *fallback;
  }
  const auto& v = field(j, key);
  if (!v.is_array()) type_error(where, key, "an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) type_error(where, key, "an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

const json& get_object(const json& j, const char* key, const std::string& where) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  const auto& v = field(j, key);
  if (!v.is_object()) type_error(where, key, "an object");
  return v;
}

SolveOptions solve_options(const json& j) {
  const std::string w = "solver";
  require_keys(j,
               {"dt0", "dt_max", "tol_res", "max_iters", "newton_switch_res", "shrink", "grow", "armijo", "newton",
                "max_newton", "gmres_restart", "gmres_max_iters"},
               w);
  SolveOptions o;
  o.dt0 = get_number(j, "dt0", o.dt0, w);
  o.dt_max = get_number(j, "dt_max", o.dt_max, w);
  o.tol_res = get_number(j, "tol_res", o.tol_res, w);
  o.max_iters = get_int(j, "max_iters", o.max_iters, w);
  o.newton_switch_res = get_number(j, "newton_switch_res", o.newton_switch_res, w);
  o.shrink = get_number(j, "shrink", o.shrink, w);
  o.grow = get_number(j, "grow", o.grow, w);
  o.armijo = get_number(j, "armijo", o.armijo, w);
  o.newton = get_bool(j, "newton", o.newton, w);
  o.max_newton = get_int(j, "max_newton", o.max_newton, w);
  o.gmres_restart = get_int(j, "gmres_restart", o.gmres_restart, w);
  o.gmres_max_iters = get_int(j, "gmres_max_iters", o.gmres_max_iters, w);
  o.validate();
  return o;
}

TorusGrid torus_grid(const json& j) {
  require_keys(j, {"n", "length"}, "grid");
  return TorusGrid(get_int(j, "n", 128, "grid"), get_number(j, "length", 1.0, "grid"));
}

PolarGrid polar_grid(const json& j) {
  const std::string w = "grid";
  require_keys(j, {"r_in", "r_out", "n_r", "n_t", "spacing"}, w);
  const std::string sp = get_string(j, "spacing", "uniform", w);
  if (sp != "uniform" && sp != "geometric") throw ValidationError("grid.spacing must be uniform or geometric");
  return PolarGrid(get_number(j, "r_in", 1.0, w), get_number(j, "r_out", 2.0, w), get_int(j, "n_r", 48, w),
                   get_int(j, "n_t", 64, w), sp == "uniform" ? RadialSpacing::uniform : RadialSpacing::geometric);
}

std::vector<WeightPreset> weight_presets(const json& j, int rank, double length) {
  std::vector<std::string> specs;
  if (!j.contains("h")) {
    specs.assign(static_cast<std::size_t>(rank), "const");
  } else {
    const auto& v = j.at("h");
    if (v.is_string()) {
      specs.assign(static_cast<std::size_t>(rank), v.get<std::string>());
    } else if (v.is_array()) {
      for (const auto& x : v) {
        if (!x.is_string()) throw ValidationError("h must be a preset string or a list of them");
        specs.push_back(x.get<std::string>());
      }
      if (specs.size() == 1) specs.assign(static_cast<std::size_t>(rank), specs.front());
    } else {
      throw ValidationError("h must be a preset string or a list of them");
    }
  }
  if (static_cast<int>(specs.size()) != rank) throw ValidationError("h needs one preset per component");
  std::vector<WeightPreset> out;
  for (const auto& s : specs) out.push_back(parse_weight_preset(s, length));
  return out;
}

std::vector<WeightFunction> weight_functions(const std::vector<WeightPreset>& p) {
  std::vector<WeightFunction> out;
  for (const auto& x : p) out.push_back(x.function());
  return out;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ValidationError("bad number '" + item + "' in " + what);
    }
  }
  if (out.empty()) throw ValidationError(what + " is empty");
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("JSON parse error in " + path + ": " + e.what());
  }
}

}  // namespace toda::cli
