#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "config.hpp"
#include "toda/blowup.hpp"
#include "toda/cli.hpp"
#include "toda/entire.hpp"
#include "toda/errors.hpp"
#include "toda/holonomy.hpp"
#include "toda/meanfield.hpp"
#include "toda/snapshot.hpp"
#include "toda/solver.hpp"

namespace toda::cli {

namespace {

constexpr double kPi = std::numbers::pi;

Field random_field(int rank, const TorusGrid& grid, double amplitude, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  Field u(rank, grid.size());
  for (int i = 0; i < rank; ++i)
    for (auto& x : u[i]) x = dist(gen);
  project_zero_mean(u, grid);
  return u;
}

json solve_summary(const SolveResult& r) {
  json s;
  s["converged"] = r.converged;
  s["residual_norm"] = r.residual_norm;
  s["J"] = r.J_value;
  s["iterations"] = r.iterations;
  s["flow_iterations"] = r.flow_iterations;
  s["newton_iterations"] = r.newton_iterations;
  std::vector<double> mx;
  for (const auto& c : r.u.components) mx.push_back(*std::max_element(c.begin(), c.end()));
  s["max_u"] = mx;
  return s;
}

void write_histories(RunDir& run, const SolveResult& r) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < r.J_history.size(); ++k) rows.push_back({double(k), r.J_history[k]});
  run.write_csv("J_history.csv", {"step", "J"}, rows);
  rows.clear();
  for (std::size_t k = 0; k < r.residual_history.size(); ++k) rows.push_back({double(k), r.residual_history[k]});
  run.write_csv("residual_history.csv", {"iteration", "residual"}, rows);
}

int finish_solve(RunDir& run, const Grid& grid, const SolveResult& r, json summary, std::ostream& out) {
  run.write_snapshot("u.json", grid, r.u);
  write_histories(run, r);
  run.write_json("summary.json", summary);
  run.finish(r.converged ? "ok" : "not-converged");
  out << (r.converged ? "converged" : "NOT converged") << ": residual " << format_double(r.residual_norm) << ", J "
      << format_double(r.J_value) << "\n";
  return r.converged ? kExitOk : kExitNumeric;
}

TorusGrid snapshot_torus(const Snapshot& s) {
  const auto* t = std::get_if<TorusGrid>(&s.grid);
  if (!t) throw ValidationError("this command needs a torus snapshot");
  return *t;
}

RadialProfile profile_by_name(const std::string& name) {
  if (name == "symmetric") return symmetric_toda_bubble(0.0);
  if (name == "liouville") return liouville_bubble(0.0);
  throw ValidationError("profile must be symmetric, liouville or none");
}

}  // namespace

int cmd_solve(const json& cfg, RunDir& run, std::ostream& out) {
  require_keys(cfg, {"grid", "rho", "h", "solver", "seed", "init_amplitude"}, "config");
  const TorusGrid grid = torus_grid(get_object(cfg, "grid", "config"));
  const RhoPoint rho(get_numbers(cfg, "rho", std::nullopt, "config"));
  const auto h = WeightData::sample(weight_presets(cfg, rho.rank(), grid.length()), grid);
  const SolveOptions opts = solve_options(get_object(cfg, "solver", "config"));
  const int seed = get_int(cfg, "seed", 1, "config");
  const double amp = get_number(cfg, "init_amplitude", 0.1, "config");
  const Field u0 = random_field(rho.rank(), grid, amp, static_cast<std::uint64_t>(seed));
  SolveResult r;
  json summary;
  try {
    r = gradient_flow(u0, rho, h, grid, opts);
  } catch (const Stagnation& e) {
    r = e.best();
    summary["note"] = e.what();
  }
  summary.update(solve_summary(r));
  summary["classification"] = to_string(mt_classify(rho).kind);
  return finish_solve(run, grid, r, summary, out);
}

int cmd_dirichlet(const json& cfg, RunDir& run, std::ostream& out) {
  require_keys(cfg, {"grid", "rho", "h", "solver"}, "config");
  const PolarGrid grid = polar_grid(get_object(cfg, "grid", "config"));
  const RhoPoint rho(get_numbers(cfg, "rho", std::nullopt, "config"));
  const auto h = WeightData::sample(weight_functions(weight_presets(cfg, rho.rank(), 1.0)), grid);
  const SolveOptions opts = solve_options(get_object(cfg, "solver", "config"));
  SolveResult r;
  json summary;
  try {
    r = dirichlet_solve_system(rho, h, grid, opts);
  } catch (const Stagnation& e) {
    r = e.best();
    summary["note"] = e.what();
  }
  summary.update(solve_summary(r));
  return finish_solve(run, grid, r, summary, out);
}

int cmd_continue(const json& cfg, RunDir& run, std::ostream& out) {
  require_keys(cfg,
               {"grid", "h", "from", "to", "steps", "solver", "blowup_threshold", "mass_radius", "seed",
                "init_amplitude"},
               "config");
  const TorusGrid grid = torus_grid(get_object(cfg, "grid", "config"));
  const auto from = get_numbers(cfg, "from", std::nullopt, "config");
  const auto to = get_numbers(cfg, "to", std::nullopt, "config");
  if (from.size() != to.size()) throw ValidationError("from and to differ in length");
  const int steps = get_int(cfg, "steps", 8, "config");
  if (steps < 1) throw ValidationError("steps must be positive");
  const int rank = static_cast<int>(from.size());
  const auto presets = weight_presets(cfg, rank, grid.length());
  const auto h = WeightData::sample(presets, grid);
  ContinuationOptions opts;
  opts.solve = solve_options(get_object(cfg, "solver", "config"));
  opts.blowup_threshold = get_number(cfg, "blowup_threshold", opts.blowup_threshold, "config");
  opts.mass_radius = get_number(cfg, "mass_radius", opts.mass_radius, "config");
  std::vector<RhoPoint> path;
  for (int k = 0; k <= steps; ++k) {
    std::vector<double> r(from.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = from[i] + (to[i] - from[i]) * k / steps;
    path.emplace_back(r);
  }
  const Field u0 = random_field(rank, grid, get_number(cfg, "init_amplitude", 0.0, "config"),
                                static_cast<std::uint64_t>(get_int(cfg, "seed", 1, "config")));
  const auto branch = continuation(path, h, grid, opts, u0);

  std::vector<std::string> header{"step"};
  for (int i = 1; i <= rank; ++i) header.push_back("rho_" + std::to_string(i));
  for (int i = 1; i <= rank; ++i) header.push_back("max_u_" + std::to_string(i));
  for (int i = 1; i <= rank; ++i) header.push_back("peak_mass_" + std::to_string(i));
  for (const char* c : {"residual", "J", "converged", "blowup_suspected"}) header.push_back(c);
  std::vector<std::vector<double>> rows;
  json points = json::array();
  int converged = 0;
  for (std::size_t k = 0; k < branch.size(); ++k) {
    const auto& b = branch[k];
    std::vector<double> row{double(k)};
    row.insert(row.end(), b.rho.values().begin(), b.rho.values().end());
    row.insert(row.end(), b.max_u.begin(), b.max_u.end());
    row.insert(row.end(), b.peak_mass.begin(), b.peak_mass.end());
    row.insert(row.end(), {b.residual_norm, b.J_value, double(b.converged), double(b.blowup_suspected)});
    rows.push_back(row);
    converged += b.converged;
    json p;
    p["rho"] = b.rho.values();
    p["max_u"] = b.max_u;
    p["residual_norm"] = b.residual_norm;
    p["converged"] = b.converged;
    p["blowup_suspected"] = b.blowup_suspected;
    p["classification"] = to_string(b.classification.kind);
    if (!b.note.empty()) p["note"] = b.note;
    points.push_back(p);
  }
  run.write_csv("branch.csv", header, rows);
  json summary;
  summary["points"] = points;
  summary["converged_points"] = converged;
  if (rank == 2) {
    const auto cond = curvature_condition(h.h[0], to[1], grid);
    summary["curvature_condition"] = {{"holds", cond.holds}, {"min_value", cond.min_value}};
  }
  run.write_snapshot("u_final.json", grid, branch.back().u);
  run.write_json("summary.json", summary);
  run.finish(converged > 0 ? "ok" : "not-converged");
  out << converged << "/" << branch.size() << " continuation points converged\n";
  return converged > 0 ? kExitOk : kExitNumeric;
}

int cmd_minimax(const json& cfg, RunDir& run, std::ostream& out) {
  require_keys(cfg, {"grid", "rho", "rho1_sweep", "rho2", "h", "family"}, "config");
  const PolarGrid grid = polar_grid(get_object(cfg, "grid", "config"));
  std::vector<RhoPoint> points;
  if (cfg.contains("rho")) {
    if (cfg.contains("rho1_sweep")) throw ValidationError("give either rho or rho1_sweep");
    points.emplace_back(get_numbers(cfg, "rho", std::nullopt, "config"));
  } else {
    const double r2 = get_number(cfg, "rho2", std::nullopt, "config");
    for (double r1 : get_numbers(cfg, "rho1_sweep", std::nullopt, "config")) points.emplace_back(std::vector{r1, r2});
  }
  const json& fam = get_object(cfg, "family", "config");
  require_keys(fam,
               {"lambda_c", "lambda_e", "lambda_min", "lambda_max", "amplitude", "margin", "samples", "optimize",
                "search_tol"},
               "family");
  BubbleFamily f;
  f.lambda_c = get_number(fam, "lambda_c", f.lambda_c, "family");
  f.lambda_e = get_number(fam, "lambda_e", f.lambda_e, "family");
  f.lambda_min = get_number(fam, "lambda_min", f.lambda_min, "family");
  f.lambda_max = get_number(fam, "lambda_max", f.lambda_max, "family");
  f.amplitude = get_number(fam, "amplitude", f.amplitude, "family");
  f.margin = get_number(fam, "margin", f.margin, "family");
  f.samples = get_int(fam, "samples", f.samples, "family");
  f.optimize = get_bool(fam, "optimize", f.optimize, "family");
  f.search_tol = get_number(fam, "search_tol", f.search_tol, "family");
  const auto h = WeightData::sample(weight_functions(weight_presets(cfg, 2, 1.0)), grid);

  std::vector<std::vector<double>> table, curves;
  json results = json::array();
  double prev = std::numeric_limits<double>::infinity(), prev_noise = 0.0;
  bool monotone = true;
  for (const auto& rho : points) {
    const auto m = minimax_estimate(rho, h, grid, f);
    const double ratio = m.value / rho[0];
    if (ratio > prev + (m.noise + prev_noise) / rho[0]) monotone = false;
    prev = ratio;
    prev_noise = m.noise;
    table.push_back({rho[0], rho[1], m.value, ratio, m.noise, m.t_max, m.lambda_c, m.lambda_e});
    for (std::size_t k = 0; k < m.t.size(); ++k) curves.push_back({rho[0], m.t[k], m.J[k]});
    results.push_back({{"rho", rho.values()},
                       {"value", m.value},
                       {"value_over_rho1", ratio},
                       {"noise", m.noise},
                       {"t_max", m.t_max},
                       {"lambda_c", m.lambda_c},
                       {"lambda_e", m.lambda_e},
                       {"evaluations", m.evaluations}});
  }
  run.write_csv("minimax.csv", {"rho1", "rho2", "value", "value_over_rho1", "noise", "t_max", "lambda_c", "lambda_e"},
                table);
  run.write_csv("paths.csv", {"rho1", "t", "J"}, curves);
  json summary{{"results", results}, {"nonincreasing_within_noise", monotone}};
  run.write_json("summary.json", summary);
  run.finish("ok");
  for (const auto& r : table)
    out << "rho1/pi " << format_double(r[0] / kPi) << ": value/rho1 " << format_double(r[3]) << " (noise "
        << format_double(r[4]) << ")\n";
  return kExitOk;
}

int cmd_diagnose(const json& cfg, RunDir& run, std::ostream& out) {
  require_keys(cfg, {"snapshot", "h", "floor", "tol"}, "config");
  const auto snap = read_snapshot(get_string(cfg, "snapshot", std::nullopt, "config"));
  const TorusGrid grid = snapshot_torus(snap);
  const auto h = WeightData::sample(weight_presets(cfg, snap.field.rank(), grid.length()), grid);
  const auto rep = diagnose_blowup(snap.field, h, grid, get_number(cfg, "floor", 5.0, "config"),
                                   get_number(cfg, "tol", 0.05, "config"));
  json peaks = json::array();
  std::vector<std::vector<double>> prow;
  for (const auto& p : rep.peaks) {
    peaks.push_back({{"component", p.component + 1}, {"x", p.x}, {"height", p.height}, {"eps", p.eps}});
    prow.push_back({double(p.component + 1), p.x[0], p.x[1], p.height, p.eps});
  }
  std::vector<std::vector<double>> mrow;
  const auto& mp = rep.plateau.profile;
  for (std::size_t j = 0; j < mp.radii.size(); ++j) {
    std::vector<double> row{mp.radii[j]};
    for (const auto& s : mp.sigma) row.push_back(s[j]);
    mrow.push_back(row);
  }
  std::vector<std::string> mh{"r"};
  for (std::size_t i = 1; i <= mp.sigma.size(); ++i) mh.push_back("sigma_" + std::to_string(i));
  run.write_csv("mass_profile.csv", mh, mrow);
  run.write_csv("peaks.csv", {"component", "x", "y", "height", "eps"}, prow);
  const auto& c = rep.classification;
  json summary{{"peaks", peaks},
               {"sigma", rep.plateau.sigma},
               {"sigma_over_pi", {rep.plateau.sigma[0] / kPi, rep.plateau.sigma[1] / kPi}},
               {"plateau_radius", rep.plateau.radius},
               {"pohozaev_residual", rep.pohozaev},
               {"nearest_pair_over_pi", {c.pair[0] / kPi, c.pair[1] / kPi}},
               {"distance", c.distance},
               {"admissible", c.admissible},
               {"floor_ok", c.floor_ok},
               {"mass_exponents", rep.exponents}};
  run.write_json("summary.json", summary);
  run.finish("ok");
  out << "sigma/pi = (" << format_double(rep.plateau.sigma[0] / kPi) << ", "
      << format_double(rep.plateau.sigma[1] / kPi) << "), nearest (" << c.pair[0] / kPi << "pi, " << c.pair[1] / kPi
      << "pi), " << (c.admissible ? "admissible" : "not admissible") << "\n";
  return kExitOk;
}

int cmd_bubble(const json& cfg, RunDir& run, std::ostream& out) {
  require_keys(cfg, {"snapshot", "peak", "window", "samples", "profile", "radius", "floor"}, "config");
  const auto snap = read_snapshot(get_string(cfg, "snapshot", std::nullopt, "config"));
  const TorusGrid grid = snapshot_torus(snap);
  const auto peaks = detect_peaks(snap.field, grid, get_number(cfg, "floor", 5.0, "config"));
  const int k = get_int(cfg, "peak", 1, "config");
  if (k < 1 || k > static_cast<int>(peaks.size()))
    throw ValidationError("peak index out of range (" + std::to_string(peaks.size()) + " peaks found)");
  const auto rs = rescale_bubble(snap.field, grid, peaks[k - 1], get_number(cfg, "window", 10.0, "config"),
                                 get_int(cfg, "samples", 129, "config"));
  std::vector<std::string> header{"y1", "y2"};
  for (int i = 1; i <= rs.v.rank(); ++i) header.push_back("v_" + std::to_string(i));
  std::vector<std::vector<double>> rows;
  for (int a = 0; a < rs.n; ++a)
    for (int b = 0; b < rs.n; ++b) {
      std::vector<double> row{rs.coord(a), rs.coord(b)};
      for (int i = 0; i < rs.v.rank(); ++i) row.push_back(rs.v[i][static_cast<std::size_t>(a) * rs.n + b]);
      rows.push_back(row);
    }
  run.write_csv("rescaled.csv", header, rows);
  json summary{{"peak", {{"component", peaks[k - 1].component + 1},
                         {"x", peaks[k - 1].x},
                         {"height", peaks[k - 1].height},
                         {"eps", peaks[k - 1].eps}}},
               {"window", rs.half_width},
               {"samples", rs.n}};
  const std::string prof = get_string(cfg, "profile", "symmetric", "config");
  if (prof != "none") {
    const auto d = bubble_deviation(rs, profile_by_name(prof),
                                    get_number(cfg, "radius", std::numeric_limits<double>::max(), "config"));
    std::vector<std::vector<double>> drows;
    for (std::size_t i = 0; i < d.per_component.size(); ++i) drows.push_back({double(i + 1), d.per_component[i]});
    run.write_csv("deviation.csv", {"component", "sup_deviation"}, drows);
    summary["profile"] = prof;
    summary["deviation"] = d.per_component;
    summary["deviation_max"] = d.max;
    out << "sup deviation from " << prof << " profile: " << format_double(d.max) << "\n";
  }
  run.write_json("summary.json", summary);
  run.finish("ok");
  return kExitOk;
}

int cmd_entire(const json& cfg, RunDir& run, std::ostream& out) {
  require_keys(cfg, {"mu", "c", "s0", "s1", "ds", "shoot", "tol", "every"}, "config");
  const auto mu = get_numbers(cfg, "mu", std::nullopt, "config");
  const auto c = get_numbers(cfg, "c", std::vector<double>(mu.size(), 0.0), "config");
  RadialOptions o;
  o.s0 = get_number(cfg, "s0", o.s0, "config");
  o.s1 = get_number(cfg, "s1", o.s1, "config");
  o.ds = get_number(cfg, "ds", o.ds, "config");
  const bool shoot = get_bool(cfg, "shoot", false, "config");
  const int every = get_int(cfg, "every", 20, "config");
  if (every < 1) throw ValidationError("every must be positive");
  std::vector<double> target;
  for (double m : mu) target.push_back(2.0 * (2.0 + m));
  const RadialProfile p = shoot ? radial_toda_shoot(mu, c, target, o, get_number(cfg, "tol", 1e-9, "config"))
                                : radial_toda_solve(mu, RadialInit{c, std::nullopt}, o);
  const auto fit = gamma_exponents(p);
  const auto q = check_quantization(fit.gamma, mu);
  const auto loc = local_exponent_check(p);
  double gmax = 0.0;
  for (double g : fit.gamma) gmax = std::max(gmax, std::abs(g));
  const double poho = global_pohozaev_residual(fit.gamma, mu);

  const int n = p.rank();
  std::vector<std::string> header{"s"};
  for (const char* what : {"u", "du", "mass"})
    for (int i = 1; i <= n; ++i) header.push_back(std::string(what) + "_" + std::to_string(i));
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < p.nodes(); k += static_cast<std::size_t>(every)) {
    std::vector<double> row{p.s[k]};
    for (int i = 0; i < n; ++i) row.push_back(p.u[i][k]);
    for (int i = 0; i < n; ++i) row.push_back(p.du[i][k]);
    for (int i = 0; i < n; ++i) row.push_back(p.mass[i][k]);
    rows.push_back(row);
  }
  run.write_csv("profile.csv", header, rows);
  std::vector<double> slopes;
  for (int i = 0; i < n; ++i) slopes.push_back(p.du[i].front());
  json summary{{"mu", mu},
               {"c", c},
               {"mode", shoot ? "shoot" : "regular"},
               {"origin_slopes", slopes},
               {"gamma", fit.gamma},
               {"quantized_target", target},
               {"quantization_residual", q.residual},
               {"outside_hypothesis", q.outside_hypothesis},
               {"mass", fit.mass},
               {"gamma0", fit.gamma0},
               {"slope_drift", fit.slope_drift},
               {"pohozaev_residual", poho},
               {"pohozaev_relative", gmax > 0 ? poho / (gmax * gmax) : 0.0},
               {"origin_margin", loc.origin_margin},
               {"tail_margin", loc.tail_margin}};
  run.write_json("summary.json", summary);
  run.finish("ok");
  out << "gamma =";
  for (double g : fit.gamma) out << " " << format_double(g);
  out << "  (2(2+mu) =";
  for (double t : target) out << " " << format_double(t);
  out << ")\n";
  return kExitOk;
}

int cmd_holonomy(const json& cfg, RunDir& run, std::ostream& out) {
  require_keys(cfg, {"profile", "lambda", "mu", "c", "radii", "steps", "gauge"}, "config");
  const std::string prof = get_string(cfg, "profile", "radial", "config");
  std::vector<double> mu;
  WFields w;
  if (prof == "symmetric") {
    mu = {0.0, 0.0};
    w = WFields::from_profile(symmetric_toda_bubble(get_number(cfg, "lambda", 0.0, "config")), false);
  } else if (prof == "radial") {
    mu = get_numbers(cfg, "mu", std::nullopt, "config");
    const auto c = get_numbers(cfg, "c", std::vector<double>(mu.size(), 0.0), "config");
    w = WFields::from_profile(radial_toda_solve(mu, RadialInit{c, std::nullopt}));
  } else {
    throw ValidationError("profile must be symmetric or radial");
  }
  const auto radii = get_numbers(cfg, "radii", std::vector<double>{0.5, 1.0, 2.0}, "config");
  const int steps = get_int(cfg, "steps", 4096, "config");
  const bool gauge = get_bool(cfg, "gauge", false, "config");
  const auto ex = expected_phases(mu);
  const int n = static_cast<int>(mu.size()) + 1;
  std::vector<std::string> header{"r"};
  for (int i = 0; i < n; ++i) header.push_back("beta_" + std::to_string(i));
  for (const char* c : {"distance_to_expected", "unitarity_defect", "det_defect", "identity_defect"})
    header.push_back(c);
  if (gauge) header.push_back("gauge_difference");
  std::vector<std::vector<double>> rows;
  json loops = json::array();
  double worst = 0.0;
  for (double r : radii) {
    const auto h = holonomy_loop(w, r, steps);
    const double d = phase_distance(h.phases, ex.mod1);
    worst = std::max(worst, d);
    std::vector<double> row{r};
    row.insert(row.end(), h.phases.begin(), h.phases.end());
    row.insert(row.end(), {d, h.unitarity_defect, h.det_defect, h.identity_defect});
    json l{{"r", r}, {"phases", h.phases}, {"distance_to_expected", d}, {"unitarity_defect", h.unitarity_defect}};
    if (gauge) {
      const auto g = gauge_radial(w, r);
      row.push_back(g.phase_difference);
      l["gauge_difference"] = g.phase_difference;
    }
    rows.push_back(row);
    loops.push_back(l);
  }
  run.write_csv("phases.csv", header, rows);
  json summary{{"profile", prof}, {"mu", mu}, {"expected", ex.mod1}, {"loops", loops}, {"max_distance", worst}};
  run.write_json("summary.json", summary);
  run.finish("ok");
  out << "max eigenphase distance to expected: " << format_double(worst) << "\n";
  return kExitOk;
}

int cmd_check_condition(const json& cfg, std::ostream& out) {
  require_keys(cfg, {"h1", "h2", "rho2", "n", "length", "variant"}, "config");
  const TorusGrid grid(get_int(cfg, "n", 128, "config"), get_number(cfg, "length", 1.0, "config"));
  const std::string variant = get_string(cfg, "variant", "rho2", "config");
  const auto h1 = parse_weight_preset(get_string(cfg, "h1", std::nullopt, "config"), grid.length());
  ConditionResult r;
  if (variant == "rho2") {
    const auto wd = WeightData::sample(std::vector{h1}, grid);
    r = curvature_condition(wd.h[0], get_number(cfg, "rho2", std::nullopt, "config"), grid);
    out << "min of Δlog h1 + (8π − ρ2) − 2K: " << format_double(r.min_value) << "\n";
  } else if (variant == "both") {
    const auto h2 = parse_weight_preset(get_string(cfg, "h2", "const", "config"), grid.length());
    r = curvature_condition_both(WeightData::sample(std::vector{h1, h2}, grid), grid);
    out << "min of min(Δlog h1, Δlog h2) + 4π − 2K: " << format_double(r.min_value) << "\n";
  } else {
    throw ValidationError("variant must be rho2 or both");
  }
  out << (r.holds ? "PASS" : "FAIL") << "\n";
  return kExitOk;
}

int cmd_selftest(std::ostream& out) {
  int failed = 0;
  for (const auto& c : selftest()) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) out << "  " << c.detail;
    out << "\n";
    failed += !c.pass;
  }
  return failed ? kExitNumeric : kExitOk;
}

int cmd_report(const std::string& dir, bool force, std::ostream& out) {
  namespace fs = std::filesystem;
  const fs::path d(dir);
  if (!fs::exists(d / "manifest.json")) throw ValidationError("no manifest.json in " + dir);
  const json man = read_json_file((d / "manifest.json").string());
  if (!man.contains("command") || !man["command"].is_string()) throw ValidationError("manifest has no command");
  const std::string command = man["command"].get<std::string>();
  if (fs::exists(d / "report.md") && !force) throw ValidationError("report.md exists; use --force");
  json summary = fs::exists(d / "summary.json") ? read_json_file((d / "summary.json").string()) : json::object();
  std::ostringstream md;
  md << "# " << command << " run\n\n";
  md << "config hash `" << man.value("config_hash", "") << "`, status " << man.value("status", "") << "\n\n";
  auto num = [](const json& j) { return j.is_number() ? format_double(j.get<double>()) : j.dump(); };
  if (command == "entire") {
    md << "| i | mu | gamma | 2(2+mu) | residual |\n|---|---|---|---|---|\n";
    const auto& g = summary.at("gamma");
    const auto& mu = summary.at("mu");
    std::ostringstream csv;
    csv << "i,mu,gamma,target,residual\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double m = mu[i].get<double>(), gi = g[i].get<double>(), t = 2.0 * (2.0 + m);
      md << "| " << i + 1 << " | " << num(mu[i]) << " | " << num(g[i]) << " | " << format_double(t) << " | "
         << format_double(gi - t) << " |\n";
      csv << i + 1 << "," << format_double(m) << "," << format_double(gi) << "," << format_double(t) << ","
          << format_double(gi - t) << "\n";
    }
    md << "\nPohozaev residual " << num(summary.at("pohozaev_residual")) << "\n";
    std::ofstream(d / "gamma_table.csv") << csv.str();
  } else if (command == "diagnose") {
    const auto& s = summary.at("sigma_over_pi");
    const auto& p = summary.at("nearest_pair_over_pi");
    md << "| | sigma_1 | sigma_2 |\n|---|---|---|\n";
    md << "| measured / pi | " << num(s[0]) << " | " << num(s[1]) << " |\n";
    md << "| nearest admissible / pi | " << num(p[0]) << " | " << num(p[1]) << " |\n\n";
    md << "Pohozaev residual " << num(summary.at("pohozaev_residual")) << ", verdict "
       << (summary.at("admissible").get<bool>() ? "admissible" : "not admissible") << ". σ(r) in mass_profile.csv.\n";
  } else if (command == "holonomy") {
    md << "| r | phases | distance to expected |\n|---|---|---|\n";
    for (const auto& l : summary.at("loops")) md << "| " << num(l["r"]) << " | " << l["phases"].dump() << " | "
                                                 << num(l["distance_to_expected"]) << " |\n";
    md << "\nexpected " << summary.at("expected").dump() << "\n";
  } else {
    md << "```json\n" << summary.dump(2) << "\n```\n";
  }
  std::ofstream(d / "report.md") << md.str();
  out << "wrote " << (d / "report.md").string() << "\n";
  return kExitOk;
}

}  // namespace toda::cli
