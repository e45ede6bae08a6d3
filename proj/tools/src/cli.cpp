#include "toda/cli.hpp"

#include <iostream>
#include <map>
#include <memory>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "rundir.hpp"
#include "toda/errors.hpp"

namespace toda::cli {

namespace {

enum class Kind { number, integer, list, text };

struct Flag {
  std::string pointer;  // JSON pointer into the config
  Kind kind;
  std::string value;
  CLI::Option* opt = nullptr;
};

struct Sub {
  CLI::App* app = nullptr;
  std::string config;
  std::string out;
  bool force = false;
  std::string positional;
  std::vector<std::unique_ptr<Flag>> flags;
  bool bool_flag = false;
  std::string bool_pointer;
  CLI::Option* bool_opt = nullptr;

  void add(const std::string& name, const std::string& pointer, Kind kind, const std::string& help) {
    flags.push_back(std::make_unique<Flag>(Flag{pointer, kind, {}, nullptr}));
    flags.back()->opt = app->add_option(name, flags.back()->value, help);
  }

  json assemble() const {
    json cfg = config.empty() ? json::object() : read_json_file(config);
    if (!cfg.is_object()) throw ValidationError("config must be a JSON object");
    for (const auto& f : flags) {
      if (f->opt->count() == 0) continue;
      const json::json_pointer ptr(f->pointer);
      switch (f->kind) {
        case Kind::number:
          cfg[ptr] = parse_list(f->value, f->opt->get_name()).at(0);
          break;
        case Kind::integer: {
          const double v = parse_list(f->value, f->opt->get_name()).at(0);
          if (v != std::floor(v)) throw ValidationError(f->opt->get_name() + " must be an integer");
          cfg[ptr] = static_cast<int>(v);
          break;
        }
        case Kind::list:
          cfg[ptr] = parse_list(f->value, f->opt->get_name());
          break;
        case Kind::text:
          cfg[ptr] = f->value;
          break;
      }
    }
    if (bool_opt && bool_opt->count() > 0) cfg[json::json_pointer(bool_pointer)] = bool_flag;
    return cfg;
  }
};

using Runner = int (*)(const json&, RunDir&, std::ostream&);

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical experiments for SU(3) Toda and mean-field systems", "toda"};
  app.require_subcommand(1);
  std::map<std::string, Sub> subs;

  auto make = [&](const std::string& name, const std::string& help, bool run_dir) -> Sub& {
    Sub& s = subs[name];
    s.app = app.add_subcommand(name, help);
    if (run_dir) {
      s.app->add_option("--config", s.config, "JSON config file");
      s.app->add_option("--out", s.out, "run directory (default runs/<command>)");
      s.app->add_flag("--force", s.force, "replace an existing run directory");
    }
    return s;
  };

  auto& solve = make("solve", "mean-field system on the torus by gradient flow + Newton", true);
  solve.add("--n", "/grid/n", Kind::integer, "grid points per side");
  solve.add("--length", "/grid/length", Kind::number, "torus side");
  solve.add("--rho", "/rho", Kind::list, "comma-separated ρ");
  solve.add("--weights", "/h", Kind::text, "weight preset for every component");
  solve.add("--seed", "/seed", Kind::integer, "seed of the random start");

  auto& dir = make("dirichlet", "Dirichlet problem on an annulus", true);
  dir.add("--rho", "/rho", Kind::list, "comma-separated ρ");
  dir.add("--weights", "/h", Kind::text, "weight preset");

  auto& cont = make("continue", "continuation in ρ on the torus", true);
  cont.add("--from", "/from", Kind::list, "start ρ");
  cont.add("--to", "/to", Kind::list, "end ρ");
  cont.add("--steps", "/steps", Kind::integer, "number of steps");
  cont.add("--weights", "/h", Kind::text, "weight preset");

  auto& mm = make("minimax", "bubble-path minimax estimate on an annulus", true);
  mm.add("--rho", "/rho", Kind::list, "ρ1,ρ2");

  auto& diag = make("diagnose", "blow-up diagnostics of a torus snapshot", true);
  diag.app->add_option("snapshot", diag.positional, "snapshot header")->required();
  diag.add("--weights", "/h", Kind::text, "weight preset");
  diag.add("--floor", "/floor", Kind::number, "peak floor");
  diag.add("--tol", "/tol", Kind::number, "admissibility tolerance (fraction of 4π)");

  auto& bub = make("bubble", "rescale a peak of a torus snapshot to bubble units", true);
  bub.app->add_option("snapshot", bub.positional, "snapshot header")->required();
  bub.add("--peak", "/peak", Kind::integer, "1-based peak index");
  bub.add("--window", "/window", Kind::number, "half width in units of ε");
  bub.add("--profile", "/profile", Kind::text, "symmetric, liouville or none");

  auto& ent = make("entire", "radial entire solutions and tail exponents", true);
  ent.add("--mu", "/mu", Kind::list, "singular weights");
  ent.add("--c", "/c", Kind::list, "origin values");
  ent.bool_opt = ent.app->add_flag("--shoot", ent.bool_flag, "shoot origin slopes to γ = 2(2+μ)");
  ent.bool_pointer = "/shoot";

  auto& hol = make("holonomy", "loop holonomy of the flat connection", true);
  hol.add("--profile", "/profile", Kind::text, "symmetric or radial");
  hol.add("--mu", "/mu", Kind::list, "singular weights");
  hol.add("--radii", "/radii", Kind::list, "loop radii");
  hol.bool_opt = hol.app->add_flag("--gauge", hol.bool_flag, "also compute the radial-gauge holonomy");
  hol.bool_pointer = "/gauge";

  auto& chk = make("check-condition", "evaluate the curvature condition on a torus weight", false);
  chk.app->add_option("--config", chk.config, "JSON config file");
  chk.add("--h1", "/h1", Kind::text, "weight preset for h1");
  chk.add("--h2", "/h2", Kind::text, "weight preset for h2 (variant both)");
  chk.add("--rho2", "/rho2", Kind::number, "ρ2");
  chk.add("--n", "/n", Kind::integer, "grid points per side");
  chk.add("--length", "/length", Kind::number, "torus side");
  chk.add("--variant", "/variant", Kind::text, "rho2 or both");

  make("selftest", "quick algebraic and trivial-field checks", false);

  auto& rep = make("report", "Markdown/CSV report for a run directory", false);
  rep.app->add_option("run_dir", rep.positional, "run directory")->required();
  rep.app->add_flag("--force", rep.force, "overwrite an existing report");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  const std::map<std::string, Runner> runners{{"solve", cmd_solve},       {"dirichlet", cmd_dirichlet},
                                              {"continue", cmd_continue}, {"minimax", cmd_minimax},
                                              {"diagnose", cmd_diagnose}, {"bubble", cmd_bubble},
                                              {"entire", cmd_entire},     {"holonomy", cmd_holonomy}};
  try {
    for (auto& [name, s] : subs) {
      if (!s.app->parsed()) continue;
      if (name == "selftest") return cmd_selftest(out);
      if (name == "report") return cmd_report(s.positional, s.force, out);
      json cfg = s.assemble();
      if (name == "check-condition") return cmd_check_condition(cfg, out);
      if (!s.positional.empty()) cfg["snapshot"] = s.positional;
      RunDir run(s.out.empty() ? "runs/" + name : s.out, s.force, name, cfg);
      try {
        return runners.at(name)(cfg, run, out);
      } catch (const Error& e) {
        run.finish(e.is_validation() ? "invalid" : "failed: " + e.kind());
        throw;
      }
    }
  } catch (const Error& e) {
    err << "error (" << e.kind() << "): " << e.what() << "\n";
    return e.is_validation() ? kExitValidation : kExitNumeric;
  } catch (const nlohmann::json::exception& e) {
    err << "error (config): " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitValidation;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace toda::cli
