#include <cmath>
#include <sstream>

#include "toda/blowup.hpp"
#include "toda/cli.hpp"
#include "toda/entire.hpp"
#include "toda/errors.hpp"
#include "toda/holonomy.hpp"
#include "toda/meanfield.hpp"
#include "toda/solver.hpp"

namespace toda::cli {

namespace {

constexpr double kPi = std::numbers::pi;

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

}  // namespace

std::vector<SelftestCase> selftest() {
  std::vector<SelftestCase> cases;
  auto add = [&](std::string name, auto&& body) {
    SelftestCase c{std::move(name), false, {}};
    try {
      body(c);
    } catch (const std::exception& e) {
      c.pass = false;
      c.detail = std::string("threw: ") + e.what();
    }
    cases.push_back(std::move(c));
  };

  add("pohozaev relation vanishes on the admissible pairs", [](SelftestCase& c) {
    double worst = 0.0;
    for (const auto& p : admissible_pairs())
      worst = std::max(worst, std::abs(pohozaev_residual(p[0], p[1])) / (64.0 * kPi * kPi));
    c.pass = worst < 1e-12;
    c.detail = "max relative " + sci(worst);
  });
  add("classify_blowup is exact on the admissible pairs", [](SelftestCase& c) {
    c.pass = true;
    for (const auto& p : admissible_pairs()) {
      const auto r = classify_blowup(p[0], p[1]);
      c.pass = c.pass && r.distance == 0.0 && r.pair == p && r.admissible;
    }
  });
  add("mass exponents of (8π, 8π) are (4, 4)", [](SelftestCase& c) {
    const auto m = mass_exponents(8 * kPi, 8 * kPi);
    c.pass = std::abs(m[0] - 4) < 1e-14 && std::abs(m[1] - 4) < 1e-14;
  });
  add("u = 0 has no peaks above 5", [](SelftestCase& c) {
    const TorusGrid g(32, 1.0);
    c.pass = detect_peaks(Field(2, g.size()), g, 5.0).empty();
  });
  add("constant solution at ρ = (2π, 2π)", [](SelftestCase& c) {
    const TorusGrid g(32, 1.0);
    Field u0(2, g.size());
    for (std::size_t q = 0; q < g.size(); ++q) {
      u0[0][q] = 0.05 * std::sin(2 * kPi * g.x(static_cast<int>(q / 32)));
      u0[1][q] = 0.05 * std::cos(2 * kPi * g.y(static_cast<int>(q % 32)));
    }
    const auto r = gradient_flow(u0, RhoPoint({2 * kPi, 2 * kPi}), WeightData::constant(2, g.size()), g);
    c.pass = r.converged && sup_norm(r.u) < 1e-8 && std::abs(r.J_value) < 1e-10;
    c.detail = "sup " + sci(sup_norm(r.u));
  });
  add("Kelvin transform is an involution", [](SelftestCase& c) {
    const PolarGrid g(0.5, 2.0, 32, 16, RadialSpacing::geometric);
    Field u(2, g.size());
    for (std::size_t q = 0; q < g.size(); ++q) u[0][q] = u[1][q] = std::sin(0.1 * double(q));
    const auto k1 = kelvin_transform(u, g);
    const auto k2 = kelvin_transform(k1.field, k1.grid);
    double d = 0.0;
    for (int i = 0; i < 2; ++i)
      for (std::size_t q = 0; q < g.size(); ++q) d = std::max(d, std::abs(k2.field[i][q] - u[i][q]));
    c.pass = d < 1e-12;
    c.detail = sci(d);
  });
  add("symmetric bubble has trivial holonomy", [](SelftestCase& c) {
    const auto w = WFields::from_profile(symmetric_toda_bubble(0.0, -8.0, 8.0, 1e-3), false);
    const auto h = holonomy_loop(w, 1.0, 1024);
    c.pass = h.identity_defect < 1e-6;
    c.detail = "|g - I| " + sci(h.identity_defect);
  });
  add("Liouville ODE matches the closed form", [](SelftestCase& c) {
    RadialOptions o;
    o.s0 = -8;
    o.s1 = 8;
    const auto p = radial_toda_solve({0.0}, RadialInit{{0.0}, std::nullopt}, o, Eigen::MatrixXd::Constant(1, 1, 2.0));
    const auto q = liouville_bubble(0.0, -8, 8, 1e-3);
    double d = 0.0;
    for (std::size_t k = 0; k < p.nodes(); ++k) d = std::max(d, std::abs(p.u[0][k] - q.u[0][k]));
    c.pass = d < 1e-8;
    c.detail = sci(d);
  });
  return cases;
}

}  // namespace toda::cli
