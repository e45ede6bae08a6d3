#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "toda/errors.hpp"
#include "toda/solver.hpp"

using namespace toda;

namespace {

constexpr double kPi = std::numbers::pi;

Field small_random(const TorusGrid& g, unsigned seed, double amp) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> ud(-amp, amp);
  Field u(2, g.size());
  for (int i = 0; i < 2; ++i)
    for (auto& x : u[i]) x = ud(gen);
  return u;
}

struct Manufactured {
  Field u_star;
  WeightData h;
};

// h_j = p_j e^{−u*_j} with p = 1/|Σ| + a⁻¹(−Δu*)/ρ makes u* an exact solution.
Manufactured manufactured(const TorusGrid& g, const RhoPoint& rho) {
  Field u(2, g.size());
  for (int a = 0; a < g.n(); ++a)
    for (int b = 0; b < g.n(); ++b) {
      const double x = 2 * kPi * g.x(a), y = 2 * kPi * g.y(b);
      u[0][g.index(a, b)] = 0.08 * std::cos(x) + 0.025 * std::sin(2 * y);
      u[1][g.index(a, b)] = -0.05 * std::sin(x + y) + 0.008 * std::cos(3 * x);
    }
  project_zero_mean(u, g);
  const auto c = cartan(2);
  std::array<std::vector<double>, 2> f;
  for (int i = 0; i < 2; ++i) {
    f[i] = laplacian(u[i], g);
    for (auto& x : f[i]) x = -x;
  }
  Field h(2, g.size());
  for (int j = 0; j < 2; ++j)
    for (std::size_t q = 0; q < g.size(); ++q) {
      const double p = 1.0 / g.area() + (c.a_inv(j, 0) * f[0][q] + c.a_inv(j, 1) * f[1][q]) / rho[j];
      REQUIRE(p > 0.0);
      h[j][q] = p * std::exp(-u[j][q]);
    }
  return {u, WeightData::from_field(h)};
}

double max_diff(const Field& a, const Field& b) {
  double d = 0.0;
  for (int i = 0; i < a.rank(); ++i)
    for (std::size_t q = 0; q < a.size(); ++q) d = std::max(d, std::abs(a[i][q] - b[i][q]));
  return d;
}

}  // namespace

TEST_CASE("options are validated") {
  SolveOptions o;
  o.dt0 = 0.0;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  o = {};
  o.tol_res = -1.0;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  CHECK_NOTHROW(SolveOptions{}.validate());
}

TEST_CASE("flow reaches the constant solution") {
  const TorusGrid g(32, 1.0);
  const auto r = gradient_flow(small_random(g, 1, 0.1), RhoPoint({2 * kPi, 2 * kPi}),
                               WeightData::constant(2, g.size()), g);
  CHECK(r.converged);
  CHECK(r.residual_norm < 1e-9);
  CHECK(sup_norm(r.u) < 1e-8);
  CHECK(std::abs(r.J_value) < 1e-10);
}

TEST_CASE("flow and Newton recover a manufactured solution") {
  const TorusGrid g(64, 1.0);
  const RhoPoint rho({8.0, 8.0});
  const auto m = manufactured(g, rho);
  const auto r = gradient_flow(Field(2, g.size()), rho, m.h, g);
  CHECK(r.converged);
  CHECK(max_diff(r.u, m.u_star) < 1e-8);
  CHECK(sup_norm(residual(r.u, rho, m.h, g)) <= SolveOptions{}.tol_res);
}

TEST_CASE("non-constant solution for a cos-bump weight") {
  const TorusGrid g(32, 1.0);
  const RhoPoint rho({2 * kPi, 2 * kPi});
  const auto h = WeightData::sample(std::vector{parse_weight_preset("cos-bump:1.0"), parse_weight_preset("cos-bump:1.0")}, g);
  SolveOptions o;
  o.newton = false;
  const auto r = gradient_flow(Field(2, g.size()), rho, h, g, o);
  CHECK(r.converged);
  CHECK(r.residual_norm < 1e-9);
  CHECK(sup_norm(r.u) > 0.1);
  CHECK(r.J_value < functional_value(Field(2, g.size()), rho, h, g));
  for (std::size_t k = 1; k < r.J_history.size(); ++k) CHECK(r.J_history[k] <= r.J_history[k - 1] + 1e-12);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(integrate(r.u[i], g)) < 1e-10);
}

TEST_CASE("Newton converges quadratically from a flow iterate") {
  const TorusGrid g(32, 1.0);
  const RhoPoint rho({3 * kPi, 2 * kPi});
  const auto h = WeightData::sample(std::vector{parse_weight_preset("cos-bump:0.8"), parse_weight_preset("const")}, g);
  SolveOptions o;
  o.newton = false;
  o.tol_res = 1e-4;
  const auto rough = gradient_flow(Field(2, g.size()), rho, h, g, o);
  REQUIRE(rough.converged);
  SolveOptions n;
  n.tol_res = 1e-12;
  const auto r = newton_refine(rough.u, rho, h, g, n);
  CHECK(r.converged);
  CHECK(r.residual_norm < 1e-12);
  CHECK(r.newton_iterations <= 5);
}

TEST_CASE("Newton leaves an exact root alone") {
  const TorusGrid g(16, 1.0);
  const Field zero(2, g.size());
  const auto r = newton_refine(zero, RhoPoint({5.0, 5.0}), WeightData::constant(2, g.size()), g);
  CHECK(r.converged);
  CHECK(r.newton_iterations == 0);
  CHECK(sup_norm(r.u) == 0.0);
}

TEST_CASE("continuation along the constant branch") {
  const TorusGrid g(16, 1.0);
  std::vector<RhoPoint> path;
  for (int k = 0; k <= 4; ++k) path.emplace_back(std::vector{(2.0 + 0.45 * k) * kPi, 2 * kPi});
  const auto branch = continuation(path, WeightData::constant(2, g.size()), g);
  REQUIRE(branch.size() == path.size());
  for (const auto& p : branch) {
    CHECK(p.converged);
    CHECK_FALSE(p.blowup_suspected);
    CHECK(std::max(p.max_u[0], p.max_u[1]) < 1e-8);
  }

  const auto crossing = continuation({RhoPoint({2 * kPi, 3.8 * kPi}), RhoPoint({2 * kPi, 4 * kPi})},
                                     WeightData::constant(2, g.size()), g);
  CHECK(crossing.back().classification.kind == MTClass::Kind::critical);
  CHECK_THROWS_AS(continuation({}, WeightData::constant(2, g.size()), g), InvalidArgument);
}

TEST_CASE("Dirichlet system agrees with a radial two-point problem") {
  // ρ1 = ρ2 and h ≡ 1 give u1 = u2 = u with −Δu = ρ e^u / ∫ e^u on 1 < r < 2.
  const double rho = 0.5 * kPi;
  const PolarGrid g(1.0, 2.0, 64, 16);
  const auto r2d = dirichlet_solve_system(RhoPoint({rho, rho}), WeightData::constant(2, g.size()), g);
  REQUIRE(r2d.converged);

  const int n = 4000;
  const double dr = 1.0 / n;
  std::vector<double> u(n + 1, 0.0);
  for (int it = 0; it < 200; ++it) {
    double mass = 0.0;
    for (int k = 0; k <= n; ++k) mass += (k == 0 || k == n ? 0.5 : 1.0) * std::exp(u[k]) * (1.0 + k * dr);
    mass *= 2 * kPi * dr;
    std::vector<double> lo(n + 1), di(n + 1), up(n + 1), rhs(n + 1);
    for (int k = 1; k < n; ++k) {
      const double r = 1.0 + k * dr;
      lo[k] = -(r - 0.5 * dr) / (r * dr * dr);
      up[k] = -(r + 0.5 * dr) / (r * dr * dr);
      di[k] = 2.0 / (dr * dr);
      rhs[k] = rho * std::exp(u[k]) / mass;
    }
    di[0] = di[n] = 1.0;
    for (int k = 1; k <= n; ++k) {
      const double w = lo[k] / di[k - 1];
      di[k] -= w * up[k - 1];
      rhs[k] -= w * rhs[k - 1];
    }
    std::vector<double> next(n + 1);
    next[n] = rhs[n] / di[n];
    for (int k = n - 1; k >= 0; --k) next[k] = (rhs[k] - up[k] * next[k + 1]) / di[k];
    double change = 0.0;
    for (int k = 0; k <= n; ++k) change = std::max(change, std::abs(next[k] - u[k]));
    u = next;
    if (change < 1e-14) break;
  }

  double dev = 0.0, spread = 0.0;
  for (int k = 0; k < g.rings(); ++k) {
    const double pos = (g.r(k) - 1.0) / dr;
    const int j = std::min(n - 1, static_cast<int>(pos));
    const double ref = u[j] + (pos - j) * (u[j + 1] - u[j]);
    for (int m = 0; m < g.n_t(); ++m) {
      for (int i = 0; i < 2; ++i) dev = std::max(dev, std::abs(r2d.u[i][g.index(k, m)] - ref));
      spread = std::max(spread, std::abs(r2d.u[0][g.index(k, m)] - r2d.u[0][g.index(k, 0)]));
    }
  }
  CHECK(spread < 1e-12);
  CHECK(dev < 5.0 / (64.0 * 64.0) * sup_norm(r2d.u));
}

TEST_CASE("Dirichlet solution is linear in small rho") {
  const PolarGrid g(1.0, 2.0, 24, 16);
  const auto h = WeightData::constant(2, g.size());
  const auto a = dirichlet_solve_system(RhoPoint({1e-3, 2e-3}), h, g);
  const auto b = dirichlet_solve_system(RhoPoint({2e-3, 4e-3}), h, g);
  double d = 0.0;
  for (int i = 0; i < 2; ++i)
    for (std::size_t q = 0; q < g.size(); ++q) d = std::max(d, std::abs(b.u[i][q] - 2 * a.u[i][q]));
  CHECK(sup_norm(b.u) > 0.0);
  CHECK(d < 1e-2 * sup_norm(b.u));
  CHECK_THROWS_AS(dirichlet_solve_system(RhoPoint({1.0, 1.0}), h, PolarGrid(0.0, 1.0, 8, 8)), InvalidArgument);
}

TEST_CASE("center of mass") {
  const PolarGrid a(0.5, 2.0, 32, 64);
  auto c = center_of_mass(std::vector<double>(a.size(), 0.0), a);
  CHECK(std::abs(c[0]) < 1e-12);
  CHECK(std::abs(c[1]) < 1e-12);

  const TorusGrid g(128, 1.0);
  std::vector<double> v(g.size());
  const double px = 0.3, py = 0.7;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) {
      const double dx = g.x(i) - px, dy = g.y(j) - py;
      v[g.index(i, j)] = -(dx * dx + dy * dy) / (2 * 0.01 * 0.01);
    }
  c = center_of_mass(v, g);
  CHECK(std::abs(c[0] - px) < g.spacing());
  CHECK(std::abs(c[1] - py) < g.spacing());
}

TEST_CASE("minimax estimate on an annulus") {
  const PolarGrid g(1.0, 2.0, 32, 48);
  const auto h = WeightData::constant(2, g.size());
  BubbleFamily fam;
  fam.samples = 11;
  fam.optimize = false;
  const auto r = minimax_estimate(RhoPoint({5 * kPi, 5 * kPi}), h, g, fam);
  CHECK(std::isfinite(r.value));
  CHECK(r.value >= std::max(r.J_left, r.J_right));
  CHECK(r.t.size() == r.J.size());

  fam.amplitude = 0.0;
  CHECK_THROWS_AS(minimax_estimate(RhoPoint({5 * kPi, 5 * kPi}), h, g, fam), InvalidFamily);
  CHECK_THROWS_AS(minimax_estimate(RhoPoint({3 * kPi, 5 * kPi}), h, g, {}), InvalidArgument);
}
