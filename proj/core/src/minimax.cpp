#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "toda/solver.hpp"

namespace toda {

namespace {

struct PathEvaluator {
  const RhoPoint& rho;
  const WeightData& h;
  const PolarGrid& grid;
  const BubbleFamily& fam;
  DirichletOperator harmonic;
  int evaluations = 0;

  PathEvaluator(const RhoPoint& r, const WeightData& w, const PolarGrid& g, const BubbleFamily& f)
      : rho(r), h(w), grid(g), fam(f), harmonic(g, 0.0) {}

  double radius(double t) const {
    const double w = grid.r_out() - grid.r_in();
    return grid.r_in() + w * (fam.margin + (1.0 - 2.0 * fam.margin) * 0.5 * (t + 1.0));
  }

  // P U for a bubble of height lambda centred at (px, py).
  std::vector<double> projected_bubble(double lambda, double px, double py) const {
    std::vector<double> u(grid.size());
    const double el = std::exp(lambda);
    for (int k = 0; k < grid.rings(); ++k)
      for (int m = 0; m < grid.n_t(); ++m) {
        const auto p = grid.cartesian(k, m);
        const double d2 = (p[0] - px) * (p[0] - px) + (p[1] - py) * (p[1] - py);
        u[grid.index(k, m)] = lambda - 2.0 * std::log1p(el * d2 / 8.0);
      }
    DirichletData trace;
    trace.inner.resize(static_cast<std::size_t>(grid.n_t()));
    trace.outer.resize(static_cast<std::size_t>(grid.n_t()));
    for (int m = 0; m < grid.n_t(); ++m) {
      trace.inner[m] = u[grid.index(0, m)];
      trace.outer[m] = u[grid.index(grid.n_r(), m)];
    }
    const std::vector<double> zero(grid.size(), 0.0);
    const auto harm = harmonic.solve(zero, trace);
    for (std::size_t q = 0; q < u.size(); ++q) u[q] = is_boundary_node(grid, q) ? 0.0 : u[q] - harm[q];
    return u;
  }

  Field path_point(double t, double lc, double le) const {
    const double lambda = lc + le * std::abs(t);
    const double r = radius(t);
    const auto b1 = projected_bubble(lambda, r, 0.0);
    const auto b2 = projected_bubble(lambda, -r, 0.0);
    Field u(2, grid.size(), Gauge::dirichlet);
    for (std::size_t q = 0; q < grid.size(); ++q) {
      u[0][q] = fam.amplitude * (b1[q] - 0.5 * b2[q]);
      u[1][q] = fam.amplitude * (b2[q] - 0.5 * b1[q]);
    }
    return u;
  }

  double J(double t, double lc, double le) {
    ++evaluations;
    return functional_value(path_point(t, lc, le), rho, h, grid);
  }

  // At t = ±1 both centres of mass must lie nearer the target boundary circle than the other one.
  bool admissible(double lc, double le) const {
    for (double t : {-1.0, 1.0}) {
      const Field u = path_point(t, lc, le);
      for (int i = 0; i < 2; ++i) {
        const auto mc = center_of_mass(u[i], Grid{grid});
        const double rc = std::hypot(mc[0], mc[1]);
        const double inner = std::abs(rc - grid.r_in()), outer = std::abs(grid.r_out() - rc);
        if (!(t < 0 ? inner < outer : outer < inner)) return false;
      }
    }
    return true;
  }

  std::vector<double> t_grid(int samples) const {
    std::vector<double> t(static_cast<std::size_t>(samples));
    for (int j = 0; j < samples; ++j) t[j] = -1.0 + 2.0 * j / (samples - 1);
    return t;
  }

  double sup_over_path(double lc, double le, double* t_at = nullptr) {
    double best = -std::numeric_limits<double>::infinity();
    for (double t : t_grid(fam.samples)) {
      const double v = J(t, lc, le);
      if (v > best) {
        best = v;
        if (t_at) *t_at = t;
      }
    }
    return best;
  }
};

}  // namespace

MinimaxResult minimax_estimate(const RhoPoint& rho, const WeightData& h, const PolarGrid& grid,
                               const BubbleFamily& family) {
  if (rho.rank() != 2) throw InvalidArgument("the minimax family is built for N = 2");
  if (grid.has_axis()) throw InvalidArgument("minimax needs an annulus");
  if (family.samples < 5) throw InvalidArgument("minimax needs at least 5 path samples");
  if (!(family.lambda_min < family.lambda_max)) throw InvalidArgument("need lambda_min < lambda_max");
  if (!(family.margin > 0.0 && family.margin < 0.5)) throw InvalidArgument("margin must lie in (0, 1/2)");
  for (int i = 0; i < 2; ++i)
    if (!(rho[i] > 4.0 * std::numbers::pi && rho[i] < 8.0 * std::numbers::pi))
      throw InvalidArgument("the two-sided bubble family needs rho_i in (4 pi, 8 pi)");

  PathEvaluator ev(rho, h, grid, family);
  auto clamp_params = [&](double& lc, double& le) {
    lc = std::clamp(lc, family.lambda_min, family.lambda_max);
    le = std::clamp(le, 0.0, family.lambda_max - lc);
  };
  double lc = family.lambda_c, le = family.lambda_e;
  clamp_params(lc, le);
  if (!ev.admissible(lc, le))
    throw InvalidFamily("bubble path does not move the centres of mass from the inner to the outer boundary");

  double t_best = 0.0;
  double value = ev.sup_over_path(lc, le, &t_best);
  if (family.optimize) {
    double step = 2.0;
    while (step >= family.search_tol) {
      bool improved = false;
      for (int coord = 0; coord < 2; ++coord)
        for (double sgn : {-1.0, 1.0}) {
          double c = lc + (coord == 0 ? sgn * step : 0.0);
          double e = le + (coord == 1 ? sgn * step : 0.0);
          clamp_params(c, e);
          if (c == lc && e == le) continue;
          if (!ev.admissible(c, e)) continue;
          double tb = 0.0;
          const double v = ev.sup_over_path(c, e, &tb);
          if (v < value) {
            value = v;
            lc = c;
            le = e;
            t_best = tb;
            improved = true;
          }
        }
      if (!improved) step *= 0.5;
    }
  }

  MinimaxResult out;
  out.value = value;
  out.t_max = t_best;
  out.lambda_c = lc;
  out.lambda_e = le;
  out.t = ev.t_grid(family.samples);
  for (double t : out.t) out.J.push_back(ev.J(t, lc, le));
  out.J_left = out.J.front();
  out.J_right = out.J.back();
  // Refine the t-grid once: the change of the sup bounds the sampling error.
  double fine = value;
  for (std::size_t j = 0; j + 1 < out.t.size(); ++j)
    fine = std::max(fine, ev.J(0.5 * (out.t[j] + out.t[j + 1]), lc, le));
  out.noise = std::abs(fine - value);
  out.evaluations = ev.evaluations;
  return out;
}

}  // namespace toda
