#include "toda/solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>

namespace toda {

void SolveOptions::validate() const {
  if (!(dt0 > 0.0) || !(dt_max >= dt0)) throw InvalidArgument("need 0 < dt0 <= dt_max");
  if (!(tol_res > 0.0)) throw InvalidArgument("tol_res must be positive");
  if (max_iters < 0 || max_newton < 0) throw InvalidArgument("iteration limits must be non-negative");
  if (!(shrink > 0.0 && shrink < 1.0)) throw InvalidArgument("shrink must lie in (0, 1)");
  if (!(grow >= 1.0)) throw InvalidArgument("grow must be >= 1");
  if (gmres_restart < 1 || gmres_max_iters < 1) throw InvalidArgument("GMRES limits must be positive");
}

namespace {

// All grid-specific work of one (rho, h, grid) problem.
class System {
 public:
  System(const RhoPoint& rho, const WeightData& h, const Grid& grid)
      : rho_(rho), h_(h), grid_(grid), cartan_(cartan(rho.rank())) {
    if (h.rank() != rho.rank()) throw InvalidArgument("rho and weights must have the same rank");
    for (const auto& c : h.h)
      if (c.size() != grid_size(grid)) throw InvalidArgument("weight size does not match grid");
  }

  int rank() const { return rho_.rank(); }
  std::size_t nodes() const { return grid_size(grid_); }
  bool torus() const { return std::holds_alternative<TorusGrid>(grid_); }
  Gauge gauge() const { return torus() ? Gauge::zero_mean : Gauge::dirichlet; }

  double J(const Field& u) const {
    return std::visit([&](const auto& g) { return functional_value(u, rho_, h_, g); }, grid_);
  }
  Field grad(const Field& u) const {
    return std::visit([&](const auto& g) { return functional_gradient(u, rho_, h_, g); }, grid_);
  }
  Field res(const Field& u) const {
    return std::visit([&](const auto& g) { return residual(u, rho_, h_, g); }, grid_);
  }

  void project(Field& u) const {
    if (torus()) {
      project_zero_mean(u, std::get<TorusGrid>(grid_));
    } else {
      const auto& pg = std::get<PolarGrid>(grid_);
      for (auto& c : u.components)
        for (std::size_t q = 0; q < c.size(); ++q)
          if (is_boundary_node(pg, q)) c[q] = 0.0;
      u.gauge = Gauge::dirichlet;
    }
  }

  double dot(const Field& a, const Field& b) const {
    double s = 0.0;
    for (int i = 0; i < a.rank(); ++i) {
      std::vector<double> prod(a[i].size());
      for (std::size_t q = 0; q < prod.size(); ++q) prod[q] = a[i][q] * b[i][q];
      s += integrate(prod, grid_);
    }
    return s;
  }

  // (I − dt Δ)⁻¹ r, with zero boundary values on polar grids.
  Field flow_precond(const Field& r, double dt) {
    Field out(r.rank(), r.size(), gauge());
    if (torus()) {
      const auto& tg = std::get<TorusGrid>(grid_);
      for (int i = 0; i < r.rank(); ++i)
        out[i] = apply_symbol(r[i], tg, [dt](double k2) { return 1.0 / (1.0 + dt * k2); });
    } else {
      const auto& op = polar_op(1.0 / dt);
      const auto zero = DirichletData::homogeneous(std::get<PolarGrid>(grid_));
      for (int i = 0; i < r.rank(); ++i) {
        std::vector<double> rhs = r[i];
        for (double& v : rhs) v /= dt;
        out[i] = op.solve(rhs, zero);
      }
    }
    project(out);
    return out;
  }

  // (−Δ + I)⁻¹ r.
  Field newton_precond(const Field& r) {
    Field out(r.rank(), r.size(), gauge());
    if (torus()) {
      const auto& tg = std::get<TorusGrid>(grid_);
      for (int i = 0; i < r.rank(); ++i)
        out[i] = apply_symbol(r[i], tg, [](double k2) { return 1.0 / (1.0 + k2); });
    } else {
      const auto& op = polar_op(1.0);
      const auto zero = DirichletData::homogeneous(std::get<PolarGrid>(grid_));
      for (int i = 0; i < r.rank(); ++i) out[i] = op.solve(r[i], zero);
    }
    project(out);
    return out;
  }

  // Normalized exponentials at u, kept for Jacobian products.
  void linearize_at(const Field& u) {
    p_.assign(static_cast<std::size_t>(rank()), {});
    for (int j = 0; j < rank(); ++j) p_[j] = normalized_exponential(u[j], h_.h[j], grid_);
  }

  // J_r(u) v = −Δv_i − Σ_j ρ_j a_ij (p_j v_j − p_j ∫ p_j v_j).
  Field jacobian(const Field& v) const {
    const int n = rank();
    std::vector<std::vector<double>> dn(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      std::vector<double> pv(nodes());
      for (std::size_t q = 0; q < nodes(); ++q) pv[q] = p_[j][q] * v[j][q];
      const double s = integrate(pv, grid_);
      dn[j].resize(nodes());
      for (std::size_t q = 0; q < nodes(); ++q) dn[j][q] = pv[q] - p_[j][q] * s;
    }
    Field out(n, nodes(), gauge());
    for (int i = 0; i < n; ++i) {
      const auto lap = std::visit([&](const auto& g) { return laplacian(v[i], g); }, grid_);
      for (std::size_t q = 0; q < nodes(); ++q) {
        double val = -lap[q];
        for (int j = 0; j < n; ++j) val -= rho_[j] * cartan_.a(i, j) * dn[j][q];
        out[i][q] = val;
      }
    }
    if (!torus()) {
      const auto& pg = std::get<PolarGrid>(grid_);
      for (int i = 0; i < n; ++i)
        for (std::size_t q = 0; q < nodes(); ++q)
          if (is_boundary_node(pg, q)) out[i][q] = v[i][q];
    }
    return out;
  }

 private:
  const DirichletOperator& polar_op(double shift) {
    auto it = ops_.find(shift);
    if (it != ops_.end()) return it->second;
    if (ops_.size() > 16) ops_.clear();
    return ops_.emplace(shift, DirichletOperator(std::get<PolarGrid>(grid_), shift)).first->second;
  }

  RhoPoint rho_;
  const WeightData& h_;
  Grid grid_;
  CartanData cartan_;
  std::map<double, DirichletOperator> ops_;
  std::vector<std::vector<double>> p_;
};

// ---- small vector helpers on Fields ------------------------------------------

double euclid_dot(const Field& a, const Field& b) {
  double s = 0.0;
  for (int i = 0; i < a.rank(); ++i)
    for (std::size_t q = 0; q < a[i].size(); ++q) s += a[i][q] * b[i][q];
  return s;
}

void axpy(Field& y, double a, const Field& x) {
  for (int i = 0; i < y.rank(); ++i)
    for (std::size_t q = 0; q < y[i].size(); ++q) y[i][q] += a * x[i][q];
}

Field scaled(const Field& x, double a) {
  Field y = x;
  for (auto& c : y.components)
    for (double& v : c) v *= a;
  return y;
}

// Right-preconditioned restarted GMRES for J x = b. Returns the achieved
// relative residual; x is overwritten.
double gmres(System& sys, const Field& b, Field& x, double rel_tol, int restart, int max_iters) {
  const double bnorm = std::sqrt(euclid_dot(b, b));
  x = Field(b.rank(), b.size(), b.gauge);
  if (bnorm == 0.0) return 0.0;
  double rel = 1.0;
  int total = 0;
  while (total < max_iters) {
    Field r = b;
    axpy(r, -1.0, sys.jacobian(x));
    const double beta = std::sqrt(euclid_dot(r, r));
    rel = beta / bnorm;
    if (rel <= rel_tol) return rel;
    const int m = std::min(restart, max_iters - total);
    std::vector<Field> v;
    std::vector<Field> z;
    v.push_back(scaled(r, 1.0 / beta));
    std::vector<std::vector<double>> hmat(static_cast<std::size_t>(m) + 1, std::vector<double>(m, 0.0));
    std::vector<double> cs(m), sn(m), g(static_cast<std::size_t>(m) + 1, 0.0);
    g[0] = beta;
    int k = 0;
    for (; k < m; ++k) {
      z.push_back(sys.newton_precond(v[k]));
      Field w = sys.jacobian(z[k]);
      for (int j = 0; j <= k; ++j) {
        hmat[j][k] = euclid_dot(w, v[j]);
        axpy(w, -hmat[j][k], v[j]);
      }
      hmat[k + 1][k] = std::sqrt(euclid_dot(w, w));
      for (int j = 0; j < k; ++j) {
        const double t = cs[j] * hmat[j][k] + sn[j] * hmat[j + 1][k];
        hmat[j + 1][k] = -sn[j] * hmat[j][k] + cs[j] * hmat[j + 1][k];
        hmat[j][k] = t;
      }
      const double den = std::hypot(hmat[k][k], hmat[k + 1][k]);
      if (den == 0.0) {
        ++k;
        break;
      }
      cs[k] = hmat[k][k] / den;
      sn[k] = hmat[k + 1][k] / den;
      const double hk1 = hmat[k + 1][k];
      hmat[k][k] = den;
      hmat[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      ++total;
      rel = std::abs(g[k + 1]) / bnorm;
      if (rel <= rel_tol || hk1 == 0.0) {
        ++k;
        break;
      }
      v.push_back(scaled(w, 1.0 / hk1));
    }
    std::vector<double> y(static_cast<std::size_t>(k), 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= hmat[i][j] * y[j];
      y[i] = s / hmat[i][i];
    }
    for (int j = 0; j < k; ++j) axpy(x, y[j], z[j]);
    if (rel <= rel_tol) break;
  }
  Field r = b;
  axpy(r, -1.0, sys.jacobian(x));
  return std::sqrt(euclid_dot(r, r)) / bnorm;
}

void check_field(const Field& u, const RhoPoint& rho, std::size_t nodes) {
  if (u.rank() != rho.rank()) throw InvalidArgument("initial field rank does not match rho");
  for (const auto& c : u.components)
    if (c.size() != nodes) throw InvalidArgument("initial field size does not match grid");
}

SolveResult newton_impl(System& sys, Field u, const SolveOptions& opts, SolveResult out) {
  sys.project(u);
  Field r = sys.res(u);
  double rn = sup_norm(r);
  int steps = 0;
  while (rn > opts.tol_res) {
    if (steps >= opts.max_newton) break;
    sys.linearize_at(u);
    const double eta = std::clamp(0.1 * rn, 1e-13, 1e-2);
    Field rhs = scaled(r, -1.0);
    Field y;
    const double rel = gmres(sys, rhs, y, eta, opts.gmres_restart, opts.gmres_max_iters);
    if (!std::isfinite(rel) || rel > 0.5)
      throw LinearizationSingular("GMRES did not converge on the linearization (relative residual " +
                                  std::to_string(rel) + ")");
    Field step = y;
    sys.project(step);
    double t = 1.0;
    bool accepted = false;
    while (t >= 1.0 / 1024.0) {
      Field trial = u;
      axpy(trial, t, step);
      sys.project(trial);
      double tn = 0.0;
      Field tr;
      try {
        tr = sys.res(trial);
        tn = sup_norm(tr);
      } catch (const NumericError&) {
        tn = std::numeric_limits<double>::infinity();
      }
      if (tn < (1.0 - 1e-4 * t) * rn) {
        u = std::move(trial);
        r = std::move(tr);
        rn = tn;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    ++steps;
    out.residual_history.push_back(rn);
    if (!accepted) throw SolverFailure("Newton step rejected by the residual line search");
  }
  out.u = std::move(u);
  out.residual_norm = rn;
  out.J_value = sys.J(out.u);
  out.newton_iterations += steps;
  out.iterations += steps;
  out.converged = rn <= opts.tol_res;
  return out;
}

SolveResult flow_impl(System& sys, Field u, const SolveOptions& opts) {
  opts.validate();
  sys.project(u);
  u.gauge = sys.gauge();
  SolveResult out;
  double J = sys.J(u);
  Field r = sys.res(u);
  double rn = sup_norm(r);
  out.J_history.push_back(J);
  out.residual_history.push_back(rn);
  SolveResult best;
  best.u = u;
  best.residual_norm = rn;
  best.J_value = J;
  double dt = opts.dt0;
  bool newton_ok = opts.newton;
  int iters = 0;
  while (rn > opts.tol_res && iters < opts.max_iters) {
    if (newton_ok && rn < opts.newton_switch_res) {
      try {
        SolveResult seed = out;
        seed.flow_iterations = iters;
        seed.iterations = iters;
        SolveResult nr = newton_impl(sys, u, opts, std::move(seed));
        if (nr.converged) return nr;
        if (nr.residual_norm < rn) {
          u = nr.u;
          r = sys.res(u);
          rn = nr.residual_norm;
          J = nr.J_value;
        }
      } catch (const LinearizationSingular&) {
      } catch (const SolverFailure&) {
      }
      newton_ok = false;
      continue;
    }
    const Field g = sys.grad(u);
    bool accepted = false;
    while (!accepted) {
      if (dt < 1e-14) {
        best.iterations = best.flow_iterations = iters;
        best.J_history = out.J_history;
        best.residual_history = out.residual_history;
        throw Stagnation("gradient-flow step underflow (residual " + std::to_string(rn) + ")", best);
      }
      const Field d = sys.flow_precond(r, dt);
      const double slope = sys.dot(g, d);
      Field trial = u;
      axpy(trial, -dt, d);
      sys.project(trial);
      double Jt = 0.0;
      try {
        Jt = sys.J(trial);
      } catch (const NumericError&) {
        dt *= opts.shrink;
        continue;
      }
      const double slack = 1e-13 * (1.0 + std::abs(J));
      bool ok = Jt <= J - opts.armijo * dt * slope;
      Field tr;
      if (!ok && slope * dt <= slack && Jt <= J + slack) {
        // Round-off regime: J cannot resolve the decrease, fall back to the residual.
        tr = sys.res(trial);
        ok = sup_norm(tr) < rn;
      }
      if (!ok) {
        dt *= opts.shrink;
        continue;
      }
      if (tr.rank() == 0) tr = sys.res(trial);
      u = std::move(trial);
      r = std::move(tr);
      rn = sup_norm(r);
      J = Jt;
      accepted = true;
      dt = std::min(dt * opts.grow, opts.dt_max);
    }
    ++iters;
    out.J_history.push_back(J);
    out.residual_history.push_back(rn);
    if (rn < best.residual_norm) {
      best.u = u;
      best.residual_norm = rn;
      best.J_value = J;
    }
  }
  out.u = std::move(u);
  out.residual_norm = rn;
  out.J_value = J;
  out.iterations = out.flow_iterations = iters;
  out.converged = rn <= opts.tol_res;
  return out;
}

}  // namespace

SolveResult gradient_flow(const Field& u0, const RhoPoint& rho, const WeightData& h, const Grid& grid,
                          const SolveOptions& opts) {
  check_field(u0, rho, grid_size(grid));
  System sys(rho, h, grid);
  return flow_impl(sys, u0, opts);
}

SolveResult newton_refine(const Field& u, const RhoPoint& rho, const WeightData& h, const Grid& grid,
                          const SolveOptions& opts) {
  opts.validate();
  check_field(u, rho, grid_size(grid));
  System sys(rho, h, grid);
  Field start = u;
  start.gauge = sys.gauge();
  return newton_impl(sys, std::move(start), opts, SolveResult{});
}

SolveResult dirichlet_solve_system(const RhoPoint& rho, const WeightData& h, const PolarGrid& grid,
                                   const SolveOptions& opts, const std::optional<Field>& u0) {
  if (grid.has_axis()) throw InvalidArgument("the Dirichlet system needs an annulus (r_in > 0)");
  if (!grid.inner().dirichlet || !grid.outer().dirichlet || grid.inner().value != 0.0 ||
      grid.outer().value != 0.0)
    throw InvalidArgument("the Dirichlet system needs homogeneous Dirichlet data on both circles");
  const Field start = u0 ? *u0 : Field(rho.rank(), grid.size(), Gauge::dirichlet);
  return gradient_flow(start, rho, h, Grid{grid}, opts);
}

std::vector<BranchPoint> continuation(const std::vector<RhoPoint>& rho_path, const WeightData& h,
                                      const TorusGrid& grid, const ContinuationOptions& opts,
                                      const std::optional<Field>& u0) {
  if (rho_path.empty()) throw InvalidArgument("empty rho path");
  std::vector<BranchPoint> out;
  Field warm = u0 ? *u0 : Field(rho_path.front().rank(), grid.size(), Gauge::zero_mean);
  const Grid g = grid;
  for (std::size_t k = 0; k < rho_path.size(); ++k) {
    const RhoPoint& rho = rho_path[k];
    BranchPoint bp;
    bp.rho = rho;
    bp.classification = mt_classify(rho);
    if (bp.classification.kind == MTClass::Kind::critical) bp.note = "critical rho";
    SolveResult res;
    try {
      res = gradient_flow(warm, rho, h, g, opts.solve);
    } catch (const Error& e) {
      if (k == 0) throw;
      bp.u = warm;
      bp.converged = false;
      bp.blowup_suspected = true;
      bp.note = (bp.note.empty() ? "" : bp.note + "; ") + e.what();
      out.push_back(std::move(bp));
      continue;
    }
    if (k == 0 && !res.converged)
      throw SolverFailure("continuation: first point did not converge (residual " +
                          std::to_string(res.residual_norm) + ")");
    bp.u = res.u;
    bp.converged = res.converged;
    bp.residual_norm = res.residual_norm;
    bp.J_value = res.J_value;
    for (int i = 0; i < rho.rank(); ++i) {
      const auto& c = res.u[i];
      const auto it = std::max_element(c.begin(), c.end());
      bp.max_u.push_back(*it);
      const std::size_t q0 = static_cast<std::size_t>(it - c.begin());
      const int i0 = static_cast<int>(q0 / grid.n()), j0 = static_cast<int>(q0 % grid.n());
      const auto p = normalized_exponential(c, h.h[i], g);
      const double rad = opts.mass_radius * grid.length();
      double s = 0.0;
      for (int a = 0; a < grid.n(); ++a)
        for (int b = 0; b < grid.n(); ++b) {
          const double dx = grid.wrap(grid.x(a) - grid.x(i0));
          const double dy = grid.wrap(grid.y(b) - grid.y(j0));
          if (dx * dx + dy * dy <= rad * rad) s += p[grid.index(a, b)];
        }
      bp.peak_mass.push_back(rho[i] * s * grid.weight());
    }
    const double top = *std::max_element(bp.max_u.begin(), bp.max_u.end());
    bp.blowup_suspected = !res.converged || top > opts.blowup_threshold;
    if (res.converged) warm = res.u;
    out.push_back(std::move(bp));
  }
  return out;
}

std::array<double, 2> center_of_mass(std::span<const double> v, const Grid& grid) {
  if (v.size() != grid_size(grid)) throw InvalidArgument("field size does not match grid");
  const double top = *std::max_element(v.begin(), v.end());
  std::vector<double> e(v.size());
  for (std::size_t q = 0; q < v.size(); ++q) e[q] = std::exp(v[q] - top);
  const double total = integrate(e, grid);
  if (!(total > 0.0)) throw NumericError("center of mass: vanishing weight");
  if (const auto* tg = std::get_if<TorusGrid>(&grid)) {
    std::complex<double> cx = 0.0, cy = 0.0;
    const double k = 2.0 * std::numbers::pi / tg->length();
    for (int i = 0; i < tg->n(); ++i)
      for (int j = 0; j < tg->n(); ++j) {
        const double w = e[tg->index(i, j)];
        cx += w * std::polar(1.0, k * tg->x(i));
        cy += w * std::polar(1.0, k * tg->y(j));
      }
    auto wrap01 = [&](std::complex<double> c) {
      double a = std::arg(c) / k;
      if (a < 0.0) a += tg->length();
      return a;
    };
    return {wrap01(cx), wrap01(cy)};
  }
  const auto& pg = std::get<PolarGrid>(grid);
  std::vector<double> xe(v.size()), ye(v.size());
  for (int k = 0; k < pg.rings(); ++k)
    for (int m = 0; m < pg.n_t(); ++m) {
      const auto p = pg.cartesian(k, m);
      const auto q = pg.index(k, m);
      xe[q] = p[0] * e[q];
      ye[q] = p[1] * e[q];
    }
  return {integrate(xe, grid) / total, integrate(ye, grid) / total};
}

}  // namespace toda
