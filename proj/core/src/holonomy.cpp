#include "toda/holonomy.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "toda/errors.hpp"

namespace toda {

namespace {

constexpr double kPi = std::numbers::pi;
const std::complex<double> kI(0.0, 1.0);

std::array<double, 2> point_of(const WFields& w, double r, double theta) {
  const auto c = w.center();
  return {c[0] + r * std::cos(theta), c[1] + r * std::sin(theta)};
}

// f = h^{1/2} and (f)_z at a Cartesian point.
void weight_at(const WeightFunction& h, std::array<double, 2> x, double& f, std::complex<double>& fz) {
  const double hv = h.value(x[0], x[1]);
  if (!(hv > 0.0)) throw InvalidArgument("weights must be positive");
  f = std::sqrt(hv);
  const auto g = h.gradient(x[0], x[1]);
  fz = 0.5 * std::complex<double>(g[0], -g[1]) / (2.0 * f);
}

template <class Rhs>
CMatrix rk4_matrix(const CMatrix& y, double h, const Rhs& f0, const Rhs& fh, const Rhs& f1) {
  // f0, fh, f1 map y to y' at the start, middle and end of the step.
  const CMatrix k1 = f0(y);
  const CMatrix k2 = fh(y + 0.5 * h * k1);
  const CMatrix k3 = fh(y + 0.5 * h * k2);
  const CMatrix k4 = f1(y + h * k3);
  return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

std::vector<double> u_to_w_tilde(std::span<const double> u) {
  const int n = static_cast<int>(u.size());
  std::vector<double> w(static_cast<std::size_t>(n) + 1);
  double acc = 0.0;
  for (int i = 1; i <= n; ++i) acc += (n - i + 1) * u[i - 1];
  w[0] = -acc / (2.0 * (n + 1));
  for (int i = 1; i <= n; ++i) w[i] = w[i - 1] + 0.5 * u[i - 1];
  return w;
}

WFields WFields::from_profile(const RadialProfile& p, bool singular, double shift) {
  WFields out;
  out.rank_ = p.rank();
  out.shift_ = shift;
  const int n = p.rank();
  out.u_ = Field(n, p.nodes());
  out.tilde_ = Field(n + 1, p.nodes());
  for (std::size_t k = 0; k < p.nodes(); ++k) {
    std::vector<double> uk(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      uk[i] = p.u[i][k] + (singular ? p.mu[i] * p.s[k] : 0.0);
      out.u_[i][k] = uk[i];
    }
    const auto wt = u_to_w_tilde(uk);
    for (int i = 0; i <= n; ++i) out.tilde_[i][k] = wt[i];
  }
  auto prof = std::make_shared<RadialProfile>(p);
  out.eval_ = [prof, singular, shift, n](double r, double theta) {
    if (!(r > 0.0)) throw InvalidArgument("connection needs r > 0");
    const double s = std::log(r);
    std::vector<double> u, du;
    prof->eval(s, u, du);
    if (singular)
      for (int i = 0; i < n; ++i) {
        u[i] += prof->mu[i] * s;
        du[i] += prof->mu[i];
      }
    const auto wt = u_to_w_tilde(u);
    const auto dwt = u_to_w_tilde(du);
    WSample smp;
    smp.w.resize(static_cast<std::size_t>(n) + 1);
    smp.wz.resize(static_cast<std::size_t>(n) + 1);
    const std::complex<double> rot = std::polar(0.5 / r, -theta);
    for (int i = 0; i <= n; ++i) {
      smp.w[i] = wt[i] - i * shift;
      smp.wz[i] = rot * dwt[i];
    }
    return smp;
  };
  return out;
}

WFields WFields::from_torus(const Field& u, const TorusGrid& grid, std::array<double, 2> center, double shift) {
  WFields out;
  const int n = u.rank();
  if (n < 1 || u.size() != grid.size()) throw InvalidArgument("field does not match torus grid");
  out.rank_ = n;
  out.shift_ = shift;
  out.center_ = center;
  out.u_ = u;
  out.tilde_ = Field(n + 1, grid.size());
  std::vector<double> uk(static_cast<std::size_t>(n));
  for (std::size_t q = 0; q < grid.size(); ++q) {
    for (int i = 0; i < n; ++i) uk[i] = u[i][q];
    const auto wt = u_to_w_tilde(uk);
    for (int i = 0; i <= n; ++i) out.tilde_[i][q] = wt[i];
  }
  auto interp = std::make_shared<std::vector<TorusInterpolant>>();
  for (int i = 0; i <= n; ++i) interp->emplace_back(out.tilde_[i], grid);
  out.eval_ = [interp, center, shift, n](double r, double theta) {
    if (!(r > 0.0)) throw InvalidArgument("connection needs r > 0");
    const double x = center[0] + r * std::cos(theta), y = center[1] + r * std::sin(theta);
    WSample smp;
    smp.w.resize(static_cast<std::size_t>(n) + 1);
    smp.wz.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
      const auto v = (*interp)[i](x, y);
      smp.w[i] = v.value - i * shift;
      smp.wz[i] = 0.5 * std::complex<double>(v.dx, -v.dy);
    }
    return smp;
  };
  return out;
}

ConnectionSample connection_sample(const WFields& w, double r, double theta, const Weights* h) {
  if (!(r > 0.0)) throw InvalidArgument("connection needs r > 0");
  const int n = w.rank();
  if (h && static_cast<int>(h->size()) != n) throw InvalidArgument("need one weight per component");
  const WSample smp = w.at(r, theta);
  ConnectionSample c;
  c.r = r;
  c.theta = theta;
  c.U = CMatrix::Zero(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) c.U(i, i) = smp.wz[i];
  const auto x = point_of(w, r, theta);
  for (int i = 1; i <= n; ++i) {
    double f = 1.0;
    if (h) {
      std::complex<double> fz;
      weight_at((*h)[i - 1], x, f, fz);
    }
    c.U(i - 1, i) = f * std::exp(smp.w[i] - smp.w[i - 1]);
  }
  c.V = -c.U.adjoint();
  const std::complex<double> e = std::polar(1.0, theta);
  const CMatrix a = c.U * e;
  const CMatrix b = c.U.adjoint() * std::conj(e);
  c.alpha_theta = -kI * r * (a + b);
  c.alpha_r = -(a - b);
  return c;
}

double wrap_phase(double beta) {
  double x = beta - std::floor(beta + 0.5);
  if (x <= -0.5) x += 1.0;
  return x;
}

HolonomyResult holonomy_from_matrix(const CMatrix& g) {
  HolonomyResult res;
  res.g = g;
  const auto n = g.rows();
  Eigen::ComplexEigenSolver<CMatrix> es(g);
  if (es.info() != Eigen::Success) throw NumericError("eigenvalue solver failed on the holonomy matrix");
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto lam = es.eigenvalues()[i];
    res.eigenvalues.push_back(lam);
    res.phases.push_back(wrap_phase(-std::arg(lam) / (2.0 * kPi)));
  }
  std::sort(res.phases.begin(), res.phases.end());
  const CMatrix id = CMatrix::Identity(n, n);
  res.unitarity_defect = (g.adjoint() * g - id).norm();
  res.det_defect = std::abs(g.determinant() - 1.0);
  res.identity_defect = (g - id).norm();
  return res;
}

HolonomyResult holonomy_loop(const WFields& w, double r, int n_steps, const Weights* h, double defect_tol) {
  if (!(r > 0.0)) throw InvalidArgument("loop radius must be positive");
  if (n_steps < 256) throw InvalidArgument("holonomy loop needs at least 256 steps");
  const int n = w.rank() + 1;
  const double dth = 2.0 * kPi / n_steps;
  CMatrix g = CMatrix::Identity(n, n);
  CMatrix a0 = connection_sample(w, r, 0.0, h).alpha_theta;
  for (int k = 0; k < n_steps; ++k) {
    const double th = k * dth;
    const CMatrix ah = connection_sample(w, r, th + 0.5 * dth, h).alpha_theta;
    const CMatrix a1 = connection_sample(w, r, th + dth, h).alpha_theta;
    auto f0 = [&](const CMatrix& y) -> CMatrix { return -a0 * y; };
    auto fh = [&](const CMatrix& y) -> CMatrix { return -ah * y; };
    auto f1 = [&](const CMatrix& y) -> CMatrix { return -a1 * y; };
    g = rk4_matrix<std::function<CMatrix(const CMatrix&)>>(g, dth, f0, fh, f1);
    a0 = a1;
  }
  HolonomyResult res = holonomy_from_matrix(g);
  res.r = r;
  res.steps = n_steps;
  if (res.unitarity_defect > defect_tol || res.det_defect > defect_tol)
    throw AccuracyError("holonomy defects exceed tolerance; increase the number of steps");
  return res;
}

ExpectedPhases expected_phases(const std::vector<double>& mu) {
  for (double m : mu)
    if (!(m > -2.0)) throw InvalidArgument("singular weights must satisfy mu > -2");
  const int n = static_cast<int>(mu.size());
  ExpectedPhases e;
  std::vector<double> partial(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 1; i <= n; ++i) partial[i] = partial[i - 1] - 0.5 * mu[i - 1];
  const double b0 = -std::accumulate(partial.begin(), partial.end(), 0.0) / (n + 1);
  for (int i = 0; i <= n; ++i) {
    e.raw.push_back(b0 + partial[i]);
    e.mod1.push_back(wrap_phase(e.raw.back()));
  }
  return e;
}

double phase_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw InvalidArgument("phase lists differ in length");
  if (a.size() > 9) throw InvalidArgument("phase matching supports at most 9 phases");
  std::vector<std::size_t> perm(b.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(wrap_phase(a[i] - b[perm[i]])));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

CMatrix curvature(const WFields& w, const Weights& h, double r, double theta) {
  const int n = w.rank();
  if (static_cast<int>(h.size()) != n) throw InvalidArgument("need one weight per component");
  if (!(r > 0.0)) throw InvalidArgument("curvature needs r > 0");
  const WSample smp = w.at(r, theta);
  const auto x = point_of(w, r, theta);
  CMatrix m = CMatrix::Zero(n + 1, n + 1);
  for (int i = 1; i <= n; ++i) {
    double f = 1.0;
    std::complex<double> fz;
    weight_at(h[i - 1], x, f, fz);
    const double e = std::exp(smp.w[i] - smp.w[i - 1]);
    m(i - 1, i) = std::conj(fz) * e;
    m(i, i - 1) = fz * e;
  }
  return -2.0 * kI * r * m;
}

CMatrix curvature_fd(const WFields& w, const Weights* h, double r, double theta, double step) {
  auto at = [&](double rr, double tt) { return connection_sample(w, rr, tt, h); };
  const auto c = at(r, theta);
  const double dr = step * r;
  const CMatrix dat_dr = (at(r + dr, theta).alpha_theta - at(r - dr, theta).alpha_theta) / (2.0 * dr);
  const CMatrix dar_dt = (at(r, theta + step).alpha_r - at(r, theta - step).alpha_r) / (2.0 * step);
  return dat_dr - dar_dt + c.alpha_r * c.alpha_theta - c.alpha_theta * c.alpha_r;
}

GaugeResult gauge_radial(const WFields& w, double r, const Weights* h, const GaugeOptions& opts) {
  if (!(opts.r0 > 0.0) || !(r > opts.r0)) throw InvalidArgument("gauge rays need 0 < r0 < r");
  if (opts.loop_steps < 256 || opts.radial_steps < 8) throw InvalidArgument("gauge step counts too small");
  const int n = w.rank() + 1;
  const CMatrix id = CMatrix::Identity(n, n);
  const double s0 = std::log(opts.r0), s1 = std::log(r);
  const double del = opts.dtheta_fd;

  auto alpha_s = [&](double s, double th) {  // r α_r
    const double rr = std::exp(s);
    return CMatrix(rr * connection_sample(w, rr, th, h).alpha_r);
  };
  auto dalpha_s = [&](double s, double th) {  // ∂_θ (r α_r), 4th-order FD
    return CMatrix((-alpha_s(s, th + 2 * del) + 8.0 * alpha_s(s, th + del) - 8.0 * alpha_s(s, th - del) +
                    alpha_s(s, th - 2 * del)) /
                   (12.0 * del));
  };
  // Integrates φ and ∂_θφ along one ray.
  auto ray = [&](double th, int steps, std::vector<CMatrix>* trace) {
    CMatrix phi = id, dphi = CMatrix::Zero(n, n);
    const double ds = (s1 - s0) / steps;
    if (trace) trace->push_back(phi);
    for (int k = 0; k < steps; ++k) {
      const double s = s0 + k * ds;
      const CMatrix A0 = alpha_s(s, th), Ah = alpha_s(s + 0.5 * ds, th), A1 = alpha_s(s + ds, th);
      CMatrix B0, Bh, B1;
      if (!trace) {
        B0 = dalpha_s(s, th);
        Bh = dalpha_s(s + 0.5 * ds, th);
        B1 = dalpha_s(s + ds, th);
      }
      auto f = [&](const CMatrix& A, const CMatrix& B, const CMatrix& p, const CMatrix& d, CMatrix& fp, CMatrix& fd) {
        fp = -A * p;
        if (!trace) fd = -B * p - A * d;
      };
      CMatrix k1p, k1d, k2p, k2d, k3p, k3d, k4p, k4d;
      f(A0, B0, phi, dphi, k1p, k1d);
      f(Ah, Bh, phi + 0.5 * ds * k1p, dphi + 0.5 * ds * k1d, k2p, k2d);
      f(Ah, Bh, phi + 0.5 * ds * k2p, dphi + 0.5 * ds * k2d, k3p, k3d);
      f(A1, B1, phi + ds * k3p, dphi + ds * k3d, k4p, k4d);
      phi += ds / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
      if (!trace) dphi += ds / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
      if (trace) trace->push_back(phi);
    }
    return std::make_pair(phi, dphi);
  };

  GaugeResult out;
  const int m = opts.loop_steps;
  const double dth = 2.0 * kPi / m;
  std::vector<CMatrix> tilde(static_cast<std::size_t>(2 * m + 1));
  for (int j = 0; j <= 2 * m; ++j) {
    const double th = 0.5 * j * dth;
    const auto [phi, dphi] = ray(th, opts.radial_steps, nullptr);
    const CMatrix at = connection_sample(w, r, th, h).alpha_theta;
    tilde[j] = phi.partialPivLu().solve(at * phi + dphi);
    if (j % 2 == 0 && j < 2 * m) {
      out.theta.push_back(th);
      out.alpha_theta.push_back(tilde[j]);
    }
  }
  CMatrix g = id;
  for (int k = 0; k < m; ++k) {
    const CMatrix& a0 = tilde[2 * k];
    const CMatrix& ah = tilde[2 * k + 1];
    const CMatrix& a1 = tilde[2 * k + 2];
    const CMatrix k1 = -a0 * g;
    const CMatrix k2 = -ah * (g + 0.5 * dth * k1);
    const CMatrix k3 = -ah * (g + 0.5 * dth * k2);
    const CMatrix k4 = -a1 * (g + dth * k3);
    g += dth / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  out.gauged = holonomy_from_matrix(g);
  out.gauged.r = r;
  out.gauged.steps = m;
  out.direct = holonomy_loop(w, r, m, h);
  out.phase_difference = phase_distance(out.direct.phases, out.gauged.phases);

  // α̃_s = φ⁻¹(r α_r φ + ∂_s φ) along one ray, ∂_s φ by 4th-order differences.
  std::vector<CMatrix> trace;
  const double th_check = 0.3;
  ray(th_check, opts.check_steps, &trace);
  const double ds = (s1 - s0) / opts.check_steps;
  for (int k = 2; k + 2 <= opts.check_steps; ++k) {
    const CMatrix dphi = (-trace[k + 2] + 8.0 * trace[k + 1] - 8.0 * trace[k - 1] + trace[k - 2]) / (12.0 * ds);
    const CMatrix res = trace[k].partialPivLu().solve(alpha_s(s0 + k * ds, th_check) * trace[k] + dphi);
    out.alpha_r_residual = std::max(out.alpha_r_residual, res.norm());
  }
  return out;
}

}  // namespace toda
