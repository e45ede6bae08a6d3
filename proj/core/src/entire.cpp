#include "toda/entire.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "toda/meanfield.hpp"

namespace toda {

namespace {

using State = std::vector<double>;  // [u_1..u_N, u_1'..u_N', m_1..m_N]

struct RadialRhs {
  const Eigen::MatrixXd& a;
  const std::vector<double>& mu;
  int n;

  void operator()(double s, const State& y, State& f) const {
    f.resize(y.size());
    for (int j = 0; j < n; ++j) {
      const double e = std::exp((2.0 + mu[j]) * s + y[j]);
      f[2 * n + j] = e;
    }
    for (int i = 0; i < n; ++i) {
      f[i] = y[n + i];
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += a(i, j) * f[2 * n + j];
      f[n + i] = -acc;
    }
  }
};

State rk4(const RadialRhs& rhs, double s, const State& y, double h) {
  State k1, k2, k3, k4, t(y.size());
  rhs(s, y, k1);
  for (std::size_t q = 0; q < y.size(); ++q) t[q] = y[q] + 0.5 * h * k1[q];
  rhs(s + 0.5 * h, t, k2);
  for (std::size_t q = 0; q < y.size(); ++q) t[q] = y[q] + 0.5 * h * k2[q];
  rhs(s + 0.5 * h, t, k3);
  for (std::size_t q = 0; q < y.size(); ++q) t[q] = y[q] + h * k3[q];
  rhs(s + h, t, k4);
  State out(y.size());
  for (std::size_t q = 0; q < y.size(); ++q) out[q] = y[q] + h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
  return out;
}

// Step doubling: accept the two-half-step result once it agrees with the full step.
State advance(const RadialRhs& rhs, double s, const State& y, double h, const RadialOptions& o, int depth) {
  if (!o.adaptive) return rk4(rhs, s, y, h);
  const State full = rk4(rhs, s, y, h);
  const State half = rk4(rhs, s + 0.5 * h, rk4(rhs, s, y, 0.5 * h), 0.5 * h);
  double err = 0.0, scale = 1.0;
  for (std::size_t q = 0; q < y.size(); ++q) {
    err = std::max(err, std::abs(full[q] - half[q]));
    scale = std::max(scale, std::abs(half[q]));
  }
  if (!(err > o.step_tol * scale) || depth >= o.max_halvings) return half;
  const State mid = advance(rhs, s, y, 0.5 * h, o, depth + 1);
  return advance(rhs, s + 0.5 * h, mid, 0.5 * h, o, depth + 1);
}

void check_mu(const std::vector<double>& mu) {
  if (mu.empty()) throw InvalidArgument("need at least one component");
  for (double m : mu)
    if (!(m > -2.0)) throw InvalidArgument("singular weights must satisfy mu > -2");
}

std::vector<double> linspace_grid(double s0, double s1, double ds) {
  if (!(s1 > s0) || !(ds > 0.0)) throw InvalidArgument("need s0 < s1 and ds > 0");
  const auto n = static_cast<std::size_t>(std::llround((s1 - s0) / ds));
  if (n < 4) throw InvalidArgument("s-grid too coarse");
  std::vector<double> s(n + 1);
  for (std::size_t k = 0; k <= n; ++k) s[k] = s0 + (s1 - s0) * static_cast<double>(k) / static_cast<double>(n);
  return s;
}

RadialProfile closed_form(double lambda, double denom, int rank, const Eigen::MatrixXd& a, double s0, double s1,
                          double ds) {
  RadialProfile p;
  p.a = a;
  p.mu.assign(static_cast<std::size_t>(rank), 0.0);
  p.s = linspace_grid(s0, s1, ds);
  std::vector<double> u(p.s.size()), du(p.s.size()), m(p.s.size());
  for (std::size_t k = 0; k < p.s.size(); ++k) {
    const double y = std::exp(lambda + 2.0 * p.s[k]) / denom;
    u[k] = lambda - 2.0 * std::log1p(y);
    du[k] = -4.0 * y / (1.0 + y);
    m[k] = denom / 2.0 * y / (1.0 + y);
  }
  p.u.assign(static_cast<std::size_t>(rank), u);
  p.du.assign(static_cast<std::size_t>(rank), du);
  p.mass.assign(static_cast<std::size_t>(rank), m);
  return p;
}

}  // namespace

void RadialProfile::eval(double sv, std::vector<double>& u_out, std::vector<double>& du_out) const {
  const int n = rank();
  u_out.assign(static_cast<std::size_t>(n), 0.0);
  du_out.assign(static_cast<std::size_t>(n), 0.0);
  const double h = ds();
  const double x = std::clamp(sv, s.front(), s.back());
  auto k = static_cast<std::size_t>(std::floor((x - s.front()) / h));
  k = std::min(k, s.size() - 2);
  const double t = (x - s[k]) / h;
  // u'' from the equation at both ends, for the Hermite interpolation of u'.
  auto second = [&](std::size_t idx, int i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += a(i, j) * std::exp((2.0 + mu[j]) * s[idx] + u[j][idx]);
    return -acc;
  };
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  for (int i = 0; i < n; ++i) {
    u_out[i] = h00 * u[i][k] + h10 * h * du[i][k] + h01 * u[i][k + 1] + h11 * h * du[i][k + 1];
    du_out[i] = h00 * du[i][k] + h10 * h * second(k, i) + h01 * du[i][k + 1] + h11 * h * second(k + 1, i);
  }
}

RadialProfile liouville_bubble(double lambda, double s0, double s1, double ds) {
  return closed_form(lambda, 4.0, 1, Eigen::MatrixXd::Constant(1, 1, 2.0), s0, s1, ds);
}

RadialProfile symmetric_toda_bubble(double lambda, double s0, double s1, double ds) {
  return closed_form(lambda, 8.0, 2, cartan(2).a, s0, s1, ds);
}

RadialProfile radial_toda_solve(const std::vector<double>& mu, const RadialInit& init, const RadialOptions& opts,
                                const std::optional<Eigen::MatrixXd>& coupling) {
  check_mu(mu);
  const int n = static_cast<int>(mu.size());
  if (init.c.size() != mu.size()) throw InvalidArgument("initial values must match the number of weights");
  if (init.slope && init.slope->size() != mu.size()) throw InvalidArgument("initial slopes must match weights");
  RadialProfile p;
  p.a = coupling ? *coupling : cartan(n).a;
  if (p.a.rows() != n || p.a.cols() != n) throw InvalidArgument("coupling matrix has the wrong shape");
  p.mu = mu;
  p.s = linspace_grid(opts.s0, opts.s1, opts.ds);
  const double s0 = p.s.front();

  State y(static_cast<std::size_t>(3 * n));
  for (int i = 0; i < n; ++i) {
    if (init.slope) {
      y[i] = init.c[i];
      y[n + i] = (*init.slope)[i];
      const double rate = 2.0 + mu[i] + (*init.slope)[i];
      y[2 * n + i] = rate > 0.0 ? std::exp((2.0 + mu[i]) * s0 + init.c[i]) / rate : 0.0;
    } else {
      // First-order series of the regular solution below s0.
      double du = 0.0, corr = 0.0;
      for (int j = 0; j < n; ++j) {
        const double e = std::exp(init.c[j] + (2.0 + mu[j]) * s0);
        corr += p.a(i, j) * e / ((2.0 + mu[j]) * (2.0 + mu[j]));
        du += p.a(i, j) * e / (2.0 + mu[j]);
      }
      y[i] = init.c[i] - corr;
      y[n + i] = -du;
      y[2 * n + i] = std::exp(init.c[i] + (2.0 + mu[i]) * s0) / (2.0 + mu[i]);
    }
  }

  p.u.assign(static_cast<std::size_t>(n), std::vector<double>(p.s.size()));
  p.du = p.u;
  p.mass = p.u;
  const RadialRhs rhs{p.a, p.mu, n};
  for (std::size_t k = 0; k < p.s.size(); ++k) {
    if (k > 0) y = advance(rhs, p.s[k - 1], y, p.s[k] - p.s[k - 1], opts, 0);
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(y[i]) || !std::isfinite(y[n + i]) || y[i] > 700.0) {
        std::ostringstream os;
        os << "radial ODE diverged at s = " << p.s[k];
        throw DivergenceError(os.str(), p.s[k]);
      }
      p.u[i][k] = y[i];
      p.du[i][k] = y[n + i];
      p.mass[i][k] = y[2 * n + i];
    }
  }
  return p;
}

GammaFit gamma_exponents(const RadialProfile& p, double drift_tol) {
  const std::size_t n_s = p.nodes();
  const double span = p.s.back() - p.s.front();
  const double decade = std::log(10.0);
  if (n_s < 8 || span < 2.0 * decade) throw FitUnstable("s-range too short for a tail fit");
  GammaFit fit;
  const auto back = static_cast<std::size_t>(std::llround(decade / p.ds()));
  const std::size_t tail0 = n_s - std::max<std::size_t>(n_s / 4, 2);
  const std::size_t head1 = std::max<std::size_t>(n_s / 20, 2);
  auto lsq_slope = [&](const std::vector<double>& u, std::size_t lo, std::size_t hi, double& intercept) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(hi - lo);
    for (std::size_t k = lo; k < hi; ++k) {
      sx += p.s[k];
      sy += u[k];
      sxx += p.s[k] * p.s[k];
      sxy += p.s[k] * u[k];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    intercept = (sy - slope * sx) / m;
    return slope;
  };
  for (int i = 0; i < p.rank(); ++i) {
    const double drift = std::abs(p.du[i].back() - p.du[i][n_s - 1 - back]);
    fit.slope_drift.push_back(drift);
    if (!(drift < drift_tol)) {
      std::ostringstream os;
      os << "tail of component " << i + 1 << " not resolved: u' drifts by " << drift << " over the last decade";
      throw FitUnstable(os.str());
    }
    double a = 0.0;
    const double slope = lsq_slope(p.u[i], tail0, n_s, a);
    fit.gamma.push_back(-slope);
    fit.a.push_back(a);
    double a0 = 0.0;
    fit.gamma0.push_back(-lsq_slope(p.u[i], 0, head1, a0));
    const double kappa = -slope - p.mu[i] - 2.0;
    if (!(kappa > 0.0)) throw FitUnstable("tail exponent does not give a finite mass (gamma - mu <= 2)");
    const double s1 = p.s.back();
    fit.mass.push_back(p.mass[i].back() + std::exp((2.0 + p.mu[i] + slope) * s1 + a) / kappa);
  }
  return fit;
}

RadialProfile radial_toda_shoot(const std::vector<double>& mu, const std::vector<double>& c,
                                const std::vector<double>& target_gamma, const RadialOptions& opts, double tol,
                                int max_iters) {
  const int n = static_cast<int>(mu.size());
  if (target_gamma.size() != mu.size()) throw InvalidArgument("target gamma must match the weights");
  std::vector<double> slope(static_cast<std::size_t>(n), 0.0);
  auto gamma_at = [&](const std::vector<double>& sl) {
    const auto prof = radial_toda_solve(mu, RadialInit{c, sl}, opts);
    return std::make_pair(gamma_exponents(prof).gamma, prof);
  };
  auto [g, prof] = gamma_at(slope);
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd f(n);
    for (int i = 0; i < n; ++i) f[i] = g[i] - target_gamma[i];
    if (f.cwiseAbs().maxCoeff() < tol) return prof;
    Eigen::MatrixXd jac(n, n);
    const double delta = 1e-6;
    for (int j = 0; j < n; ++j) {
      auto sl = slope;
      sl[j] += delta;
      const auto gj = gamma_at(sl).first;
      for (int i = 0; i < n; ++i) jac(i, j) = (gj[i] - g[i]) / delta;
    }
    const Eigen::VectorXd step = jac.fullPivLu().solve(-f);
    double t = 1.0;
    bool accepted = false;
    while (t > 1e-4) {
      auto sl = slope;
      for (int j = 0; j < n; ++j) sl[j] += t * step[j];
      try {
        auto [g2, p2] = gamma_at(sl);
        double norm2 = 0.0;
        for (int i = 0; i < n; ++i) norm2 = std::max(norm2, std::abs(g2[i] - target_gamma[i]));
        if (norm2 < f.cwiseAbs().maxCoeff()) {
          slope = sl;
          g = g2;
          prof = std::move(p2);
          accepted = true;
          break;
        }
      } catch (const DivergenceError&) {
      } catch (const FitUnstable&) {
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  throw FitUnstable("shooting did not reach the target tail slopes");
}

QuantizationCheck check_quantization(const std::vector<double>& gamma, const std::vector<double>& mu) {
  if (gamma.size() != mu.size()) throw InvalidArgument("gamma and mu must have equal length");
  QuantizationCheck q;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    q.residual.push_back(gamma[i] - 2.0 * (2.0 + mu[i]));
    if (mu[i] > 0.0) q.outside_hypothesis = true;
  }
  return q;
}

double global_pohozaev_residual(const std::vector<double>& gamma, const std::vector<double>& mu) {
  if (gamma.size() != mu.size()) throw InvalidArgument("gamma and mu must have equal length");
  const auto c = cartan(static_cast<int>(mu.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < mu.size(); ++j)
      s += c.a_inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * gamma[i] *
           (gamma[j] - 2.0 * (2.0 + mu[j]));
  return s;
}

LocalExponentReport local_exponent_check(const RadialProfile& p) {
  LocalExponentReport r;
  const auto fit = gamma_exponents(p);
  r.origin_pass = r.tail_pass = true;
  for (int i = 0; i < p.rank(); ++i) {
    const double g0 = fit.gamma0[i] - p.mu[i];
    r.origin_exponent.push_back(g0);
    r.origin_margin.push_back(2.0 - g0);
    r.tail_margin.push_back(fit.gamma[i] - p.mu[i] - 2.0);
    r.origin_pass = r.origin_pass && r.origin_margin.back() > 0.0;
    r.tail_pass = r.tail_pass && r.tail_margin.back() > 0.0;
  }
  return r;
}

SingularLiouvilleResult singular_liouville_gamma(double alpha, double c, const RadialOptions& opts) {
  if (!(alpha >= 0.0)) throw InvalidArgument("alpha must be non-negative");
  SingularLiouvilleResult out;
  out.profile = radial_toda_solve({2.0 * alpha + 2.0}, RadialInit{{c}, std::nullopt}, opts,
                                  Eigen::MatrixXd::Constant(1, 1, 2.0));
  const auto fit = gamma_exponents(out.profile);
  out.gamma = fit.mass[0];
  out.gamma_factor2 = 2.0 * fit.mass[0];
  out.margin = out.gamma - (2.0 + alpha);
  return out;
}

BarrierResult barrier_check(double c1, double r_lo, double r_hi, int n) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo)) throw InvalidArgument("barrier range must satisfy 0 < r_lo < r_hi");
  if (n < 4) throw InvalidArgument("barrier grid needs at least 4 intervals");
  BarrierResult b;
  const double s_lo = std::log(r_lo), s_hi = std::log(r_hi);
  b.h = (s_hi - s_lo) / n;
  auto w = [&](double s, double sign) { return -4.0 * s + sign * (c1 - c1 * std::exp(-0.5 * s)); };
  for (double sign : {1.0, -1.0}) {
    double worst = 0.0;
    for (int k = 1; k < n; ++k) {
      const double s = s_lo + k * b.h;
      // Δw = e^{−2s} w''(s) in log-radius.
      const double lap = std::exp(-2.0 * s) * (w(s + b.h, sign) - 2.0 * w(s, sign) + w(s - b.h, sign)) / (b.h * b.h);
      const double target = -sign * 0.25 * c1 * std::exp(-2.5 * s);
      worst = std::max(worst, std::abs(lap - target));
    }
    (sign > 0 ? b.residual_plus : b.residual_minus) = worst;
  }
  b.max_residual = std::max(b.residual_plus, b.residual_minus);
  return b;
}

RadialProfile kelvin_transform(const RadialProfile& p) {
  RadialProfile v;
  v.a = p.a;
  v.mu = p.mu;
  const std::size_t n_s = p.nodes();
  v.s.resize(n_s);
  for (std::size_t k = 0; k < n_s; ++k) v.s[k] = -p.s[n_s - 1 - k];
  v.u.assign(p.u.size(), std::vector<double>(n_s));
  v.du = v.u;
  v.mass = v.u;
  for (int i = 0; i < p.rank(); ++i) {
    const double shift = 2.0 * (2.0 + p.mu[i]);
    const double total = p.mass[i].back();
    for (std::size_t k = 0; k < n_s; ++k) {
      const std::size_t src = n_s - 1 - k;
      v.u[i][k] = p.u[i][src] + shift * p.s[src];
      v.du[i][k] = -p.du[i][src] - shift;
      v.mass[i][k] = total - p.mass[i][src];
    }
  }
  return v;
}

double radial_residual(const RadialProfile& p) {
  double worst = 0.0;
  const double h = p.ds();
  for (int i = 0; i < p.rank(); ++i)
    for (std::size_t k = 1; k + 1 < p.nodes(); ++k) {
      double acc = (p.du[i][k + 1] - p.du[i][k - 1]) / (2.0 * h);
      for (int j = 0; j < p.rank(); ++j) acc += p.a(i, j) * std::exp((2.0 + p.mu[j]) * p.s[k] + p.u[j][k]);
      worst = std::max(worst, std::abs(acc));
    }
  return worst;
}

}  // namespace toda
