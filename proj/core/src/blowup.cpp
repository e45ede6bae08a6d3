#include "toda/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "toda/errors.hpp"

namespace toda {

namespace {

constexpr double kPi = std::numbers::pi;

int periodic_gap(int a, int b, int n) {
  const int d = std::abs(a - b) % n;
  return std::min(d, n - d);
}

std::vector<Peak> torus_peaks(const Field& u, const TorusGrid& g, double floor) {
  const int n = g.n();
  std::vector<Peak> out;
  for (int c = 0; c < u.rank(); ++c) {
    std::vector<Peak> cand;
    const auto& f = u[c];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double v = f[g.index(i, j)];
        if (!(v > floor)) continue;
        bool top = true;
        for (int di = -1; di <= 1 && top; ++di)
          for (int dj = -1; dj <= 1; ++dj) {
            if (!di && !dj) continue;
            if (f[g.index((i + di + n) % n, (j + dj + n) % n)] > v) {
              top = false;
              break;
            }
          }
        if (!top) continue;
        Peak p;
        p.component = c;
        p.node = g.index(i, j);
        p.x = {g.x(i), g.y(j)};
        p.height = v;
        p.eps = std::exp(-0.5 * v);
        cand.push_back(p);
      }
    std::stable_sort(cand.begin(), cand.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
    std::vector<Peak> kept;
    for (const auto& p : cand) {
      const int pi = static_cast<int>(p.node / n), pj = static_cast<int>(p.node % n);
      bool dup = false;
      for (const auto& q : kept) {
        const int qi = static_cast<int>(q.node / n), qj = static_cast<int>(q.node % n);
        if (std::max(periodic_gap(pi, qi, n), periodic_gap(pj, qj, n)) <= 3) dup = true;
      }
      if (!dup) kept.push_back(p);
    }
    out.insert(out.end(), kept.begin(), kept.end());
  }
  return out;
}

std::vector<Peak> polar_peaks(const Field& u, const PolarGrid& g, double floor) {
  const int nr = g.n_r(), nt = g.n_t();
  std::vector<Peak> out;
  for (int c = 0; c < u.rank(); ++c) {
    const auto& f = u[c];
    std::vector<Peak> cand;
    for (int k = 0; k <= nr; ++k)
      for (int m = 0; m < nt; ++m) {
        if (k == 0 && g.has_axis() && m > 0) break;
        const double v = f[g.index(k, m)];
        if (!(v > floor)) continue;
        bool top = true;
        if (k == 0 && g.has_axis()) {
          for (int mm = 0; mm < nt && top; ++mm)
            if (nr >= 1 && f[g.index(1, mm)] > v) top = false;
        } else {
          const int nbr[4][2] = {{k - 1, m}, {k + 1, m}, {k, (m + 1) % nt}, {k, (m + nt - 1) % nt}};
          for (const auto& q : nbr)
            if (q[0] >= 0 && q[0] <= nr && f[g.index(q[0], q[1])] > v) top = false;
        }
        if (!top) continue;
        Peak p;
        p.component = c;
        p.node = g.index(k, m);
        p.x = g.cartesian(k, m);
        p.height = v;
        p.eps = std::exp(-0.5 * v);
        cand.push_back(p);
      }
    std::stable_sort(cand.begin(), cand.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
    std::vector<Peak> kept;
    for (const auto& p : cand) {
      const int pk = static_cast<int>(p.node / nt), pm = static_cast<int>(p.node % nt);
      bool dup = false;
      for (const auto& q : kept) {
        const int qk = static_cast<int>(q.node / nt), qm = static_cast<int>(q.node % nt);
        const bool near_axis = g.has_axis() && std::min(pk, qk) == 0;
        if (std::abs(pk - qk) <= 3 && (near_axis || periodic_gap(pm, qm, nt) <= 3)) dup = true;
      }
      if (!dup) kept.push_back(p);
    }
    out.insert(out.end(), kept.begin(), kept.end());
  }
  return out;
}

double node_distance(const Grid& grid, std::size_t q, std::array<double, 2> c) {
  if (const auto* t = std::get_if<TorusGrid>(&grid)) {
    const int n = t->n();
    const double dx = t->wrap(t->x(static_cast<int>(q / n)) - c[0]);
    const double dy = t->wrap(t->y(static_cast<int>(q % n)) - c[1]);
    return std::hypot(dx, dy);
  }
  const auto& p = std::get<PolarGrid>(grid);
  const auto x = p.cartesian(static_cast<int>(q / p.n_t()), static_cast<int>(q % p.n_t()));
  return std::hypot(x[0] - c[0], x[1] - c[1]);
}

double node_weight(const Grid& grid, std::size_t q) {
  if (const auto* t = std::get_if<TorusGrid>(&grid)) return t->weight();
  const auto& p = std::get<PolarGrid>(grid);
  return p.weight(static_cast<int>(q / p.n_t()));
}

}  // namespace

std::vector<Peak> detect_peaks(const Field& u, const Grid& grid, double floor) {
  if (u.size() != grid_size(grid)) throw InvalidArgument("field does not match grid");
  std::vector<Peak> peaks = std::holds_alternative<TorusGrid>(grid) ? torus_peaks(u, std::get<TorusGrid>(grid), floor)
                                                                   : polar_peaks(u, std::get<PolarGrid>(grid), floor);
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
  return peaks;
}

MassProfile local_mass_profile(const Field& u, const WeightData& h, const Grid& grid, std::array<double, 2> center,
                               std::vector<double> radii) {
  const std::size_t nodes = grid_size(grid);
  if (u.size() != nodes) throw InvalidArgument("field does not match grid");
  if (h.rank() != u.rank()) throw InvalidArgument("need one weight per component");
  if (radii.empty()) throw InvalidArgument("no radii given");
  for (double r : radii)
    if (!(r > 0.0)) throw InvalidArgument("radii must be positive");
  std::sort(radii.begin(), radii.end());
  if (const auto* t = std::get_if<TorusGrid>(&grid))
    if (radii.back() > 0.5 * t->length()) throw InvalidArgument("radius exceeds half the torus side");

  std::vector<double> dist(nodes);
  for (std::size_t q = 0; q < nodes; ++q) dist[q] = node_distance(grid, q, center);
  std::vector<std::size_t> order(nodes);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

  MassProfile mp;
  mp.center = center;
  mp.radii = radii;
  for (int i = 0; i < u.rank(); ++i) {
    std::vector<double> s;
    double acc = 0.0;
    std::size_t pos = 0;
    for (double r : radii) {
      while (pos < nodes && dist[order[pos]] <= r) {
        const std::size_t q = order[pos++];
        const double v = h.h[i][q] * std::exp(u[i][q]) * node_weight(grid, q);
        if (!std::isfinite(v)) throw NumericError("mass integrand overflowed");
        acc += v;
      }
      s.push_back(acc);
    }
    mp.sigma.push_back(std::move(s));
  }
  return mp;
}

Plateau plateau_masses(const Field& u, const WeightData& h, const TorusGrid& grid, const Peak& peak,
                       std::span<const Peak> others, int samples) {
  if (samples < 5) throw InvalidArgument("plateau needs at least 5 radii");
  double r_hi = 0.25 * grid.length();
  const double cell = grid.spacing();
  for (const auto& o : others) {
    const double d = std::hypot(grid.wrap(o.x[0] - peak.x[0]), grid.wrap(o.x[1] - peak.x[1]));
    if (d > 3.0 * cell) r_hi = std::min(r_hi, 0.5 * d);
  }
  const double r_lo = 10.0 * peak.eps;
  if (!(r_lo < r_hi)) throw InvalidArgument("no scale separation between 10ε and the outer radius");
  std::vector<double> radii(static_cast<std::size_t>(samples));
  const double step = std::log(r_hi / r_lo) / (samples - 1);
  for (int j = 0; j < samples; ++j) radii[j] = r_lo * std::exp(j * step);
  radii.back() = r_hi;

  Plateau pl;
  pl.profile = local_mass_profile(u, h, grid, peak.x, radii);
  for (int i = 0; i < u.rank(); ++i) {
    const auto& s = pl.profile.sigma[i];
    int best = 1;
    double best_slope = std::numeric_limits<double>::infinity();
    for (int j = 1; j + 1 < samples; ++j) {
      const double slope = std::abs(s[j + 1] - s[j - 1]) / (2.0 * step);
      if (slope < best_slope) {
        best_slope = slope;
        best = j;
      }
    }
    pl.sigma.push_back(s[best]);
    pl.radius.push_back(radii[best]);
  }
  return pl;
}

double pohozaev_residual(double s1, double s2) { return s1 * s1 + s2 * s2 - s1 * s2 - 4.0 * kPi * (s1 + s2); }

const std::array<std::array<double, 2>, 5>& admissible_pairs() {
  static const std::array<std::array<double, 2>, 5> pairs{{{0.0, 4.0 * kPi},
                                                           {4.0 * kPi, 0.0},
                                                           {4.0 * kPi, 8.0 * kPi},
                                                           {8.0 * kPi, 4.0 * kPi},
                                                           {8.0 * kPi, 8.0 * kPi}}};
  return pairs;
}

Classification classify_blowup(double s1, double s2, double tol) {
  if (!(s1 >= 0.0) || !(s2 >= 0.0)) throw InvalidArgument("masses must be non-negative");
  Classification c;
  c.distance = std::numeric_limits<double>::infinity();
  // pairs are listed in lexicographic order, so keeping the first minimum breaks ties
  for (const auto& p : admissible_pairs()) {
    const double d = std::hypot(s1 - p[0], s2 - p[1]);
    if (std::abs(d - c.distance) <= 1e-12 * std::max(1.0, d)) {
      c.tie = true;
    } else if (d < c.distance) {
      c.distance = d;
      c.pair = p;
      c.tie = false;
    }
  }
  const double unit = 4.0 * kPi;
  for (double s : {s1, s2})
    if (s > tol * unit && s < unit * (1.0 - tol)) c.floor_ok = false;
  c.admissible = !c.tie && c.distance < tol * unit && c.floor_ok;
  return c;
}

std::array<double, 2> mass_exponents(double s1, double s2) {
  return {(2.0 * s1 - s2) / (2.0 * kPi), (2.0 * s2 - s1) / (2.0 * kPi)};
}

Rescaled rescale_bubble(const Field& u, const TorusGrid& grid, const Peak& peak, double window, int samples) {
  if (u.size() != grid.size()) throw InvalidArgument("field does not match grid");
  if (!(window > 0.0) || samples < 3) throw InvalidArgument("window must be positive with at least 3 samples");
  if (window > 1e3 || peak.eps * window > 0.25 * grid.length())
    throw InvalidArgument("rescaling window exceeds min(1e3, L/(4ε))");
  Rescaled out;
  out.n = samples;
  out.half_width = window;
  out.v = Field(u.rank(), static_cast<std::size_t>(samples) * samples);
  const int n = grid.n();
  const double hx = grid.spacing();
  for (int a = 0; a < samples; ++a)
    for (int b = 0; b < samples; ++b) {
      const double x = (peak.x[0] + peak.eps * out.coord(a)) / hx;
      const double y = (peak.x[1] + peak.eps * out.coord(b)) / hx;
      const double fx = std::floor(x), fy = std::floor(y);
      const double tx = x - fx, ty = y - fy;
      const int i0 = ((static_cast<long>(fx) % n) + n) % n, j0 = ((static_cast<long>(fy) % n) + n) % n;
      const int i1 = (i0 + 1) % n, j1 = (j0 + 1) % n;
      for (int c = 0; c < u.rank(); ++c) {
        const auto& f = u[c];
        const double v = (1 - tx) * (1 - ty) * f[grid.index(i0, j0)] + tx * (1 - ty) * f[grid.index(i1, j0)] +
                         (1 - tx) * ty * f[grid.index(i0, j1)] + tx * ty * f[grid.index(i1, j1)];
        out.v[c][static_cast<std::size_t>(a) * samples + b] = v - peak.height;
      }
    }
  return out;
}

Deviation bubble_deviation(const Rescaled& v, const RadialProfile& v0, double radius) {
  const int nc = std::min(v.v.rank(), v0.rank());
  Deviation d;
  d.per_component.assign(static_cast<std::size_t>(nc), 0.0);
  std::vector<double> pu, pdu;
  for (int a = 0; a < v.n; ++a)
    for (int b = 0; b < v.n; ++b) {
      const double rho = std::hypot(v.coord(a), v.coord(b));
      if (rho > radius) continue;
      v0.eval(rho > 0.0 ? std::log(rho) : v0.s.front(), pu, pdu);
      for (int c = 0; c < nc; ++c)
        d.per_component[c] =
            std::max(d.per_component[c], std::abs(v.v[c][static_cast<std::size_t>(a) * v.n + b] - pu[c]));
    }
  for (double x : d.per_component) d.max = std::max(d.max, x);
  return d;
}

Deviation bubble_deviation(const Rescaled& v, const Rescaled& v0, double radius) {
  if (v.n != v0.n || v.half_width != v0.half_width) throw InvalidArgument("rescaled windows differ");
  const int nc = std::min(v.v.rank(), v0.v.rank());
  Deviation d;
  d.per_component.assign(static_cast<std::size_t>(nc), 0.0);
  for (int a = 0; a < v.n; ++a)
    for (int b = 0; b < v.n; ++b) {
      if (std::hypot(v.coord(a), v.coord(b)) > radius) continue;
      const std::size_t q = static_cast<std::size_t>(a) * v.n + b;
      for (int c = 0; c < nc; ++c) d.per_component[c] = std::max(d.per_component[c], std::abs(v.v[c][q] - v0.v[c][q]));
    }
  for (double x : d.per_component) d.max = std::max(d.max, x);
  return d;
}

KelvinField kelvin_transform(const Field& u, const PolarGrid& grid, const std::vector<double>& mu) {
  if (grid.has_axis()) throw InvalidArgument("Kelvin transform needs an annulus (r = 0 maps to infinity)");
  if (grid.spacing() != RadialSpacing::geometric) throw InvalidArgument("Kelvin transform needs geometric radii");
  if (u.size() != grid.size()) throw InvalidArgument("field does not match grid");
  std::vector<double> m = mu.empty() ? std::vector<double>(static_cast<std::size_t>(u.rank()), 0.0) : mu;
  if (static_cast<int>(m.size()) != u.rank()) throw InvalidArgument("need one μ per component");
  PolarGrid inv(1.0 / grid.r_out(), 1.0 / grid.r_in(), grid.n_r(), grid.n_t(), RadialSpacing::geometric, grid.outer(),
                grid.inner());
  Field v(u.rank(), u.size(), u.gauge);
  const int nr = grid.n_r(), nt = grid.n_t();
  for (int c = 0; c < u.rank(); ++c)
    for (int k = 0; k <= nr; ++k) {
      const double shift = 2.0 * (2.0 + m[c]) * std::log(inv.r(k));
      for (int q = 0; q < nt; ++q) v[c][inv.index(k, q)] = u[c][grid.index(nr - k, q)] - shift;
    }
  return {inv, std::move(v)};
}

Field toda_residual(const Field& u, const PolarGrid& grid, const WeightData* h) {
  if (u.size() != grid.size()) throw InvalidArgument("field does not match grid");
  if (h && h->rank() != u.rank()) throw InvalidArgument("need one weight per component");
  const auto a = cartan(u.rank()).a;
  Field res(u.rank(), u.size());
  std::vector<std::vector<double>> lap;
  for (int i = 0; i < u.rank(); ++i) lap.push_back(laplacian(u[i], grid));
  for (std::size_t q = 0; q < u.size(); ++q) {
    if (is_boundary_node(grid, q)) continue;
    for (int i = 0; i < u.rank(); ++i) {
      double f = 0.0;
      for (int j = 0; j < u.rank(); ++j)
        if (a(i, j) != 0.0) f += a(i, j) * (h ? h->h[j][q] : 1.0) * std::exp(u[j][q]);
      res[i][q] = -lap[i][q] - f;
    }
  }
  return res;
}

double green_representation_check(const Field& u, const WeightData& h, const PolarGrid& grid,
                                  std::array<double, 2> x) {
  if (!grid.has_axis() && !(grid.r_in() < 1e-5 * grid.r_out()))
    throw InvalidArgument("Green representation check needs a disk or a pinhole annulus");
  if (u.size() != grid.size() || h.rank() != u.rank()) throw InvalidArgument("field and weights do not match grid");
  const auto a = cartan(u.rank()).a;
  const int nr = grid.n_r(), nt = grid.n_t();
  // snap x to the nearest node
  std::size_t xq = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < u.size(); ++q) {
    const double d = node_distance(grid, q, x);
    if (d < best) {
      best = d;
      xq = q;
    }
  }
  const auto xs = grid.cartesian(static_cast<int>(xq / nt), static_cast<int>(xq % nt));
  double bmin = std::numeric_limits<double>::infinity();
  for (int m = 0; m < nt; ++m) bmin = std::min(bmin, u[0][grid.index(nr, m)]);
  double integral = 0.0;
  for (std::size_t q = 0; q < u.size(); ++q) {
    double f = 0.0;
    for (int j = 0; j < u.rank(); ++j)
      if (a(0, j) != 0.0) f += a(0, j) * h.h[j][q] * std::exp(u[j][q]);
    if (f == 0.0) continue;
    const double w = grid.weight(static_cast<int>(q / nt));
    const double rho = std::sqrt(w / kPi);
    const double d = node_distance(grid, q, xs);
    // mean of log(1/|x−y|) over the disk of radius ρ around y
    const double kernel = d >= rho ? -std::log(d) : -std::log(rho) + 0.5 * (1.0 - d * d / (rho * rho));
    integral += kernel * f * w;
  }
  return u[0][xq] - bmin - integral / (2.0 * kPi);
}

BlowupReport diagnose_blowup(const Field& u, const WeightData& h, const TorusGrid& grid, double floor, double tol) {
  if (u.rank() != 2) throw InvalidArgument("blow-up classification is for two-component fields");
  BlowupReport rep;
  rep.peaks = detect_peaks(u, grid, floor);
  if (rep.peaks.empty()) throw ValidationError("no peak above the floor");
  const Peak& top = rep.peaks.front();
  rep.plateau = plateau_masses(u, h, grid, top, std::span<const Peak>(rep.peaks).subspan(1));
  const double s1 = rep.plateau.sigma[0], s2 = rep.plateau.sigma[1];
  rep.pohozaev = pohozaev_residual(s1, s2);
  rep.classification = classify_blowup(s1, s2, tol);
  rep.exponents = mass_exponents(s1, s2);
  return rep;
}

}  // namespace toda
