#include "toda/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "toda/errors.hpp"

namespace toda {

namespace {

constexpr double kPi = std::numbers::pi;

void check_shapes(const Field& u, const RhoPoint& rho, const WeightData& h, std::size_t nodes) {
  if (u.rank() != rho.rank() || u.rank() != h.rank())
    throw InvalidArgument("field, rho and weights must have the same number of components");
  for (int i = 0; i < u.rank(); ++i)
    if (u[i].size() != nodes || h.h[static_cast<std::size_t>(i)].size() != nodes)
      throw InvalidArgument("field or weight size does not match grid");
}

double max_of(std::span<const double> u) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : u) {
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite value in field (max u = " << *std::max_element(u.begin(), u.end()) << ")";
      throw NumericError(os.str());
    }
    m = std::max(m, v);
  }
  return m;
}

// Zero the boundary circles of a polar field.
void zero_boundary(std::vector<double>& f, const PolarGrid& grid) {
  for (std::size_t q = 0; q < f.size(); ++q)
    if (is_boundary_node(grid, q)) f[q] = 0.0;
}

}  // namespace

CartanData cartan(int rank) {
  if (rank < 1 || rank > 8) throw InvalidArgument("Cartan rank must be in [1, 8]");
  CartanData c;
  c.n = rank;
  c.a = Eigen::MatrixXd::Zero(rank, rank);
  c.a_inv = Eigen::MatrixXd::Zero(rank, rank);
  for (int i = 0; i < rank; ++i) {
    c.a(i, i) = 2.0;
    if (i + 1 < rank) c.a(i, i + 1) = c.a(i + 1, i) = -1.0;
  }
  // a^{ij} = min(i,j) (N + 1 − max(i,j)) / (N + 1), 1-based.
  for (int i = 1; i <= rank; ++i)
    for (int j = 1; j <= rank; ++j)
      c.a_inv(i - 1, j - 1) = static_cast<double>(std::min(i, j) * (rank + 1 - std::max(i, j))) / (rank + 1);
  const double defect = (c.a * c.a_inv - Eigen::MatrixXd::Identity(rank, rank)).cwiseAbs().maxCoeff();
  if (defect > 1e-14) throw NumericError("Cartan inverse check failed");
  return c;
}

RhoPoint::RhoPoint(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("rho must have at least one component");
  for (double v : values_)
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("rho components must be positive");
}

WeightFunction WeightFunction::constant(double c) {
  return {[c](double, double) { return c; }, [](double, double) { return std::array<double, 2>{0.0, 0.0}; }};
}

WeightFunction WeightPreset::function() const {
  if (kind == Kind::constant) return WeightFunction::constant(value);
  const double a = amplitude;
  const double k = 2.0 * kPi * mode / length;
  return {[a, k](double x, double) { return std::exp(a * std::cos(k * x)); },
          [a, k](double x, double) {
            return std::array<double, 2>{-a * k * std::sin(k * x) * std::exp(a * std::cos(k * x)), 0.0};
          }};
}

double WeightPreset::laplacian_log(double x, double) const {
  if (kind == Kind::constant) return 0.0;
  const double k = 2.0 * kPi * mode / length;
  return -amplitude * k * k * std::cos(k * x);
}

WeightPreset parse_weight_preset(const std::string& spec, double length) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.empty()) throw ValidationError("empty weight preset");
  WeightPreset p;
  p.length = length;
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw ValidationError("bad number '" + s + "' in weight preset");
      return v;
    } catch (const std::logic_error&) {
      throw ValidationError("bad number '" + s + "' in weight preset");
    }
  };
  if (parts[0] == "const") {
    if (parts.size() > 2) throw ValidationError("const preset takes at most one value");
    p.kind = WeightPreset::Kind::constant;
    if (parts.size() == 2) p.value = number(parts[1]);
    if (!(p.value > 0.0)) throw ValidationError("const weight must be positive");
  } else if (parts[0] == "cos-bump") {
    if (parts.size() < 2 || parts.size() > 3) throw ValidationError("cos-bump preset is cos-bump:A[:mode]");
    p.kind = WeightPreset::Kind::cos_bump;
    p.amplitude = number(parts[1]);
    if (parts.size() == 3) p.mode = static_cast<int>(number(parts[2]));
  } else {
    throw ValidationError("unknown weight preset '" + parts[0] + "'");
  }
  return p;
}

WeightData WeightData::constant(int rank, std::size_t nodes, double value) {
  if (!(value > 0.0)) throw InvalidArgument("weights must be positive");
  WeightData w;
  w.h.assign(static_cast<std::size_t>(rank), std::vector<double>(nodes, value));
  return w;
}

WeightData WeightData::from_field(const Field& f) {
  WeightData w{f.components};
  for (const auto& c : w.h)
    for (double v : c)
      if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("weights must be positive and finite");
  return w;
}

WeightData WeightData::sample(const std::vector<WeightPreset>& presets, const TorusGrid& grid) {
  std::vector<WeightFunction> fns;
  for (const auto& p : presets) fns.push_back(p.function());
  return sample(fns, grid);
}

WeightData WeightData::sample(const std::vector<WeightFunction>& fns, const TorusGrid& grid) {
  Field f;
  for (const auto& fn : fns) {
    std::vector<double> c(grid.size());
    for (int i = 0; i < grid.n(); ++i)
      for (int j = 0; j < grid.n(); ++j) c[grid.index(i, j)] = fn.value(grid.x(i), grid.y(j));
    f.components.push_back(std::move(c));
  }
  return from_field(f);
}

WeightData WeightData::sample(const std::vector<WeightFunction>& fns, const PolarGrid& grid) {
  Field f;
  for (const auto& fn : fns) {
    std::vector<double> c(grid.size());
    for (int k = 0; k < grid.rings(); ++k)
      for (int m = 0; m < grid.n_t(); ++m) {
        const auto p = grid.cartesian(k, m);
        c[grid.index(k, m)] = fn.value(p[0], p[1]);
      }
    f.components.push_back(std::move(c));
  }
  return from_field(f);
}

std::vector<double> normalized_exponential(std::span<const double> u, std::span<const double> h,
                                           const Grid& grid, double* log_integral) {
  const double top = max_of(u);
  std::vector<double> e(u.size());
  for (std::size_t q = 0; q < u.size(); ++q) e[q] = h[q] * std::exp(u[q] - top);
  const double total = integrate(e, grid);
  if (!(total > 0.0)) throw NumericError("∫ h e^u vanished (max u = " + std::to_string(top) + ")");
  for (double& v : e) v /= total;
  if (log_integral) *log_integral = top + std::log(total);
  return e;
}

// ---- torus ----------------------------------------------------------------

double functional_value(const Field& u, const RhoPoint& rho, const WeightData& h, const TorusGrid& grid) {
  check_shapes(u, rho, h, grid.size());
  const CartanData c = cartan(u.rank());
  const int n = u.rank();
  std::vector<std::vector<double>> neg_lap(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    neg_lap[i] = laplacian(u[i], grid);
    for (double& v : neg_lap[i]) v = -v;
  }
  double dirichlet = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (c.a_inv(i, j) == 0.0) continue;
      double s = 0.0;
      for (std::size_t q = 0; q < grid.size(); ++q) s += neg_lap[i][q] * u[j][q];
      dirichlet += c.a_inv(i, j) * s * grid.weight();
    }
  double linear = 0.0, logs = 0.0;
  const Grid g = grid;
  for (int j = 0; j < n; ++j) {
    linear += rho[j] * mean(u[j], grid);
    double log_int = 0.0;
    normalized_exponential(u[j], h.h[j], g, &log_int);
    logs += rho[j] * log_int;
  }
  return 0.5 * dirichlet + linear - logs;
}

Field functional_gradient(const Field& u, const RhoPoint& rho, const WeightData& h, const TorusGrid& grid) {
  check_shapes(u, rho, h, grid.size());
  const CartanData c = cartan(u.rank());
  const int n = u.rank();
  const Grid g = grid;
  const double inv_area = 1.0 / grid.area();
  Field out(n, grid.size(), Gauge::none);
  std::vector<std::vector<double>> neg_lap(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    neg_lap[j] = laplacian(u[j], grid);
    for (double& v : neg_lap[j]) v = -v;
  }
  for (int k = 0; k < n; ++k) {
    const auto e = normalized_exponential(u[k], h.h[k], g);
    for (std::size_t q = 0; q < grid.size(); ++q) {
      double v = rho[k] * inv_area - rho[k] * e[q];
      for (int j = 0; j < n; ++j) v += c.a_inv(k, j) * neg_lap[j][q];
      out[k][q] = v;
    }
  }
  return out;
}

Field residual(const Field& u, const RhoPoint& rho, const WeightData& h, const TorusGrid& grid) {
  check_shapes(u, rho, h, grid.size());
  const CartanData c = cartan(u.rank());
  const int n = u.rank();
  const Grid g = grid;
  const double inv_area = 1.0 / grid.area();
  std::vector<std::vector<double>> e(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) e[j] = normalized_exponential(u[j], h.h[j], g);
  Field out(n, grid.size(), Gauge::none);
  for (int i = 0; i < n; ++i) {
    const auto lap = laplacian(u[i], grid);
    for (std::size_t q = 0; q < grid.size(); ++q) {
      double v = -lap[q];
      for (int j = 0; j < n; ++j) v -= rho[j] * c.a(i, j) * (e[j][q] - inv_area);
      out[i][q] = v;
    }
  }
  return out;
}

// ---- polar (Dirichlet) -------------------------------------------------------

double functional_value(const Field& u, const RhoPoint& rho, const WeightData& h, const PolarGrid& grid) {
  check_shapes(u, rho, h, grid.size());
  const CartanData c = cartan(u.rank());
  const int n = u.rank();
  std::vector<std::vector<double>> neg_lap(static_cast<std::size_t>(n)), inner(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    inner[i] = u[i];
    zero_boundary(inner[i], grid);
    neg_lap[i] = laplacian(inner[i], grid);
    for (double& v : neg_lap[i]) v = -v;
    zero_boundary(neg_lap[i], grid);
  }
  double dirichlet = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::vector<double> prod(grid.size());
      for (std::size_t q = 0; q < grid.size(); ++q) prod[q] = neg_lap[i][q] * inner[j][q];
      dirichlet += c.a_inv(i, j) * integrate(prod, grid);
    }
  double logs = 0.0;
  const Grid g = grid;
  for (int j = 0; j < n; ++j) {
    double log_int = 0.0;
    normalized_exponential(inner[j], h.h[j], g, &log_int);
    logs += rho[j] * log_int;
  }
  return 0.5 * dirichlet - logs;
}

Field functional_gradient(const Field& u, const RhoPoint& rho, const WeightData& h, const PolarGrid& grid) {
  check_shapes(u, rho, h, grid.size());
  const CartanData c = cartan(u.rank());
  const int n = u.rank();
  const Grid g = grid;
  std::vector<std::vector<double>> neg_lap(static_cast<std::size_t>(n)), inner(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    inner[j] = u[j];
    zero_boundary(inner[j], grid);
    neg_lap[j] = laplacian(inner[j], grid);
    for (double& v : neg_lap[j]) v = -v;
  }
  Field out(n, grid.size(), Gauge::dirichlet);
  for (int k = 0; k < n; ++k) {
    const auto e = normalized_exponential(inner[k], h.h[k], g);
    for (std::size_t q = 0; q < grid.size(); ++q) {
      if (is_boundary_node(grid, q)) continue;
      double v = -rho[k] * e[q];
      for (int j = 0; j < n; ++j) v += c.a_inv(k, j) * neg_lap[j][q];
      out[k][q] = v;
    }
  }
  return out;
}

Field residual(const Field& u, const RhoPoint& rho, const WeightData& h, const PolarGrid& grid) {
  check_shapes(u, rho, h, grid.size());
  const CartanData c = cartan(u.rank());
  const int n = u.rank();
  const Grid g = grid;
  std::vector<std::vector<double>> e(static_cast<std::size_t>(n)), inner(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    inner[j] = u[j];
    zero_boundary(inner[j], grid);
    e[j] = normalized_exponential(inner[j], h.h[j], g);
  }
  Field out(n, grid.size(), Gauge::dirichlet);
  for (int i = 0; i < n; ++i) {
    const auto lap = laplacian(inner[i], grid);
    for (std::size_t q = 0; q < grid.size(); ++q) {
      if (is_boundary_node(grid, q)) {
        out[i][q] = u[i][q];
        continue;
      }
      double v = -lap[q];
      for (int j = 0; j < n; ++j) v -= rho[j] * c.a(i, j) * e[j][q];
      out[i][q] = v;
    }
  }
  return out;
}

double sup_norm(const Field& f) {
  double s = 0.0;
  for (const auto& c : f.components)
    for (double v : c) s = std::max(s, std::abs(v));
  return s;
}

// ---- conditions --------------------------------------------------------------

MTClass mt_classify(const RhoPoint& rho, double rel_tol) {
  const double wall = 4.0 * kPi;
  MTClass out;
  for (int i = 0; i < rho.rank(); ++i) {
    if (std::abs(rho[i] - wall) <= rel_tol * wall)
      out.critical.push_back(i + 1);
    else if (rho[i] > wall)
      out.supercritical.push_back(i + 1);
  }
  if (!out.supercritical.empty())
    out.kind = MTClass::Kind::supercritical;
  else if (!out.critical.empty())
    out.kind = MTClass::Kind::critical;
  return out;
}

std::string to_string(MTClass::Kind k) {
  switch (k) {
    case MTClass::Kind::subcritical: return "subcritical";
    case MTClass::Kind::critical: return "critical";
    case MTClass::Kind::supercritical: return "supercritical";
  }
  return "subcritical";
}

namespace {

std::vector<double> laplacian_of_log(std::span<const double> h, const TorusGrid& grid) {
  std::vector<double> lh(h.size());
  for (std::size_t q = 0; q < h.size(); ++q) {
    if (!(h[q] > 0.0)) throw InvalidArgument("weight must be positive");
    lh[q] = std::log(h[q]);
  }
  return laplacian(lh, grid);
}

double curvature_at(const std::optional<std::span<const double>>& k, std::size_t q) {
  return k ? (*k)[q] : 0.0;
}

}  // namespace

ConditionResult curvature_condition(std::span<const double> h1, double rho2, const TorusGrid& grid,
                             std::optional<std::span<const double>> curvature) {
  if (h1.size() != grid.size()) throw InvalidArgument("weight size does not match grid");
  const auto dl = laplacian_of_log(h1, grid);
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < dl.size(); ++q)
    lo = std::min(lo, dl[q] + (8.0 * kPi - rho2) - 2.0 * curvature_at(curvature, q));
  return {lo > 0.0, lo};
}

ConditionResult curvature_condition_both(const WeightData& h, const TorusGrid& grid,
                              std::optional<std::span<const double>> curvature) {
  if (h.rank() != 2) throw InvalidArgument("the two-weight condition needs exactly two weights");
  const auto d1 = laplacian_of_log(h.h[0], grid);
  const auto d2 = laplacian_of_log(h.h[1], grid);
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < d1.size(); ++q)
    lo = std::min(lo, std::min(d1[q], d2[q]) + 4.0 * kPi - 2.0 * curvature_at(curvature, q));
  return {lo > 0.0, lo};
}

}  // namespace toda
