#include "toda/geometry.hpp"

#include <fftw3.h>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "toda/errors.hpp"

namespace toda {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW plans are created once per size under a lock and executed through the
// new-array interface, which is thread-safe.
struct TorusPlans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

const TorusPlans& plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, TorusPlans> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const std::size_t nc = static_cast<std::size_t>(n) * (n / 2 + 1);
  double* real = fftw_alloc_real(static_cast<std::size_t>(n) * n);
  fftw_complex* spec = fftw_alloc_complex(nc);
  TorusPlans p;
  p.forward = fftw_plan_dft_r2c_2d(n, n, real, spec, FFTW_ESTIMATE);
  p.backward = fftw_plan_dft_c2r_2d(n, n, spec, real, FFTW_ESTIMATE);
  fftw_free(real);
  fftw_free(spec);
  return cache.emplace(n, p).first->second;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

class Spectrum {
 public:
  Spectrum(std::span<const double> f, const TorusGrid& grid)
      : n_(grid.n()),
        length_(grid.length()),
        real_(fftw_alloc_real(grid.size())),
        spec_(fftw_alloc_complex(static_cast<std::size_t>(n_) * (n_ / 2 + 1))) {
    if (f.size() != grid.size()) throw InvalidArgument("field size does not match torus grid");
    std::copy(f.begin(), f.end(), real_.get());
    fftw_execute_dft_r2c(plans_for(n_).forward, real_.get(), spec_.get());
  }

  int n() const { return n_; }
  int half() const { return n_ / 2 + 1; }
  double wavenumber(int idx) const {
    const int k = idx <= n_ / 2 ? idx : idx - n_;
    return 2.0 * kPi * k / length_;
  }
  std::complex<double>& at(int i, int j) {
    return reinterpret_cast<std::complex<double>&>(spec_.get()[static_cast<std::size_t>(i) * half() + j]);
  }

  std::vector<double> inverse() {
    fftw_execute_dft_c2r(plans_for(n_).backward, spec_.get(), real_.get());
    const double scale = 1.0 / (static_cast<double>(n_) * n_);
    std::vector<double> out(static_cast<std::size_t>(n_) * n_);
    for (std::size_t q = 0; q < out.size(); ++q) out[q] = real_.get()[q] * scale;
    return out;
  }

 private:
  int n_;
  double length_;
  std::unique_ptr<double, FftwDeleter> real_;
  std::unique_ptr<fftw_complex, FftwDeleter> spec_;
};

void require_finite(std::span<const double> f, const char* what) {
  for (double v : f)
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value in ") + what);
}

// Finite-difference weights (Fornberg) for derivatives 0..2 at x0 from nodes.
std::array<std::vector<double>, 3> fornberg(double x0, std::span<const double> nodes) {
  const std::size_t n = nodes.size();
  constexpr int m = 2;
  // c[node][order]
  std::vector<std::array<double, m + 1>> c(n, std::array<double, m + 1>{});
  c[0][0] = 1.0;
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = static_cast<int>(std::min<std::size_t>(i, m));
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::array<std::vector<double>, 3> w;
  for (int k = 0; k <= m; ++k) {
    w[k].resize(n);
    for (std::size_t j = 0; j < n; ++j) w[k][j] = c[j][k];
  }
  return w;
}

struct StencilEntry {
  std::size_t index;
  double coeff;
};

// Face radius between rings k and k+1.
double face(const PolarGrid& g, int k) { return 0.5 * (g.r(k) + g.r(k + 1)); }

// Conservative stencil of Δ at a non-boundary node (finite-volume form with
// the grid's cell areas as weights). With zero-flux circles the boundary
// ring cell is closed on its outer side.
std::vector<StencilEntry> fv_stencil(const PolarGrid& g, int k, int m) {
  std::vector<StencilEntry> st;
  const int nt = g.n_t();
  const double dth = g.dtheta();
  if (g.has_axis() && k == 0) {
    const double rho = face(g, 0);
    const double h = g.r(1) - g.r(0);
    const double area = kPi * rho * rho;
    double diag = 0.0;
    for (int q = 0; q < nt; ++q) {
      const double c = rho * dth / h / area;
      st.push_back({g.index(1, q), c});
      diag -= c;
    }
    st.push_back({g.index(0, m), diag});
    return st;
  }
  const double area = g.weight(k);
  const double lo = (k == 0) ? g.r(0) : face(g, k - 1);
  const double hi = (k == g.n_r()) ? g.r(k) : face(g, k);
  double diag = 0.0;
  if (k < g.n_r()) {
    const double c = face(g, k) * dth / (g.r(k + 1) - g.r(k)) / area;
    st.push_back({g.index(k + 1, m), c});
    diag -= c;
  }
  if (k > 0) {
    const double c = face(g, k - 1) * dth / (g.r(k) - g.r(k - 1)) / area;
    st.push_back({g.index(k - 1, m), c});
    diag -= c;
  }
  const double ca = (hi - lo) / (g.r(k) * dth) / area;
  st.push_back({g.index(k, (m + 1) % nt), ca});
  st.push_back({g.index(k, (m + nt - 1) % nt), ca});
  diag -= 2.0 * ca;
  st.push_back({g.index(k, m), diag});
  return st;
}

}  // namespace

std::string to_string(Gauge g) {
  switch (g) {
    case Gauge::zero_mean: return "zero-mean";
    case Gauge::dirichlet: return "dirichlet";
    case Gauge::none: return "none";
  }
  return "none";
}

Gauge gauge_from_string(const std::string& s) {
  if (s == "zero-mean") return Gauge::zero_mean;
  if (s == "dirichlet") return Gauge::dirichlet;
  if (s == "none") return Gauge::none;
  throw ValidationError("unknown gauge '" + s + "'");
}

// ---- TorusGrid -----------------------------------------------------------

TorusGrid::TorusGrid(int n, double length, bool unit_measure)
    : n_(n), length_(length), unit_measure_(unit_measure) {
  if (n < 8 || !std::has_single_bit(static_cast<unsigned>(n)))
    throw InvalidArgument("torus grid size must be a power of two >= 8, got " + std::to_string(n));
  if (!(length > 0.0) || !std::isfinite(length)) throw InvalidArgument("torus side length must be positive");
  weight_ = unit_measure ? 1.0 / (static_cast<double>(n) * n) : (length / n) * (length / n);
}

double TorusGrid::wrap(double d) const noexcept { return d - length_ * std::round(d / length_); }

TorusGrid make_torus_grid(int n, double length) { return TorusGrid(n, length); }

// ---- PolarGrid -----------------------------------------------------------

PolarGrid::PolarGrid(double r_in, double r_out, int n_r, int n_t, RadialSpacing spacing,
                     CircleCondition inner, CircleCondition outer)
    : r_in_(r_in), r_out_(r_out), n_r_(n_r), n_t_(n_t), spacing_(spacing), inner_(inner), outer_(outer) {
  if (!(r_in >= 0.0) || !(r_out > r_in)) throw InvalidArgument("polar grid needs 0 <= r_in < r_out");
  if (n_r < 3 || n_t < 4) throw InvalidArgument("polar grid needs n_r >= 3 and n_t >= 4");
  if (spacing == RadialSpacing::geometric && r_in <= 0.0)
    throw InvalidArgument("geometric radial spacing requires r_in > 0");
  radii_.resize(static_cast<std::size_t>(n_r) + 1);
  for (int k = 0; k <= n_r; ++k) {
    const double t = static_cast<double>(k) / n_r;
    radii_[k] = spacing == RadialSpacing::uniform ? r_in + t * (r_out - r_in)
                                                  : r_in * std::pow(r_out / r_in, t);
  }
  radii_.front() = r_in;
  radii_.back() = r_out;
  weights_.resize(radii_.size());
  const double dth = dtheta();
  for (int k = 0; k <= n_r; ++k) {
    const double lo = (k == 0) ? radii_[0] : 0.5 * (radii_[k - 1] + radii_[k]);
    const double hi = (k == n_r) ? radii_[k] : 0.5 * (radii_[k] + radii_[k + 1]);
    weights_[k] = 0.5 * (hi * hi - lo * lo) * dth;
  }
}

double PolarGrid::theta(int m) const noexcept { return 2.0 * kPi * m / n_t_; }
double PolarGrid::dtheta() const noexcept { return 2.0 * kPi / n_t_; }

std::array<double, 2> PolarGrid::cartesian(int k, int m) const noexcept {
  const double th = theta(m);
  return {radii_[k] * std::cos(th), radii_[k] * std::sin(th)};
}

bool PolarGrid::operator==(const PolarGrid& o) const noexcept {
  return r_in_ == o.r_in_ && r_out_ == o.r_out_ && n_r_ == o.n_r_ && n_t_ == o.n_t_ &&
         spacing_ == o.spacing_ && inner_.dirichlet == o.inner_.dirichlet &&
         inner_.value == o.inner_.value && outer_.dirichlet == o.outer_.dirichlet &&
         outer_.value == o.outer_.value;
}

std::size_t grid_size(const Grid& g) {
  return std::visit([](const auto& gg) { return gg.size(); }, g);
}

bool is_boundary_node(const PolarGrid& grid, std::size_t idx) {
  const int k = static_cast<int>(idx / static_cast<std::size_t>(grid.n_t()));
  return k == grid.n_r() || (k == 0 && !grid.has_axis());
}

// ---- quadrature ----------------------------------------------------------

double integrate(std::span<const double> f, const TorusGrid& grid) {
  if (f.size() != grid.size()) throw InvalidArgument("field size does not match torus grid");
  require_finite(f, "integrand");
  double s = 0.0;
  for (double v : f) s += v;
  return s * grid.weight();
}

double integrate(std::span<const double> f, const PolarGrid& grid) {
  if (f.size() != grid.size()) throw InvalidArgument("field size does not match polar grid");
  require_finite(f, "integrand");
  double total = 0.0;
  for (int k = 0; k < grid.rings(); ++k) {
    double ring = 0.0;
    for (int m = 0; m < grid.n_t(); ++m) ring += f[grid.index(k, m)];
    total += ring * grid.weight(k);
  }
  return total;
}

double integrate(std::span<const double> f, const Grid& grid) {
  return std::visit([&](const auto& g) { return integrate(f, g); }, grid);
}

double mean(std::span<const double> f, const TorusGrid& grid) { return integrate(f, grid) / grid.area(); }

void project_zero_mean(Field& u, const TorusGrid& grid) {
  for (auto& c : u.components) {
    const double m = mean(c, grid);
    for (double& v : c) v -= m;
  }
  u.gauge = Gauge::zero_mean;
}

// ---- torus operators -------------------------------------------------------

std::vector<double> apply_symbol(std::span<const double> f, const TorusGrid& grid,
                                 const std::function<double(double)>& symbol) {
  Spectrum s(f, grid);
  for (int i = 0; i < s.n(); ++i) {
    const double kx = s.wavenumber(i);
    for (int j = 0; j < s.half(); ++j) {
      const double ky = s.wavenumber(j);
      s.at(i, j) *= symbol(kx * kx + ky * ky);
    }
  }
  return s.inverse();
}

std::vector<double> laplacian(std::span<const double> f, const TorusGrid& grid) {
  return apply_symbol(f, grid, [](double k2) { return -k2; });
}

std::vector<double> inverse_laplacian_zero_mean(std::span<const double> rhs, const TorusGrid& grid,
                                                double tol_mean) {
  const double total = integrate(rhs, grid);
  double sup = 0.0;
  for (double v : rhs) sup = std::max(sup, std::abs(v));
  if (std::abs(total) > tol_mean * std::max(1.0, sup) * grid.area())
    throw GaugeViolation("right-hand side mean " + std::to_string(total) + " exceeds tolerance");
  return apply_symbol(rhs, grid, [](double k2) { return k2 == 0.0 ? 0.0 : 1.0 / k2; });
}

std::array<std::vector<double>, 2> gradient(std::span<const double> f, const TorusGrid& grid) {
  std::array<std::vector<double>, 2> out;
  for (int axis = 0; axis < 2; ++axis) {
    Spectrum s(f, grid);
    const int n = s.n();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < s.half(); ++j) {
        const int idx = axis == 0 ? i : j;
        const double k = (idx == n / 2) ? 0.0 : s.wavenumber(idx);
        s.at(i, j) *= std::complex<double>(0.0, k);
      }
    }
    out[static_cast<std::size_t>(axis)] = s.inverse();
  }
  return out;
}

// ---- polar operators -------------------------------------------------------

std::vector<double> laplacian(std::span<const double> f, const PolarGrid& grid) {
  if (f.size() != grid.size()) throw InvalidArgument("field size does not match polar grid");
  std::vector<double> out(grid.size(), 0.0);
  const int nt = grid.n_t();
  const double dth = grid.dtheta();
  for (int k = 0; k < grid.rings(); ++k) {
    const bool boundary = (k == grid.n_r()) || (k == 0 && !grid.has_axis());
    for (int m = 0; m < nt; ++m) {
      const std::size_t idx = grid.index(k, m);
      if (!boundary) {
        double v = 0.0;
        for (const auto& e : fv_stencil(grid, k, m)) v += e.coeff * f[e.index];
        out[idx] = v;
        continue;
      }
      // One-sided radial derivatives from four rings.
      std::array<double, 4> nodes{};
      std::array<int, 4> ks{};
      for (int q = 0; q < 4; ++q) {
        ks[q] = (k == 0) ? q : k - q;
        nodes[q] = grid.r(ks[q]);
      }
      const auto w = fornberg(grid.r(k), nodes);
      double ur = 0.0, urr = 0.0;
      for (int q = 0; q < 4; ++q) {
        const double v = f[grid.index(ks[q], m)];
        ur += w[1][q] * v;
        urr += w[2][q] * v;
      }
      const double r = grid.r(k);
      const double utt =
          (f[grid.index(k, (m + 1) % nt)] - 2.0 * f[idx] + f[grid.index(k, (m + nt - 1) % nt)]) / (dth * dth);
      out[idx] = urr + ur / r + utt / (r * r);
    }
  }
  return out;
}

TorusInterpolant::TorusInterpolant(std::span<const double> f, const TorusGrid& grid)
    : n_(grid.n()), length_(grid.length()) {
  require_finite(f, "interpolated field");
  Spectrum sp(f, grid);
  const int half = sp.half();
  coeff_.resize(static_cast<std::size_t>(n_) * half);
  const double scale = 1.0 / (static_cast<double>(n_) * n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < half; ++j) {
      const bool nyquist = (i == n_ / 2) || (j == n_ / 2);
      const double w = (j == 0) ? 1.0 : 2.0;
      coeff_[static_cast<std::size_t>(i) * half + j] = nyquist ? 0.0 : w * scale * sp.at(i, j);
    }
}

TorusInterpolant::Sample TorusInterpolant::operator()(double x, double y) const {
  const int half = n_ / 2 + 1;
  const double k0 = 2.0 * kPi / length_;
  const std::complex<double> iu(0.0, 1.0);
  std::vector<std::complex<double>> ey(static_cast<std::size_t>(half));
  for (int j = 0; j < half; ++j) ey[j] = std::polar(1.0, k0 * j * y);
  std::complex<double> val = 0.0, gx = 0.0, gy = 0.0;
  for (int i = 0; i < n_; ++i) {
    const int ki = i <= n_ / 2 ? i : i - n_;
    std::complex<double> a = 0.0, b = 0.0;
    const std::complex<double>* row = &coeff_[static_cast<std::size_t>(i) * half];
    for (int j = 0; j < half; ++j) {
      const std::complex<double> t = row[j] * ey[j];
      a += t;
      b += (k0 * j) * t;
    }
    const std::complex<double> ex = std::polar(1.0, k0 * ki * x);
    val += ex * a;
    gx += (iu * (k0 * ki)) * ex * a;
    gy += iu * ex * b;
  }
  return {val.real(), gx.real(), gy.real()};
}

DirichletData DirichletData::constant(const PolarGrid& grid, double inner, double outer) {
  DirichletData d;
  d.inner.assign(static_cast<std::size_t>(grid.n_t()), inner);
  d.outer.assign(static_cast<std::size_t>(grid.n_t()), outer);
  return d;
}

struct DirichletOperator::Impl {
  Impl(const PolarGrid& g, double s) : grid(g), shift(s) {}
  PolarGrid grid;
  double shift;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

DirichletOperator::DirichletOperator(const PolarGrid& grid, double shift)
    : impl_(std::make_unique<Impl>(grid, shift)) {
  using Triplet = Eigen::Triplet<double>;
  const int nt = grid.n_t();
  const auto n = static_cast<Eigen::Index>(grid.size());
  std::vector<Triplet> trips;
  trips.reserve(grid.size() * 6);
  for (int k = 0; k < grid.rings(); ++k) {
    for (int m = 0; m < nt; ++m) {
      const auto row = static_cast<int>(grid.index(k, m));
      const bool inner_ring = (k == 0 && !grid.has_axis());
      const bool outer_ring = (k == grid.n_r());
      if ((inner_ring && grid.inner().dirichlet) || (outer_ring && grid.outer().dirichlet)) {
        trips.emplace_back(row, row, 1.0);
        continue;
      }
      if (grid.has_axis() && k == 0 && m > 0) {
        trips.emplace_back(row, row, 1.0);
        trips.emplace_back(row, static_cast<int>(grid.index(0, 0)), -1.0);
        continue;
      }
      for (const auto& e : fv_stencil(grid, k, m)) trips.emplace_back(row, static_cast<int>(e.index), -e.coeff);
      trips.emplace_back(row, row, shift);
    }
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  impl_->lu.analyzePattern(a);
  impl_->lu.factorize(a);
  if (impl_->lu.info() != Eigen::Success) throw SolverFailure("polar Dirichlet operator is singular");
}

DirichletOperator::~DirichletOperator() = default;
DirichletOperator::DirichletOperator(DirichletOperator&&) noexcept = default;
DirichletOperator& DirichletOperator::operator=(DirichletOperator&&) noexcept = default;

const PolarGrid& DirichletOperator::grid() const noexcept { return impl_->grid; }

std::vector<double> DirichletOperator::solve(std::span<const double> rhs, const DirichletData& data) const {
  const PolarGrid& grid = impl_->grid;
  if (rhs.size() != grid.size()) throw InvalidArgument("rhs size does not match polar grid");
  const int nt = grid.n_t();
  if (data.outer.size() != static_cast<std::size_t>(nt) ||
      (!grid.has_axis() && data.inner.size() != static_cast<std::size_t>(nt)))
    throw InvalidArgument("boundary data must have n_t entries per circle");
  for (double v : data.outer)
    if (!std::isfinite(v)) throw InvalidArgument("non-finite boundary value");
  for (double v : data.inner)
    if (!std::isfinite(v)) throw InvalidArgument("non-finite boundary value");
  Eigen::VectorXd b(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t q = 0; q < grid.size(); ++q) b[static_cast<Eigen::Index>(q)] = rhs[q];
  for (int m = 0; m < nt; ++m) {
    if (grid.outer().dirichlet) b[static_cast<Eigen::Index>(grid.index(grid.n_r(), m))] = data.outer[m];
    if (!grid.has_axis() && grid.inner().dirichlet) b[static_cast<Eigen::Index>(grid.index(0, m))] = data.inner[m];
    if (grid.has_axis() && m > 0) b[static_cast<Eigen::Index>(grid.index(0, m))] = 0.0;
  }
  Eigen::VectorXd x = impl_->lu.solve(b);
  if (impl_->lu.info() != Eigen::Success) throw SolverFailure("polar Dirichlet solve failed");
  std::vector<double> out(grid.size());
  for (std::size_t q = 0; q < out.size(); ++q) {
    out[q] = x[static_cast<Eigen::Index>(q)];
    if (!std::isfinite(out[q])) throw SolverFailure("polar Dirichlet solve produced non-finite values");
  }
  if (grid.has_axis())
    for (int m = 1; m < nt; ++m) out[grid.index(0, m)] = out[grid.index(0, 0)];
  return out;
}

std::vector<double> dirichlet_solve(std::span<const double> rhs, const PolarGrid& grid,
                                    const DirichletData& boundary) {
  return DirichletOperator(grid).solve(rhs, boundary);
}

}  // namespace toda
