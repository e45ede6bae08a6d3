#pragma once

// Structured grids, quadrature and Laplacians shared by every other module.
//
// Two grid families are supported:
//  * TorusGrid: n x n periodic nodes, spectral (FFT) differentiation;
//  * PolarGrid: disk or annulus in (r, theta), conservative 5-point finite
//    differences, sparse direct Dirichlet solves.
//
// A Field is N scalar arrays on one grid. Fields never own their grid; every
// operation takes the grid explicitly. Node ordering is row-major with the
// first grid index outermost: torus index = i*n + j, polar index = k*n_t + m.

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace toda {

enum class Gauge { zero_mean, dirichlet, none };

std::string to_string(Gauge g);
Gauge gauge_from_string(const std::string& s);

class TorusGrid {
 public:
  /// n must be a power of two and at least 8. If `unit_measure` is set the
  /// quadrature weights are rescaled so that the total measure is 1
  /// regardless of the side length.
  TorusGrid(int n, double length, bool unit_measure = false);

  int n() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  bool unit_measure() const noexcept { return unit_measure_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_; }
  double spacing() const noexcept { return length_ / n_; }
  double weight() const noexcept { return weight_; }
  double area() const noexcept { return weight_ * static_cast<double>(size()); }

  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * n_ + static_cast<std::size_t>(j);
  }
  double x(int i) const noexcept { return i * spacing(); }
  double y(int j) const noexcept { return j * spacing(); }

  /// Minimal-image displacement from a to b along one axis.
  double wrap(double d) const noexcept;

  bool operator==(const TorusGrid& o) const noexcept {
    return n_ == o.n_ && length_ == o.length_ && unit_measure_ == o.unit_measure_;
  }

 private:
  int n_;
  double length_;
  bool unit_measure_;
  double weight_;
};

TorusGrid make_torus_grid(int n, double length);

enum class RadialSpacing { uniform, geometric };

/// Boundary tag for one circle of a PolarGrid.
struct CircleCondition {
  bool dirichlet = true;
  double value = 0.0;
};

class PolarGrid {
 public:
  /// Radial nodes r_0 = r_in < ... < r_{n_r} = r_out (n_r + 1 rings), angular
  /// nodes theta_m = 2 pi m / n_t. With r_in = 0 the k = 0 ring is the axis:
  /// its n_t entries are kept equal. Geometric spacing requires r_in > 0.
  PolarGrid(double r_in, double r_out, int n_r, int n_t,
            RadialSpacing spacing = RadialSpacing::uniform,
            CircleCondition inner = {}, CircleCondition outer = {});

  double r_in() const noexcept { return r_in_; }
  double r_out() const noexcept { return r_out_; }
  int n_r() const noexcept { return n_r_; }
  int n_t() const noexcept { return n_t_; }
  int rings() const noexcept { return n_r_ + 1; }
  RadialSpacing spacing() const noexcept { return spacing_; }
  const CircleCondition& inner() const noexcept { return inner_; }
  const CircleCondition& outer() const noexcept { return outer_; }
  bool has_axis() const noexcept { return r_in_ == 0.0; }

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(rings()) * static_cast<std::size_t>(n_t_);
  }
  std::size_t index(int k, int m) const noexcept {
    return static_cast<std::size_t>(k) * n_t_ + static_cast<std::size_t>(m);
  }
  double r(int k) const noexcept { return radii_[k]; }
  const std::vector<double>& radii() const noexcept { return radii_; }
  double theta(int m) const noexcept;
  double dtheta() const noexcept;
  /// Quadrature weight of node (k, m): area of its annular cell sector.
  double weight(int k) const noexcept { return weights_[k]; }
  std::array<double, 2> cartesian(int k, int m) const noexcept;

  bool operator==(const PolarGrid& o) const noexcept;

 private:
  double r_in_, r_out_;
  int n_r_, n_t_;
  RadialSpacing spacing_;
  CircleCondition inner_, outer_;
  std::vector<double> radii_;
  std::vector<double> weights_;
};

using Grid = std::variant<TorusGrid, PolarGrid>;

std::size_t grid_size(const Grid& g);

/// N scalar arrays sampled on one grid.
struct Field {
  std::vector<std::vector<double>> components;
  Gauge gauge = Gauge::none;

  Field() = default;
  Field(int rank, std::size_t nodes, Gauge g = Gauge::none)
      : components(static_cast<std::size_t>(rank), std::vector<double>(nodes, 0.0)), gauge(g) {}

  int rank() const noexcept { return static_cast<int>(components.size()); }
  std::size_t size() const noexcept { return components.empty() ? 0 : components.front().size(); }
  std::vector<double>& operator[](int i) { return components[static_cast<std::size_t>(i)]; }
  const std::vector<double>& operator[](int i) const { return components[static_cast<std::size_t>(i)]; }
};

// ---- quadrature --------------------------------------------------------

double integrate(std::span<const double> f, const TorusGrid& grid);
double integrate(std::span<const double> f, const PolarGrid& grid);
double integrate(std::span<const double> f, const Grid& grid);

/// Mean value with respect to the grid measure.
double mean(std::span<const double> f, const TorusGrid& grid);

/// Subtract the mean of every component and mark the field zero-mean.
void project_zero_mean(Field& u, const TorusGrid& grid);

// ---- differential operators -------------------------------------------

/// Spectral Laplacian on the torus (exact on resolved Fourier modes).
std::vector<double> laplacian(std::span<const double> f, const TorusGrid& grid);

/// Second-order finite-difference Laplacian on the polar grid. Interior
/// nodes use the conservative 5-point stencil, the axis uses the ring-average
/// stencil and boundary circles use one-sided radial differences.
std::vector<double> laplacian(std::span<const double> f, const PolarGrid& grid);

/// Zero-mean u with -Δu = rhs - mean(rhs). Raises GaugeViolation if
/// |∫rhs| exceeds tol_mean * max(1, ‖rhs‖∞).
std::vector<double> inverse_laplacian_zero_mean(std::span<const double> rhs, const TorusGrid& grid,
                                                double tol_mean = 1e-10);

/// Fourier multiplier: result = F⁻¹[symbol(|k|²) F f], k in physical units.
std::vector<double> apply_symbol(std::span<const double> f, const TorusGrid& grid,
                                 const std::function<double(double)>& symbol);

/// Spectral gradient (∂x f, ∂y f); the Nyquist mode is dropped.
std::array<std::vector<double>, 2> gradient(std::span<const double> f, const TorusGrid& grid);

/// Trigonometric interpolant of a torus field, evaluable off the grid
/// together with its gradient. The Nyquist modes are dropped.
class TorusInterpolant {
 public:
  TorusInterpolant(std::span<const double> f, const TorusGrid& grid);

  struct Sample {
    double value;
    double dx;
    double dy;
  };
  Sample operator()(double x, double y) const;

 private:
  int n_;
  double length_;
  std::vector<std::complex<double>> coeff_;  // n x (n/2 + 1), scaled by 1/n²
};

/// Values on the inner and outer circles (n_t entries each). The inner trace
/// is ignored on a disk.
struct DirichletData {
  std::vector<double> inner;
  std::vector<double> outer;

  static DirichletData constant(const PolarGrid& grid, double inner, double outer);
  static DirichletData homogeneous(const PolarGrid& grid) { return constant(grid, 0.0, 0.0); }
};

/// Factorized (shift·I - Δ) with Dirichlet rows on every boundary circle.
/// Reuse one instance for repeated solves on the same grid.
class DirichletOperator {
 public:
  explicit DirichletOperator(const PolarGrid& grid, double shift = 0.0);
  ~DirichletOperator();
  DirichletOperator(DirichletOperator&&) noexcept;
  DirichletOperator& operator=(DirichletOperator&&) noexcept;

  /// Solves (shift - Δ)u = rhs in the interior, u = data on the boundary.
  std::vector<double> solve(std::span<const double> rhs, const DirichletData& data) const;
  const PolarGrid& grid() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// -Δu = rhs, u = boundary values on each circle.
std::vector<double> dirichlet_solve(std::span<const double> rhs, const PolarGrid& grid,
                                    const DirichletData& boundary);

/// True for nodes on a boundary circle (not the axis).
bool is_boundary_node(const PolarGrid& grid, std::size_t idx);

}  // namespace toda
