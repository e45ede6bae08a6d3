#pragma once

// The su(N+1)-valued connection built from a Toda solution and its loop
// holonomy.
//
// With u_i = 2w̃_i − 2w̃_{i−1}, Σ w̃_i = 0 and w_i = w̃_i − i·shift,
//   U = diag((w_i)_z) + superdiagonal f_i e^{w_i − w_{i−1}},   V = −U†,
//   α = −(U dz + V dz̄),
//   α_θ = −ir(U e^{iθ} + U† e^{−iθ}),   α_r = −(U e^{iθ} − U† e^{−iθ}).
// With Δ = 4∂_z∂_z̄ and f ≡ 1, α is flat (dα + α∧α = 0) exactly when
// shift = log 2. Transport around the circle of radius r is
//   dg/dθ + α_θ g = 0,  g(0) = I,
// and the eigenvalues of g(2π) are written e^{−2πiβ}.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "toda/entire.hpp"
#include "toda/geometry.hpp"
#include "toda/meanfield.hpp"

namespace toda {

using CMatrix = Eigen::MatrixXcd;

/// w̃_0 = −(1/(2(N+1))) Σ (N − i + 1) u_i, w̃_i = w̃_{i−1} + u_i / 2.
std::vector<double> u_to_w_tilde(std::span<const double> u);

struct WSample {
  std::vector<double> w;                   // shifted w_0..w_N
  std::vector<std::complex<double>> wz;    // (w_i)_z
};

class WFields {
 public:
  static constexpr double kShift = std::numbers::ln2;

  /// From a radial profile. With `singular` the profile's u_i + μ_i log r is used.
  static WFields from_profile(const RadialProfile& p, bool singular = true, double shift = kShift);
  /// From a torus field; points are x = center + r e^{iθ}.
  static WFields from_torus(const Field& u, const TorusGrid& grid, std::array<double, 2> center,
                            double shift = kShift);

  int rank() const noexcept { return rank_; }
  double shift() const noexcept { return shift_; }
  std::array<double, 2> center() const noexcept { return center_; }
  /// w̃ at the source samples: rank + 1 components.
  const Field& w_tilde() const noexcept { return tilde_; }
  /// The u that was fed in (including μ log r for singular profiles).
  const Field& u() const noexcept { return u_; }

  WSample at(double r, double theta) const { return eval_(r, theta); }

 private:
  int rank_ = 0;
  double shift_ = kShift;
  std::array<double, 2> center_{0.0, 0.0};
  Field tilde_;
  Field u_;
  std::function<WSample(double, double)> eval_;
};

/// Off-diagonal weights f_i = h_i^{1/2}, one analytic weight per component.
using Weights = std::vector<WeightFunction>;

struct ConnectionSample {
  double r = 0.0;
  double theta = 0.0;
  CMatrix U, V;
  CMatrix alpha_theta, alpha_r;
};

ConnectionSample connection_sample(const WFields& w, double r, double theta, const Weights* h = nullptr);

struct HolonomyResult {
  CMatrix g;
  std::vector<std::complex<double>> eigenvalues;
  std::vector<double> phases;  // β in (−½, ½], ascending
  double unitarity_defect = 0.0;  // ‖g†g − I‖_F
  double det_defect = 0.0;        // |det g − 1|
  double identity_defect = 0.0;   // ‖g − I‖_F
  double r = 0.0;
  int steps = 0;
};

/// RK4 transport around the circle of radius r. Raises AccuracyError when
/// a defect exceeds `defect_tol`.
HolonomyResult holonomy_loop(const WFields& w, double r, int n_steps = 4096, const Weights* h = nullptr,
                             double defect_tol = 1e-4);

/// Eigenphases of a unitary matrix with eigenvalues e^{−2πiβ}.
HolonomyResult holonomy_from_matrix(const CMatrix& g);

struct ExpectedPhases {
  std::vector<double> raw;   // β_0..β_N with β_i − β_{i−1} = −μ_i/2, Σβ = 0
  std::vector<double> mod1;  // representatives in (−½, ½]
};

ExpectedPhases expected_phases(const std::vector<double>& mu);

double wrap_phase(double beta);

/// Largest mod-1 distance after the best assignment of `a` to `b`.
double phase_distance(const std::vector<double>& a, const std::vector<double>& b);

/// F_rθ for F = M dz∧dz̄ (dz∧dz̄ = −2ir dr∧dθ), valid when w solves the
/// weighted system (otherwise the diagonal carries its residual). M has superdiagonal
/// (f_i)_z̄ e^{w_i−w_{i−1}} and subdiagonal (f_i)_z e^{w_i−w_{i−1}}.
CMatrix curvature(const WFields& w, const Weights& h, double r, double theta);

/// F_rθ = ∂_r α_θ − ∂_θ α_r + [α_r, α_θ] by centred differences, for cross-checks.
CMatrix curvature_fd(const WFields& w, const Weights* h, double r, double theta, double step = 1e-4);

struct GaugeResult {
  HolonomyResult direct;
  HolonomyResult gauged;
  double phase_difference = 0.0;
  double alpha_r_residual = 0.0;     // max ‖α̃_r‖ along a check ray
  std::vector<double> theta;         // sample angles
  std::vector<CMatrix> alpha_theta;  // α̃_θ at the sample angles
};

struct GaugeOptions {
  double r0 = 1e-4;  // rays start here with φ = I
  int radial_steps = 240;
  int loop_steps = 512;
  double dtheta_fd = 1e-3;
  int check_steps = 4000;
};

/// Radial gauge φ with dφ/dr + α_r φ = 0, α̃_θ = φ⁻¹α_θφ + φ⁻¹∂_θφ, and the
/// holonomy of α̃_θ around the circle of radius r.
GaugeResult gauge_radial(const WFields& w, double r, const Weights* h = nullptr, const GaugeOptions& opts = {});

}  // namespace toda
