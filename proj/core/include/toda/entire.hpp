#pragma once

// Radial entire solutions in s = log r:
//   u_i''(s) = −Σ_j a_ij e^{(2+μ_j)s + u_j(s)},
// which is −Δu_i = Σ_j a_ij |x|^{μ_j} e^{u_j} for radial u. Masses are
// m_i = (1/2π)∫|x|^{μ_i} e^{u_i} = ∫ e^{(2+μ_i)s + u_i} ds and the tail slopes
// satisfy γ_i = Σ_j a_ij m_j, u_i ≈ −γ_i s + a_i for large s.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "toda/errors.hpp"

namespace toda {

struct RadialProfile {
  Eigen::MatrixXd a;                     // coupling matrix (Cartan matrix, or [2] for Liouville)
  std::vector<double> mu;                // singular weights, μ_i > −2
  std::vector<double> s;                 // uniform grid
  std::vector<std::vector<double>> u;    // u[i][k]
  std::vector<std::vector<double>> du;   // u_i'(s_k)
  std::vector<std::vector<double>> mass; // cumulative ∫_{−∞}^{s_k} e^{(2+μ_i)s+u_i} ds

  int rank() const noexcept { return static_cast<int>(mu.size()); }
  std::size_t nodes() const noexcept { return s.size(); }
  double ds() const { return s.size() > 1 ? s[1] - s[0] : 0.0; }

  /// Cubic Hermite interpolation of u_i and u_i' at s (clamped to the grid).
  void eval(double s, std::vector<double>& u_out, std::vector<double>& du_out) const;
};

/// −Δu = 2e^u: u = λ − 2 log(1 + e^λ r²/4), sampled on a uniform s-grid.
RadialProfile liouville_bubble(double lambda, double s0 = -12.0, double s1 = 24.0, double ds = 1e-3);

/// SU(3) profile with u_1 = u_2 = λ − 2 log(1 + e^λ r²/8).
RadialProfile symmetric_toda_bubble(double lambda, double s0 = -12.0, double s1 = 24.0, double ds = 1e-3);

struct RadialOptions {
  double s0 = -12.0;
  double s1 = 24.0;
  double ds = 1e-3;
  bool adaptive = true;     // step-doubling substeps inside each output interval
  double step_tol = 1e-13;  // per-step error target when adaptive
  int max_halvings = 12;
};

/// Initial data. `c` are the origin values; without `slope` the regular
/// (series-corrected) data at s0 are used, otherwise (u(s0), u'(s0)) = (c, slope).
struct RadialInit {
  std::vector<double> c;
  std::optional<std::vector<double>> slope;
};

/// Integrates the radial system. Coupling defaults to the Cartan matrix.
RadialProfile radial_toda_solve(const std::vector<double>& mu, const RadialInit& init,
                                const RadialOptions& opts = {},
                                const std::optional<Eigen::MatrixXd>& coupling = std::nullopt);

/// Adjusts the s0 slopes by Newton iteration so that the fitted tail slopes
/// equal `target_gamma`.
RadialProfile radial_toda_shoot(const std::vector<double>& mu, const std::vector<double>& c,
                                const std::vector<double>& target_gamma, const RadialOptions& opts = {},
                                double tol = 1e-9, int max_iters = 30);

struct GammaFit {
  std::vector<double> gamma;   // tail slopes
  std::vector<double> a;       // tail intercepts
  std::vector<double> gamma0;  // origin slopes, u_i ≈ −γ_i⁰ s near s0 (u itself, without μ log r)
  std::vector<double> mass;    // tail-corrected m_i
  std::vector<double> slope_drift;  // |u'(s1) − u'(s1 − log 10)|
};

/// Least-squares tail fit on the last 25% of the s-range. Raises
/// FitUnstable if u' drifts by more than `drift_tol` over the last decade.
GammaFit gamma_exponents(const RadialProfile& p, double drift_tol = 1e-6);

struct QuantizationCheck {
  std::vector<double> residual;  // γ_i − 2(2+μ_i)
  bool outside_hypothesis = false;  // some μ_i > 0
};

QuantizationCheck check_quantization(const std::vector<double>& gamma, const std::vector<double>& mu);

/// Σ a^{ij} γ_i (γ_j − 2(2+μ_j)).
double global_pohozaev_residual(const std::vector<double>& gamma, const std::vector<double>& mu);

struct LocalExponentReport {
  std::vector<double> origin_exponent;  // γ_i⁰ of ũ_i = u_i + μ_i log r
  std::vector<double> origin_margin;    // 2 − γ_i⁰
  std::vector<double> tail_margin;      // γ_i − μ_i − 2
  bool origin_pass = false;
  bool tail_pass = false;
};

LocalExponentReport local_exponent_check(const RadialProfile& p);

struct SingularLiouvilleResult {
  double gamma = 0.0;         // (1/2π)∫|x|^{2α+2} e^u, without the factor 2
  double gamma_factor2 = 0.0; // (1/2π)∫2|x|^{2α+2} e^u, equal to the tail slope
  double margin = 0.0;        // gamma − (2 + α)
  RadialProfile profile;
};

/// Radial −Δu = 2|x|^{2α+2} e^u, regular at 0 with u(0) = c.
SingularLiouvilleResult singular_liouville_gamma(double alpha, double c = 0.0, const RadialOptions& opts = {});

struct BarrierResult {
  double residual_plus = 0.0;
  double residual_minus = 0.0;
  double max_residual = 0.0;
  double h = 0.0;
};

/// Finite-difference Δw_± for w_± = −4 log r ± (c1 − c1 r^{−1/2}) on a
/// uniform radial grid, compared with ∓¼ c1 r^{−5/2}.
BarrierResult barrier_check(double c1, double r_lo, double r_hi, int n);

/// v_i(s) = u_i(−s) − 2(2+μ_i)s, on the reflected grid.
RadialProfile kelvin_transform(const RadialProfile& p);

/// Max |u_i'' + Σ a_ij e^{(2+μ_j)s+u_j}| using centred differences of u'.
double radial_residual(const RadialProfile& p);

}  // namespace toda
