#pragma once

// Cartan algebra, the mean-field functional J_rho, its gradient and the
// Euler-Lagrange residual, plus the criticality and weight conditions.
//
// On a TorusGrid the closed-surface problem is used:
//   J(u) = 1/2 Σ a^{ij} ∫ ∇u_i·∇u_j + Σ ρ_j ⨍ u_j − Σ ρ_j log ∫ h_j e^{u_j}
//   −Δu_i = Σ_j ρ_j a_ij (h_j e^{u_j} / ∫ h_j e^{u_j} − 1/|Σ|)
// On a PolarGrid the Dirichlet problem (u = 0 on the boundary circles) drops
// the linear term and the constant:
//   −Δu_i = Σ_j ρ_j a_ij h_j e^{u_j} / ∫ h_j e^{u_j}.
//
// Exponentials are always evaluated as e^{u − max u} so that sharply peaked
// fields (max u beyond 700) stay finite.

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "toda/geometry.hpp"

namespace toda {

struct CartanData {
  int n = 0;
  Eigen::MatrixXd a;
  Eigen::MatrixXd a_inv;
};

/// SU(N+1) Cartan matrix and its inverse, 1 <= N <= 8.
CartanData cartan(int rank);

/// Positive masses ρ_i, one per component.
class RhoPoint {
 public:
  RhoPoint() = default;
  explicit RhoPoint(std::vector<double> values);
  int rank() const noexcept { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

/// Analytic weight h(x, y) > 0 with its gradient, usable off the grid.
struct WeightFunction {
  std::function<double(double, double)> value;
  std::function<std::array<double, 2>(double, double)> gradient;

  static WeightFunction constant(double c = 1.0);
};

/// Named analytic weights: "const" (h ≡ value) and
/// "cos-bump" h = exp(amplitude · cos(2π·mode·x / length)).
struct WeightPreset {
  enum class Kind { constant, cos_bump };
  Kind kind = Kind::constant;
  double value = 1.0;
  double amplitude = 0.0;
  int mode = 1;
  double length = 1.0;

  WeightFunction function() const;
  /// Exact Δ log h at (x, y).
  double laplacian_log(double x, double y) const;
};

/// Parses "const", "const:2.5", "cos-bump:A" or "cos-bump:A:mode".
WeightPreset parse_weight_preset(const std::string& spec, double length = 1.0);

/// Positive weights h_i sampled on a grid.
struct WeightData {
  std::vector<std::vector<double>> h;

  int rank() const noexcept { return static_cast<int>(h.size()); }
  static WeightData constant(int rank, std::size_t nodes, double value = 1.0);
  static WeightData from_field(const Field& f);
  static WeightData sample(const std::vector<WeightPreset>& presets, const TorusGrid& grid);
  static WeightData sample(const std::vector<WeightFunction>& fns, const TorusGrid& grid);
  static WeightData sample(const std::vector<WeightFunction>& fns, const PolarGrid& grid);
};

/// h e^{u} / ∫ h e^{u}, computed with the max-shift. Optionally returns
/// log ∫ h e^{u}.
std::vector<double> normalized_exponential(std::span<const double> u, std::span<const double> h,
                                           const Grid& grid, double* log_integral = nullptr);

double functional_value(const Field& u, const RhoPoint& rho, const WeightData& h, const TorusGrid& grid);
double functional_value(const Field& u, const RhoPoint& rho, const WeightData& h, const PolarGrid& grid);

/// L²(grid-measure) gradient of J; component k is
/// Σ_j a^{kj}(−Δu_j) + ρ_k/|Σ| − ρ_k h_k e^{u_k}/∫ h_k e^{u_k}.
Field functional_gradient(const Field& u, const RhoPoint& rho, const WeightData& h, const TorusGrid& grid);
Field functional_gradient(const Field& u, const RhoPoint& rho, const WeightData& h, const PolarGrid& grid);

/// Euler-Lagrange residual; equals a·gradient pointwise. On a PolarGrid the
/// boundary entries hold the boundary mismatch u_i.
Field residual(const Field& u, const RhoPoint& rho, const WeightData& h, const TorusGrid& grid);
Field residual(const Field& u, const RhoPoint& rho, const WeightData& h, const PolarGrid& grid);

double sup_norm(const Field& f);

struct MTClass {
  enum class Kind { subcritical, critical, supercritical };
  Kind kind = Kind::subcritical;
  std::vector<int> critical;       // 1-based component indices with ρ_i = 4π
  std::vector<int> supercritical;  // 1-based component indices with ρ_i > 4π
};

/// Moser-Trudinger classification of ρ against the 4π threshold.
MTClass mt_classify(const RhoPoint& rho, double rel_tol = 1e-12);
std::string to_string(MTClass::Kind k);

struct ConditionResult {
  bool holds = false;
  double min_value = 0.0;
};

/// min over nodes of Δ log h_1 + (8π − ρ_2) − 2K (K defaults to 0).
ConditionResult curvature_condition(std::span<const double> h1, double rho2, const TorusGrid& grid,
                             std::optional<std::span<const double>> curvature = std::nullopt);

/// min over nodes of min(Δ log h_1, Δ log h_2) + 4π − 2K.
ConditionResult curvature_condition_both(const WeightData& h, const TorusGrid& grid,
                              std::optional<std::span<const double>> curvature = std::nullopt);

}  // namespace toda
