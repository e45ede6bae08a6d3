#pragma once

// Solvers for the mean-field system: semi-implicit gradient flow on J_rho,
// matrix-free Newton-Krylov refinement, rho-continuation, the Dirichlet
// annulus problem and a bubble-family minimax estimator.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "toda/errors.hpp"
#include "toda/geometry.hpp"
#include "toda/meanfield.hpp"

namespace toda {

struct SolveOptions {
  double dt0 = 1.0;
  double dt_max = 1e4;
  double tol_res = 1e-9;
  int max_iters = 5000;
  double newton_switch_res = 1e-3;
  double shrink = 0.5;
  double grow = 2.0;
  double armijo = 1e-4;
  bool newton = true;       // polish with Newton once below newton_switch_res
  int max_newton = 25;
  int gmres_restart = 60;
  int gmres_max_iters = 600;

  void validate() const;
};

struct SolveResult {
  Field u;
  double residual_norm = 0.0;
  double J_value = 0.0;
  int iterations = 0;
  int flow_iterations = 0;
  int newton_iterations = 0;
  bool converged = false;
  std::vector<double> J_history;         // accepted flow steps, starting at u0
  std::vector<double> residual_history;  // one entry per outer iteration
};

/// Flow step underflow; carries the best iterate seen.
class Stagnation : public Error {
 public:
  Stagnation(const std::string& what, SolveResult best)
      : Error("stagnation", what), best_(std::move(best)) {}
  const SolveResult& best() const noexcept { return best_; }

 private:
  SolveResult best_;
};

/// Gradient flow on J, then (optionally) Newton polish. Torus fields are
/// kept zero-mean; polar fields keep u = 0 on the boundary circles.
SolveResult gradient_flow(const Field& u0, const RhoPoint& rho, const WeightData& h, const Grid& grid,
                          const SolveOptions& opts = {});

/// Damped Newton on residual(u) = 0 with GMRES on the linearization,
/// preconditioned by (−Δ + I)⁻¹.
SolveResult newton_refine(const Field& u, const RhoPoint& rho, const WeightData& h, const Grid& grid,
                          const SolveOptions& opts = {});

/// Dirichlet problem on an annulus (both circles Dirichlet, value 0).
SolveResult dirichlet_solve_system(const RhoPoint& rho, const WeightData& h, const PolarGrid& grid,
                                   const SolveOptions& opts = {},
                                   const std::optional<Field>& u0 = std::nullopt);

struct ContinuationOptions {
  SolveOptions solve;
  double blowup_threshold = 12.0;
  double mass_radius = 0.1;  // local mass radius, as a fraction of the torus side
};

struct BranchPoint {
  RhoPoint rho;
  Field u;
  std::vector<double> max_u;
  std::vector<double> peak_mass;  // ρ_i ∫_{B_r(peak)} h_i e^{u_i} / ∫ h_i e^{u_i}
  double residual_norm = 0.0;
  double J_value = 0.0;
  bool converged = false;
  bool blowup_suspected = false;
  MTClass classification;
  std::string note;
};

/// Warm-started solves along rho_path on the torus.
std::vector<BranchPoint> continuation(const std::vector<RhoPoint>& rho_path, const WeightData& h,
                                      const TorusGrid& grid, const ContinuationOptions& opts = {},
                                      const std::optional<Field>& u0 = std::nullopt);

/// e^v-weighted centroid. On the torus the circular mean is used per axis.
std::array<double, 2> center_of_mass(std::span<const double> v, const Grid& grid);

// ---- minimax ---------------------------------------------------------------

/// Two-bubble path on an annulus. At parameter t ∈ [−1, 1] both bubbles sit
/// at radius r(t) (inner → outer as t increases, `margin` of the width away
/// from the circles), bubble 1 at angle 0 and bubble 2 at angle π, with
/// height λ(t) = λ_c + λ_e |t|. Components are
///   γ_1 = a(P U_1 − ½ P U_2),  γ_2 = a(P U_2 − ½ P U_1)
/// where P removes the harmonic extension of the boundary trace and a is
/// `amplitude` (a = 0 gives the degenerate constant path).
struct BubbleFamily {
  double lambda_c = 4.0;
  double lambda_e = 6.0;
  double lambda_min = 1.0;
  double lambda_max = 10.0;
  double amplitude = 1.0;
  double margin = 0.1;
  int samples = 41;
  bool optimize = true;
  double search_tol = 0.05;
};

struct MinimaxResult {
  double value = 0.0;  // sup_t J at the best family parameters
  double t_max = 0.0;
  double lambda_c = 0.0;
  double lambda_e = 0.0;
  double J_left = 0.0;   // J at t = −1
  double J_right = 0.0;  // J at t = +1
  double noise = 0.0;    // sup difference between the t-grid and its refinement
  int evaluations = 0;
  std::vector<double> t;
  std::vector<double> J;
};

/// Upper-bound estimate of the minimax level on the annulus.
MinimaxResult minimax_estimate(const RhoPoint& rho, const WeightData& h, const PolarGrid& grid,
                               const BubbleFamily& family = {});

}  // namespace toda
