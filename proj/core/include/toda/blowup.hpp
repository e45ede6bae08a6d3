#pragma once

// Blow-up diagnostics on computed or planted fields.
//
// Local masses are σ_i(r) = ∫_{B_r(x)} h_i e^{u_i}. For an SU(3) blow-up point
// the Pohozaev relation σ_1² + σ_2² − σ_1σ_2 = 4π(σ_1 + σ_2) together with the
// floor σ_i ≥ 4π leaves five admissible pairs:
//   (4π,0), (0,4π), (4π,8π), (8π,4π), (8π,8π).

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "toda/entire.hpp"
#include "toda/geometry.hpp"
#include "toda/meanfield.hpp"

namespace toda {

struct Peak {
  int component = 0;  // 0-based
  std::size_t node = 0;
  std::array<double, 2> x{0.0, 0.0};
  double height = 0.0;  // λ = u_i(x)
  double eps = 1.0;     // e^{−λ/2}
};

/// Local maxima above `floor`, deduplicated within 3 cells, highest first.
std::vector<Peak> detect_peaks(const Field& u, const Grid& grid, double floor);

struct MassProfile {
  std::array<double, 2> center{0.0, 0.0};
  std::vector<double> radii;
  std::vector<std::vector<double>> sigma;  // sigma[i][j] = σ_i(radii[j])
};

/// Disk sums of h_i e^{u_i} over nodes with |x − center| < r. On the torus
/// distances are minimal-image and r must not exceed L/2.
MassProfile local_mass_profile(const Field& u, const WeightData& h, const Grid& grid, std::array<double, 2> center,
                               std::vector<double> radii);

struct Plateau {
  std::vector<double> sigma;   // per component
  std::vector<double> radius;  // where |dσ/d log r| is smallest
  MassProfile profile;
};

/// σ_i on log-spaced radii from 10ε to min(L/4, half the distance to the
/// nearest other peak), read off at the flattest point.
Plateau plateau_masses(const Field& u, const WeightData& h, const TorusGrid& grid, const Peak& peak,
                       std::span<const Peak> others = {}, int samples = 48);

/// σ_1² + σ_2² − σ_1σ_2 − 4π(σ_1 + σ_2).
double pohozaev_residual(double sigma1, double sigma2);

struct Classification {
  std::array<double, 2> pair{0.0, 0.0};
  double distance = 0.0;
  bool admissible = false;
  bool floor_ok = true;  // σ_i ≥ 4π(1 − tol) for every non-negligible σ_i
  bool tie = false;
};

const std::array<std::array<double, 2>, 5>& admissible_pairs();

/// Nearest admissible pair (ties go to the lexicographically smaller one
/// and are never admissible); admissible iff distance < tol·4π and the floor holds.
Classification classify_blowup(double sigma1, double sigma2, double tol = 0.05);

/// m_1 = (2σ_1 − σ_2)/2π, m_2 = (2σ_2 − σ_1)/2π.
std::array<double, 2> mass_exponents(double sigma1, double sigma2);

/// Square window [−W, W]² in bubble units y = (x − x_k)/ε.
struct Rescaled {
  int n = 0;  // samples per side
  double half_width = 0.0;
  Field v;    // v_i(y) = u_i(x_k + εy) − λ, row-major, first index along y_1

  double coord(int i) const { return -half_width + 2.0 * half_width * i / (n - 1); }
};

/// Bilinear resampling of every component around `peak`. The window is
/// capped at min(10³, 0.25 L/ε).
Rescaled rescale_bubble(const Field& u, const TorusGrid& grid, const Peak& peak, double window, int samples = 129);

struct Deviation {
  std::vector<double> per_component;
  double max = 0.0;
};

/// sup |v_i − v⁰_i| over samples with |y| ≤ radius, for the components both share.
Deviation bubble_deviation(const Rescaled& v, const RadialProfile& v0,
                           double radius = std::numeric_limits<double>::infinity());
Deviation bubble_deviation(const Rescaled& v, const Rescaled& v0,
                           double radius = std::numeric_limits<double>::infinity());

struct KelvinField {
  PolarGrid grid;
  Field field;
};

/// v_i(x) = u_i(x/|x|²) − 2(2+μ_i) log|x| on the inverted annulus. Requires a
/// geometric annulus so that ring k lands on ring n_r − k.
KelvinField kelvin_transform(const Field& u, const PolarGrid& grid, const std::vector<double>& mu = {});

/// −Δu_i − Σ_j a_ij h_j e^{u_j} at interior nodes (zero on boundary circles).
/// Without h the weights are 1.
Field toda_residual(const Field& u, const PolarGrid& grid, const WeightData* h = nullptr);

/// u_1(x) − min_∂ u_1 − (1/2π)∫ log(1/|x−y|) Σ_j a_1j h_j e^{u_j} dy on a disk.
/// The kernel is averaged over an equal-area disk around each node, and x is
/// snapped to the nearest node. A geometric annulus with r_in < 1e-5 r_out is
/// accepted in place of a disk so that narrow peaks can be resolved; the hole
/// is ignored.
double green_representation_check(const Field& u, const WeightData& h, const PolarGrid& grid,
                                  std::array<double, 2> x);

struct BlowupReport {
  std::vector<Peak> peaks;
  Plateau plateau;
  double pohozaev = 0.0;
  Classification classification;
  std::array<double, 2> exponents{0.0, 0.0};
};

/// Diagnoses the highest peak of an SU(3) torus field.
BlowupReport diagnose_blowup(const Field& u, const WeightData& h, const TorusGrid& grid, double floor = 5.0,
                             double tol = 0.05);

}  // namespace toda
