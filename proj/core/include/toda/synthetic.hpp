#pragma once

// Planted bubbles for exercising the diagnostics without a blow-up sequence.
//
//   liouville:       u_1 = λ − 2 log(1 + e^λ d²/4)   (−Δu = 2e^u, ∫e^u = 4π)
//   symmetric_toda:  u_1 = u_2 = λ − 2 log(1 + e^λ d²/8)   (∫e^{u_i} = 8π)
//
// Several bubbles in one component are combined as log Σ e^{U_b}, so the
// densities add. Components no bubble touches are set to `flat`.

#include <array>
#include <vector>

#include "toda/geometry.hpp"

namespace toda {

enum class BubbleKind { liouville, symmetric_toda };

struct PlantedBubble {
  BubbleKind kind = BubbleKind::symmetric_toda;
  std::array<double, 2> center{0.0, 0.0};
  double lambda = 10.0;
};

/// Closed-form profile value at squared distance d2.
double bubble_value(BubbleKind kind, double lambda, double d2);

/// Distances are minimal-image on the torus.
Field planted_torus_field(const std::vector<PlantedBubble>& bubbles, const TorusGrid& grid, int rank = 2,
                          double flat = 0.0);

Field planted_polar_field(const std::vector<PlantedBubble>& bubbles, const PolarGrid& grid, int rank = 2,
                          double flat = 0.0);

/// Side length giving `cells_per_eps` torus cells per ε = e^{−λ/2}.
double torus_length_for(double lambda, int n, double cells_per_eps);

}  // namespace toda
