#include "toda/synthetic.hpp"

#include <cmath>
#include <limits>

#include "toda/errors.hpp"

namespace toda {

namespace {

bool touches(BubbleKind kind, int component) {
  return kind == BubbleKind::symmetric_toda ? component < 2 : component == 0;
}

template <class Dist2>
Field plant(const std::vector<PlantedBubble>& bubbles, std::size_t nodes, int rank, double flat, Dist2 dist2) {
  if (rank < 1) throw InvalidArgument("rank must be positive");
  for (const auto& b : bubbles)
    if (b.kind == BubbleKind::symmetric_toda && rank < 2)
      throw InvalidArgument("symmetric Toda bubble needs two components");
  Field u(rank, nodes);
  for (int i = 0; i < rank; ++i) {
    bool any = false;
    for (const auto& b : bubbles) any = any || touches(b.kind, i);
    for (std::size_t q = 0; q < nodes; ++q) {
      if (!any) {
        u[i][q] = flat;
        continue;
      }
      // log-sum-exp over the bubbles touching this component
      double top = -std::numeric_limits<double>::infinity();
      double vals[16];
      int nv = 0;
      for (const auto& b : bubbles) {
        if (!touches(b.kind, i)) continue;
        if (nv == 16) throw InvalidArgument("at most 16 bubbles per component");
        vals[nv] = bubble_value(b.kind, b.lambda, dist2(q, b.center));
        top = std::max(top, vals[nv++]);
      }
      double acc = 0.0;
      for (int k = 0; k < nv; ++k) acc += std::exp(vals[k] - top);
      u[i][q] = top + std::log(acc);
    }
  }
  return u;
}

}  // namespace

double bubble_value(BubbleKind kind, double lambda, double d2) {
  const double c = kind == BubbleKind::liouville ? 0.25 : 0.125;
  // log1p keeps the core exact when e^λ d² is tiny
  const double z = std::exp(lambda) * d2 * c;
  return lambda - 2.0 * (z > 1e300 ? lambda + std::log(d2 * c) : std::log1p(z));
}

Field planted_torus_field(const std::vector<PlantedBubble>& bubbles, const TorusGrid& grid, int rank, double flat) {
  const int n = grid.n();
  return plant(bubbles, grid.size(), rank, flat, [&](std::size_t q, std::array<double, 2> c) {
    const int i = static_cast<int>(q / n), j = static_cast<int>(q % n);
    const double dx = grid.wrap(grid.x(i) - c[0]), dy = grid.wrap(grid.y(j) - c[1]);
    return dx * dx + dy * dy;
  });
}

Field planted_polar_field(const std::vector<PlantedBubble>& bubbles, const PolarGrid& grid, int rank, double flat) {
  const int nt = grid.n_t();
  return plant(bubbles, grid.size(), rank, flat, [&](std::size_t q, std::array<double, 2> c) {
    const auto x = grid.cartesian(static_cast<int>(q / nt), static_cast<int>(q % nt));
    const double dx = x[0] - c[0], dy = x[1] - c[1];
    return dx * dx + dy * dy;
  });
}

double torus_length_for(double lambda, int n, double cells_per_eps) {
  if (!(cells_per_eps > 0.0)) throw InvalidArgument("cells per ε must be positive");
  return n * std::exp(-0.5 * lambda) / cells_per_eps;
}

}  // namespace toda
