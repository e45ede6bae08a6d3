#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "toda/blowup.hpp"
#include "toda/errors.hpp"
#include "toda/synthetic.hpp"

using namespace toda;

namespace {

constexpr double kPi = std::numbers::pi;

double band_max(const Field& f, const PolarGrid& g, double lo, double hi) {
  double m = 0.0;
  for (int k = 0; k < g.rings(); ++k) {
    if (g.r(k) < lo || g.r(k) > hi) continue;
    for (int q = 0; q < g.n_t(); ++q) m = std::max(m, std::abs(f[0][g.index(k, q)]));
  }
  return m;
}

}  // namespace

TEST_CASE("Pohozaev arithmetic") {
  for (const auto& p : admissible_pairs()) CHECK(std::abs(pohozaev_residual(p[0], p[1])) < 1e-9 * 64 * kPi * kPi);
  CHECK(pohozaev_residual(6 * kPi, 6 * kPi) == doctest::Approx(-12 * kPi * kPi));
  CHECK(pohozaev_residual(0.0, 0.0) == 0.0);
}

TEST_CASE("classification") {
  auto c = classify_blowup(8.05 * kPi, 7.9 * kPi);
  CHECK(c.admissible);
  CHECK(c.pair == std::array{8 * kPi, 8 * kPi});

  c = classify_blowup(4 * kPi, 8 * kPi);
  CHECK(c.distance == 0.0);
  CHECK(c.admissible);

  c = classify_blowup(6 * kPi, 6 * kPi);
  CHECK(c.tie);
  CHECK_FALSE(c.admissible);
  CHECK(c.pair == std::array{4 * kPi, 8 * kPi});

  for (const auto& p : admissible_pairs()) {
    const auto e = classify_blowup(p[0], p[1]);
    CHECK(e.pair == p);
    CHECK(e.distance == 0.0);
  }
  CHECK_FALSE(classify_blowup(2 * kPi, 0.0).admissible);
}

TEST_CASE("mass exponents") {
  auto m = mass_exponents(8 * kPi, 8 * kPi);
  CHECK(m[0] == doctest::Approx(4.0));
  CHECK(m[1] == doctest::Approx(4.0));
  m = mass_exponents(4 * kPi, 0.0);
  CHECK(m[0] == doctest::Approx(4.0));
  CHECK(m[1] == doctest::Approx(-2.0));
  CHECK(mass_exponents(0.0, 0.0) == std::array{0.0, 0.0});

  std::mt19937 gen(4);
  std::uniform_real_distribution<double> ud(-50, 50);
  for (int t = 0; t < 20; ++t) {
    const double a = ud(gen), b = ud(gen), s1 = ud(gen), s2 = ud(gen), p1 = ud(gen), p2 = ud(gen);
    const auto lhs = mass_exponents(a * s1 + b * p1, a * s2 + b * p2);
    const auto m1 = mass_exponents(s1, s2), m2 = mass_exponents(p1, p2);
    for (int i = 0; i < 2; ++i) CHECK(lhs[i] == doctest::Approx(a * m1[i] + b * m2[i]).epsilon(1e-12));
  }
}

TEST_CASE("peak detection") {
  const TorusGrid g(64, 1.0);
  CHECK(detect_peaks(Field(2, g.size()), g, 5.0).empty());

  const TorusGrid fine(256, torus_length_for(20.0, 256, 4.0));
  const double L = fine.length();
  const std::array<double, 2> p{0.25 * L, 0.5 * L};
  auto peaks = detect_peaks(planted_torus_field({{BubbleKind::liouville, p, 20.0}}, fine), fine, 5.0);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].component == 0);
  CHECK(std::abs(peaks[0].x[0] - p[0]) <= fine.spacing());
  CHECK(std::abs(peaks[0].x[1] - p[1]) <= fine.spacing());
  CHECK(peaks[0].height == doctest::Approx(20.0).epsilon(0.01));

  const std::array<double, 2> q{0.75 * L, 0.5 * L};
  peaks = detect_peaks(planted_torus_field({{BubbleKind::liouville, p, 20.0}, {BubbleKind::liouville, q, 20.0}}, fine),
                       fine, 5.0);
  CHECK(peaks.size() == 2);
}

TEST_CASE("local mass profile") {
  const TorusGrid g(64, 1.0);
  const auto h = WeightData::constant(2, g.size());
  const Field zero(2, g.size());
  const auto prof = local_mass_profile(zero, h, g, {0.5, 0.5}, {0.1, 0.2, 0.3});
  for (std::size_t j = 0; j < prof.radii.size(); ++j) {
    const double r = prof.radii[j];
    CHECK(prof.sigma[0][j] == doctest::Approx(kPi * r * r).epsilon(0.05));
  }
  CHECK_THROWS_AS(local_mass_profile(zero, h, g, {0.5, 0.5}, {0.6}), InvalidArgument);

  std::mt19937 gen(8);
  std::uniform_real_distribution<double> ud(-2, 2);
  Field u(2, g.size());
  for (int i = 0; i < 2; ++i)
    for (auto& x : u[i]) x = ud(gen);
  std::vector<double> radii;
  for (int k = 1; k <= 40; ++k) radii.push_back(0.0125 * k);
  const auto m = local_mass_profile(u, h, g, {0.3, 0.6}, radii);
  for (int i = 0; i < 2; ++i)
    for (std::size_t j = 1; j < radii.size(); ++j) CHECK(m.sigma[i][j] >= m.sigma[i][j - 1]);
}

TEST_CASE("plateau of planted bubbles") {
  const int n = 512;
  const double lambda = 12.0;
  const TorusGrid g(n, torus_length_for(lambda, n, 2.0));
  const auto h = WeightData::constant(2, g.size());
  const std::array<double, 2> c{0.5 * g.length(), 0.5 * g.length()};

  auto u = planted_torus_field({{BubbleKind::symmetric_toda, c, lambda}}, g);
  auto rep = diagnose_blowup(u, h, g);
  CHECK(std::abs(rep.plateau.sigma[0] / (8 * kPi) - 1.0) < 1e-2);
  CHECK(std::abs(rep.plateau.sigma[1] / (8 * kPi) - 1.0) < 1e-2);
  CHECK(rep.classification.pair == std::array{8 * kPi, 8 * kPi});
  CHECK(rep.classification.admissible);

  u = planted_torus_field({{BubbleKind::liouville, c, lambda}}, g);
  const auto peaks = detect_peaks(u, g, 5.0);
  REQUIRE(peaks.size() == 1);
  const auto pl = plateau_masses(u, h, g, peaks[0]);
  CHECK(std::abs(pl.sigma[0] / (4 * kPi) - 1.0) < 1e-2);
  CHECK(pl.sigma[1] < 0.1 * kPi);

  CHECK_THROWS_AS(diagnose_blowup(Field(2, g.size()), h, g), ValidationError);
}

TEST_CASE("rescaled bubbles match their profiles") {
  const int n = 256;
  const double lambda = 10.0;
  const TorusGrid g(n, torus_length_for(lambda, n, 5.0));
  const std::array<double, 2> c{0.5 * g.length(), 0.5 * g.length()};

  const auto lu = planted_torus_field({{BubbleKind::liouville, c, lambda}}, g);
  const auto lp = detect_peaks(lu, g, 5.0);
  REQUIRE(lp.size() == 1);
  const auto lv = rescale_bubble(lu, g, lp[0], 10.0, 81);
  CHECK(bubble_deviation(lv, liouville_bubble(0.0, -12, 8)).per_component[0] < 1e-2);
  CHECK(bubble_deviation(lv, lv).max == 0.0);

  const auto su = planted_torus_field({{BubbleKind::symmetric_toda, c, lambda}}, g);
  const auto sp = detect_peaks(su, g, 5.0);
  REQUIRE(!sp.empty());
  const auto sv = rescale_bubble(su, g, sp[0], 10.0, 81);
  const double right = bubble_deviation(sv, symmetric_toda_bubble(0.0, -12, 8), 10.0).max;
  const double wrong = bubble_deviation(sv, liouville_bubble(0.0, -12, 8), 10.0).max;
  CHECK(right < 1e-2);
  CHECK(wrong > 10 * right);

  const TorusGrid wide(64, 100.0);
  const Field zero(2, wide.size());
  Peak fake;
  fake.x = {50.0, 50.0};
  fake.node = wide.index(32, 32);
  const auto zv = rescale_bubble(zero, wide, fake, 5.0, 21);
  CHECK(sup_norm(zv.v) == 0.0);
}

TEST_CASE("Kelvin transform") {
  const PolarGrid g(0.25, 4.0, 128, 32, RadialSpacing::geometric);
  std::mt19937 gen(12);
  std::uniform_real_distribution<double> ud(-3, 3);
  Field u(2, g.size());
  for (int i = 0; i < 2; ++i)
    for (auto& x : u[i]) x = ud(gen);
  const auto k1 = kelvin_transform(u, g, {-0.5, 0.3});
  const auto k2 = kelvin_transform(k1.field, k1.grid, {-0.5, 0.3});
  CHECK(k2.grid == g);
  for (int i = 0; i < 2; ++i)
    for (std::size_t q = 0; q < g.size(); ++q) CHECK(std::abs(k2.field[i][q] - u[i][q]) < 1e-12);

  Field tail(2, g.size());
  for (int k = 0; k < g.rings(); ++k)
    for (int m = 0; m < g.n_t(); ++m) tail[0][g.index(k, m)] = tail[1][g.index(k, m)] = -4 * std::log(g.r(k));
  CHECK(sup_norm(kelvin_transform(tail, g).field) < 1e-12);

  const auto bubble = planted_polar_field({{BubbleKind::symmetric_toda, {0, 0}, 0.0}}, g);
  const auto kv = kelvin_transform(bubble, g);
  const auto image = planted_polar_field({{BubbleKind::symmetric_toda, {0, 0}, std::log(64.0)}}, kv.grid);
  double d = 0.0;
  for (int i = 0; i < 2; ++i)
    for (std::size_t q = 0; q < g.size(); ++q) d = std::max(d, std::abs(kv.field[i][q] - image[i][q]));
  CHECK(d < 1e-12);
  const double res = band_max(toda_residual(kv.field, kv.grid), kv.grid, 0.5, 2.0);
  const double trunc = band_max(toda_residual(image, kv.grid), kv.grid, 0.5, 2.0);
  CHECK(res < 10 * trunc + 1e-12);
  CHECK(band_max(toda_residual(bubble, g), g, 0.5, 2.0) < 1e-3);

  CHECK_THROWS_AS(kelvin_transform(u, PolarGrid(0.25, 4.0, 128, 32)), InvalidArgument);
}

TEST_CASE("Green representation") {
  const PolarGrid disk(0.0, 1.0, 64, 32);
  WeightData none;
  none.h.assign(2, std::vector<double>(disk.size(), 0.0));
  CHECK(std::abs(green_representation_check(Field(2, disk.size()), none, disk, {0.0, 0.0})) < 1e-14);
  std::vector<double> vals;
  for (double lambda : {10.0, 15.0, 20.0}) {
    const double eps = std::exp(-lambda / 2);
    const PolarGrid g(1e-3 * eps, 1.0, 400, 32, RadialSpacing::geometric);
    const auto u = planted_polar_field({{BubbleKind::symmetric_toda, {0, 0}, lambda}}, g);
    vals.push_back(green_representation_check(u, WeightData::constant(2, g.size()), g, {0.0, 0.0}));
  }
  for (double v : vals) CHECK(std::abs(v) < 0.1);
}
