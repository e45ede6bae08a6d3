#include <cmath>
#include <numbers>

#include "doctest.h"
#include "toda/errors.hpp"
#include "toda/holonomy.hpp"

using namespace toda;

namespace {

WeightFunction wavy(double eps) {
  return {[eps](double x, double y) { return 1.0 + eps * std::cos(x + 2 * y); },
          [eps](double x, double y) {
            return std::array<double, 2>{-eps * std::sin(x + 2 * y), -2 * eps * std::sin(x + 2 * y)};
          }};
}

const RadialProfile& singular_profile() {
  static const RadialProfile p = radial_toda_solve({-1.0, 0.0}, RadialInit{{0.0, 0.0}, std::nullopt});
  return p;
}

}  // namespace

TEST_CASE("w-tilde reconstruction") {
  auto w = u_to_w_tilde(std::vector<double>{0.0, 0.0});
  for (double x : w) CHECK(x == 0.0);
  for (const auto& u : {std::vector<double>{1.5, 1.5}, std::vector<double>{-0.3, 2.0}, std::vector<double>{1, 2, 3}}) {
    w = u_to_w_tilde(u);
    REQUIRE(w.size() == u.size() + 1);
    double sum = 0.0;
    for (double x : w) sum += x;
    CHECK(std::abs(sum) < 1e-12);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(2 * w[i + 1] - 2 * w[i] - u[i]) < 1e-12);
  }
}

TEST_CASE("expected phases") {
  auto e = expected_phases({0.0, 0.0});
  for (double b : e.raw) CHECK(b == 0.0);
  e = expected_phases({-1.0, 0.0});
  CHECK(e.raw[0] == doctest::Approx(-1.0 / 3));
  CHECK(e.raw[1] == doctest::Approx(1.0 / 6));
  CHECK(e.raw[2] == doctest::Approx(1.0 / 6));
  e = expected_phases({-1.0});
  CHECK(e.raw[0] == doctest::Approx(-0.25));
  CHECK(e.raw[1] == doctest::Approx(0.25));
  CHECK(wrap_phase(0.75) == doctest::Approx(-0.25));
  CHECK(wrap_phase(-0.5) == doctest::Approx(0.5));
  CHECK(phase_distance({0.1, -0.2, 0.1}, {-0.2, 0.1, 0.1 + 1e-9}) < 2e-9);
}

TEST_CASE("connection structure") {
  const auto w = WFields::from_profile(symmetric_toda_bubble(0.0, -8, 8), false);
  for (double th : {0.0, 1.0, 4.0}) {
    const auto c = connection_sample(w, 1.0, th);
    CHECK(std::abs(c.alpha_theta.trace()) < 1e-10);
    CHECK((c.alpha_theta + c.alpha_theta.adjoint()).norm() < 1e-10);
    CHECK((c.V + c.U.adjoint()).norm() < 1e-14);
  }

  const TorusGrid g(16, 1.0);
  const auto w0 = WFields::from_torus(Field(2, g.size()), g, {0.5, 0.5});
  const auto c0 = connection_sample(w0, 0.1, 0.3);
  CHECK(std::abs(c0.U(0, 1) - 0.5) < 1e-14);
  CHECK(std::abs(c0.U(1, 2) - 0.5) < 1e-14);
  CHECK(std::abs(c0.U(0, 0)) < 1e-14);

  const Weights h{wavy(0.3), wavy(0.3)};
  const auto ch = connection_sample(w, 1.0, 0.7, &h);
  const auto cf = connection_sample(w, 1.0, 0.7);
  const double x = std::cos(0.7), y = std::sin(0.7);
  CHECK(std::abs(ch.U(0, 1) / cf.U(0, 1) - std::sqrt(1.0 + 0.3 * std::cos(x + 2 * y))) < 1e-12);
}

TEST_CASE("loop holonomy") {
  const auto w = WFields::from_profile(symmetric_toda_bubble(0.0), false);
  const auto h = holonomy_loop(w, 1.0, 4096);
  CHECK(h.identity_defect < 1e-6);
  CHECK(h.unitarity_defect < 1e-6);
  CHECK(h.det_defect < 1e-6);

  const auto ws = WFields::from_profile(singular_profile());
  const auto ex = expected_phases({-1.0, 0.0});
  std::vector<std::vector<double>> phases;
  for (double r : {0.5, 1.0, 2.0}) {
    const auto hs = holonomy_loop(ws, r, 4096);
    CHECK(phase_distance(hs.phases, ex.mod1) < 1e-6);
    phases.push_back(hs.phases);
  }
  CHECK(phase_distance(phases[0], phases[2]) < 1e-5);

  const auto coarse = holonomy_loop(ws, 1.0, 256);
  const auto mid = holonomy_loop(ws, 1.0, 512);
  const auto fine = holonomy_loop(ws, 1.0, 4096);
  const double d1 = phase_distance(coarse.phases, fine.phases), d2 = phase_distance(mid.phases, fine.phases);
  CHECK(d2 < d1 / 8.0 + 1e-12);

  CHECK_THROWS_AS(holonomy_loop(WFields::from_profile(symmetric_toda_bubble(0.0), false, std::log(4.0)), 1.0, 256,
                                nullptr, 1e-14),
                  AccuracyError);
}

TEST_CASE("curvature") {
  const auto w = WFields::from_profile(symmetric_toda_bubble(0.0), false);
  CHECK(curvature_fd(w, nullptr, 1.0, 0.4).norm() < 1e-7);
  const Weights flat{WeightFunction::constant(), WeightFunction::constant()};
  CHECK(curvature(w, flat, 1.0, 0.4).norm() < 1e-14);

  double prev = 0.0;
  for (double eps : {0.1, 0.05, 0.025}) {
    const Weights h{wavy(eps), wavy(eps)};
    const auto F = curvature(w, h, 1.0, 0.4);
    CHECK((F + F.adjoint()).norm() < 1e-12);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(F(i, i)) < 1e-14);
    if (prev > 0.0) CHECK(prev / F.norm() == doctest::Approx(2.0).epsilon(0.02));
    prev = F.norm();
    const auto Ffd = curvature_fd(w, &h, 1.0, 0.4);
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(F(i, i + 1) - Ffd(i, i + 1)) < 1e-6);
      CHECK(std::abs(F(i + 1, i) - Ffd(i + 1, i)) < 1e-6);
    }
  }
}

TEST_CASE("radial gauge") {
  const auto ws = WFields::from_profile(singular_profile());
  const auto gr = gauge_radial(ws, 1.0);
  CHECK(gr.phase_difference < 1e-5);
  CHECK(gr.alpha_r_residual < 1e-8);
  CHECK(phase_distance(gr.gauged.phases, expected_phases({-1.0, 0.0}).mod1) < 1e-5);
  CHECK(gr.theta.size() == gr.alpha_theta.size());
}
