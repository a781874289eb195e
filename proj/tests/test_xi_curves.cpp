#include "xisub/error.hpp"
#include "xisub/xi_curves.hpp"
#include "xisub/xi_equation.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace xisub;

namespace {
constexpr double kPi = std::numbers::pi;

Vec2 rotate(const Vec2& v, double a) {
  return Vec2(std::cos(a) * v[0] - std::sin(a) * v[1], std::sin(a) * v[0] + std::cos(a) * v[1]);
}
}  // namespace

TEST_SUITE("xi_curves") {

TEST_CASE("first integral is conserved") {
  const Trajectory t = integrate_xi_curve(Vec2(1.0, 0.0), kPi / 2, 0.3, 20.0);
  CHECK(t.s_max() == 20.0);
  CHECK(t.max_drift() <= 1e-8);
  for (double s : {0.0, 3.3, 19.99}) {
    const CurveState c = t.state_at(s);
    CHECK(t.first_integral(c) == doctest::Approx(0.3).epsilon(1e-8));
  }

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    const double C = 0.5 * u(rng);
    try {
      const Trajectory r = integrate_xi_curve(Vec2(u(rng), u(rng)), kPi * u(rng), C, 15.0);
      CHECK(r.max_drift() <= 1e-8);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BlowUp);
    }
  }
}

TEST_CASE("circles and lines") {
  // a circle of radius r about the origin: kappa = 1/r and <x, T> = 0
  const double r = 0.7;
  const double C = std::exp(-0.5 * r * r) / r;
  const Trajectory t = integrate_xi_curve(Vec2(r, 0.0), kPi / 2, C, 2.0 * kPi * r + 0.1);
  CHECK(t.min_radius() == doctest::Approx(r).epsilon(1e-8));
  CHECK(t.max_radius() == doctest::Approx(r).epsilon(1e-8));
  const Closure cl = closure_detect(t);
  CHECK(cl.status == ClosureStatus::Closed);
  CHECK(cl.period == doctest::Approx(2.0 * kPi * r).epsilon(1e-8));

  const Trajectory line = integrate_xi_curve(Vec2(0.0, -1.0), 0.3, 0.0, 4.0);
  for (const auto& n : line.nodes) CHECK(n.kappa == 0.0);
  CHECK(closure_detect(line).status == ClosureStatus::Open);

  const Trajectory sline = integrate_self_shrinker_curve(Vec2(0.0, 0.0), 0.8, 3.0);
  const CurveState end = sline.state_at(3.0);
  CHECK(end.theta == doctest::Approx(0.8));
  CHECK((end.x - 3.0 * Vec2(std::cos(0.8), std::sin(0.8))).norm() < 1e-10);
}

TEST_CASE("unit-circle self-shrinker") {
  const Trajectory t = integrate_self_shrinker_curve(Vec2(1.0, 0.0), kPi / 2, 7.0);
  const Closure c = closure_detect(t);
  CHECK(c.status == ClosureStatus::Closed);
  CHECK(c.gap <= 1e-8);
  CHECK(c.period == doctest::Approx(2.0 * kPi).epsilon(1e-9));
  CHECK(c.rotation_number == doctest::Approx(1.0).epsilon(1e-9));
  for (const auto& n : t.nodes) CHECK(n.kappa == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("non-circular self-shrinker orbit") {
  const Trajectory t = integrate_self_shrinker_curve(Vec2(1.2, 0.0), kPi / 2, 20.0);
  CHECK(t.min_radius() < 1.0);
  CHECK(t.max_radius() == doctest::Approx(1.2));
  CurveOptions half;
  half.max_step = 0.025;
  half.atol = half.rtol = 1e-12;
  const Trajectory h = integrate_self_shrinker_curve(Vec2(1.2, 0.0), kPi / 2, 20.0, half);
  CHECK((t.state_at(20.0).x - h.state_at(20.0).x).norm() < 1e-8);
}

TEST_CASE("step-halving convergence") {
  CurveOptions coarse;
  CurveOptions fine;
  fine.max_step = coarse.max_step / 2;
  fine.initial_step = coarse.initial_step / 2;
  const Trajectory a = integrate_xi_curve(Vec2(0.5, -0.2), 0.4, 0.25, 8.0, coarse);
  const Trajectory b = integrate_xi_curve(Vec2(0.5, -0.2), 0.4, 0.25, 8.0, fine);
  CHECK((a.state_at(8.0).x - b.state_at(8.0).x).norm() <= 1e-9);
}

TEST_CASE("rotation equivariance") {
  const double a = 0.9;
  const Vec2 x0(0.6, 0.3);
  const Trajectory t = integrate_xi_curve(x0, 0.2, 0.35, 6.0);
  const Trajectory r = integrate_xi_curve(rotate(x0, a), 0.2 + a, 0.35, 6.0);
  for (double s : {1.0, 3.0, 6.0}) {
    CHECK((rotate(t.state_at(s).x, a) - r.state_at(s).x).norm() <= 1e-10);
    CHECK(t.state_at(s).kappa == doctest::Approx(r.state_at(s).kappa).epsilon(1e-10));
  }
}

TEST_CASE("sampled trajectory is a xi-submanifold") {
  const Trajectory t = integrate_xi_curve(Vec2(1.0, 0.0), kPi / 2, 0.3, 6.0);
  const ParametricImmersion imm = t.as_immersion();
  CHECK(xi_residual(imm, verification_grid(imm, 24)).residual <= 1e-6);
}

TEST_CASE("blow-up guard") {
  try {
    integrate_xi_curve(Vec2(2.0, 0.0), 0.0, 0.0, 10.0);
    FAIL("expected BlowUp");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BlowUp);
  }
  CHECK_THROWS_AS(integrate_xi_curve(Vec2(1.0, 0.0), 0.0, 0.1, -1.0), Error);
}

TEST_CASE("Frenet obstruction") {
  const SpaceCurve helix = space_curve([](double t) { return Vec{{std::cos(t), std::sin(t), 0.5 * t}}; });
  const FrenetResidual h = frenet_torsion_check(helix, {0.1, 0.7, 1.5});
  // kappa_1 = 1 / 1.25, kappa_2 = 0.5 / 1.25
  CHECK(h.torsion == doctest::Approx(0.32).epsilon(1e-6));

  const SpaceCurve circle = space_curve([](double t) { return Vec{{2.0 * std::cos(t), 2.0 * std::sin(t), 0.0}}; });
  CHECK(frenet_torsion_check(circle, {0.2, 1.0}).torsion < 1e-8);

  const Trajectory t = integrate_xi_curve(Vec2(1.0, 0.0), kPi / 2, 0.3, 6.0);
  const FrenetResidual e = frenet_torsion_check(embed_trajectory(t, 2), {0.5, 2.0, 4.5});
  CHECK(e.curvature_equation <= 1e-6);
  CHECK(e.torsion <= 1e-6);

  const SpaceCurve line = space_curve([](double t) { return Vec{{t, 2.0 * t, 0.0}}; });
  try {
    frenet_torsion_check(line, {0.5});
    FAIL("expected FrenetDegenerate");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::FrenetDegenerate);
  }
}

TEST_CASE("outputs") {
  const Trajectory t = integrate_self_shrinker_curve(Vec2(1.0, 0.0), kPi / 2, 1.0);
  const std::string csv = t.csv();
  CHECK(csv.rfind("s,x1,x2,theta,kappa_r,first_integral\n", 0) == 0);
  const auto j = curve_summary(t, closure_detect(t));
  CHECK(j["kind"] == "shrinker");
  CHECK(j.contains("rotation_number"));
  CHECK(j.contains("min_radius"));
  CHECK(to_string(ClosureStatus::Inconclusive) == "inconclusive");
  CHECK_THROWS_AS(t.state_at(2.0), Error);
}

}  // TEST_SUITE
