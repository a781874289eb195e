#include "helpers.hpp"

#include "xisub/catalog.hpp"
#include "xisub/error.hpp"
#include "xisub/kernels.hpp"
#include "xisub/quadrature.hpp"

#include <doctest.h>

#include <random>

using namespace xisub;

TEST_SUITE("geometry") {

TEST_CASE("sphere mean curvature is -(m/r^2) x") {
  for (int m = 1; m <= 3; ++m) {
    for (double r : {0.8, 2.0}) {
      const CatalogImmersion s = make_sphere(m, r);
      for (const Vec& u : verification_grid(s.immersion, 3).nodes) {
        const GeometryJet jet = geometry_jet(s.immersion, u);
        CHECK((jet.mean_curvature + (m / (r * r)) * jet.x).norm() < 1e-9);
        CHECK(jet.x_tan.norm() < 1e-12);
      }
    }
  }
}

TEST_CASE("plane is totally geodesic") {
  const CatalogImmersion P = make_plane(2, 2, Vec{{0.0, 0.0, 0.5, -0.3}});
  const GeometryJet jet = geometry_jet(P.immersion, Vec{{1.5, -2.0}});
  for (const Vec& h : jet.second_fundamental) CHECK(h.norm() == doctest::Approx(0.0));
  CHECK(jet.mean_curvature.norm() == doctest::Approx(0.0));
  CHECK(jet.volume_density == doctest::Approx(1.0));
}

TEST_CASE("parabola jets from finite differences match the symbolic derivatives") {
  const ParametricImmersion parabola = make_parabola(2.0);
  for (double u : {-0.7, 0.0, 0.3, 1.1}) {
    const GeometryJet jet = geometry_jet(parabola, Vec::Constant(1, u));
    // x' = (1, 2u), x'' = (0, 2)
    const Vec d1{{1.0, 2.0 * u}};
    const Vec d2{{0.0, 2.0}};
    const double g = d1.squaredNorm();
    const Vec H = (d2 - (d2.dot(d1) / g) * d1) / g;
    CHECK((jet.mean_curvature - H).norm() < 1e-8);
    CHECK(jet.metric(0, 0) == doctest::Approx(g).epsilon(1e-10));
  }
  const GeometryJet vertex = geometry_jet(parabola, Vec::Zero(1));
  CHECK((vertex.mean_curvature - Vec{{0.0, 2.0}}).norm() < 1e-8);
}

TEST_CASE("Weingarten map") {
  const double r = 1.7;
  const CatalogImmersion s = make_sphere(2, r);
  const GeometryJet jet = geometry_jet(s.immersion, Vec{{1.0, 2.0}});
  const Mat A = weingarten_map(jet, jet.x / r);
  CHECK((A + Mat::Identity(2, 2) / r).norm() < 1e-9);
  CHECK(weingarten_map(jet, Vec::Zero(3)).norm() == 0.0);
  CHECK_THROWS_AS(weingarten_map(jet, jet.tangent.col(0)), Error);

  const CatalogImmersion P = make_plane(2, 1, Vec::Zero(3));
  const GeometryJet pj = geometry_jet(P.immersion, Vec{{0.3, 0.4}});
  CHECK(weingarten_map(pj, Vec{{0.0, 0.0, 1.0}}).norm() == doctest::Approx(0.0));
}

TEST_CASE("normal connection") {
  const CatalogImmersion s = make_sphere(2, 1.3);
  NormalField position;
  position.value = [imm = s.immersion](const Vec& u) { return imm.position(u); };
  for (const Vec& u : verification_grid(s.immersion, 3).nodes)
    for (int i = 0; i < 2; ++i) CHECK(normal_derivative(s.immersion, position, u, i).norm() < 1e-8);

  const CatalogImmersion P = make_plane(2, 1, Vec::Zero(3));
  NormalField constant;
  constant.value = [](const Vec&) { return Vec{{0.0, 0.0, 1.0}}; };
  CHECK(normal_derivative(P.immersion, constant, Vec{{1.0, 1.0}}, 0).norm() < 1e-12);

  const ParametricImmersion off = make_offcenter_sphere(1.0, Vec{{0.3, 0.0, 0.4}});
  NormalField x_perp;
  x_perp.value = [off](const Vec& u) { return Vec(normal_projector(off, u) * off.position(u)); };
  double worst = 0.0;
  for (const Vec& u : verification_grid(off, 4).nodes)
    for (int i = 0; i < 2; ++i) worst = std::max(worst, normal_derivative(off, x_perp, u, i).norm());
  CHECK(worst > 0.1);
}

TEST_CASE("Laplace-Beltrami oracles") {
  const CatalogImmersion P = make_plane(2, 1, Vec::Zero(3));
  const ScalarField height = [](const Vec& u) { return 0.3 * u[0] - 1.2 * u[1]; };
  const ScalarField square = [](const Vec& u) { return u.squaredNorm(); };
  CHECK(std::abs(laplace_beltrami(P.immersion, height, Vec{{0.4, -1.0}})) < 1e-8);
  CHECK(laplace_beltrami(P.immersion, square, Vec{{0.4, -1.0}}) == doctest::Approx(4.0).epsilon(1e-8));

  const double r = 1.5;
  const CatalogImmersion s = make_sphere(2, r);
  const ParametricImmersion imm = s.immersion;
  const ScalarField k1 = [imm](const Vec& u) { return imm.position(u)[2]; };
  const ScalarField k2 = [imm](const Vec& u) {
    const Vec x = imm.position(u);
    return x[0] * x[1];
  };
  for (const Vec& u : verification_grid(imm, 3).nodes) {
    CHECK(laplace_beltrami(imm, k1, u) == doctest::Approx(-2.0 / (r * r) * k1(u)).epsilon(1e-7));
    CHECK(std::abs(laplace_beltrami(imm, k2, u) + 6.0 / (r * r) * k2(u)) < 1e-7);
  }
}

TEST_CASE("errors") {
  const ParametricImmersion parabola = make_parabola(1.0);
  CHECK_THROWS_AS(geometry_jet(parabola, Vec::Constant(1, 3.0)), Error);
  try {
    geometry_jet(parabola, Vec::Constant(1, 3.0));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfDomain);
  }
  ParametricImmersion flat(2, 1, Box(2, Axis{-1.0, 1.0, false, 0.0}),
                           [](const Vec& u) { return Vec{{u[0], u[0], 0.0}}; });
  try {
    geometry_jet(flat, Vec::Zero(2));
    FAIL("expected DegenerateMetric");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateMetric);
  }
}

TEST_CASE("metric invariants") {
  std::mt19937_64 rng(3);
  for (const auto& item : standard_catalog()) {
    const QuadratureGrid grid = verification_grid(item.immersion, 2);
    for (const Vec& u : grid.nodes) {
      const GeometryJet jet = geometry_jet(item.immersion, u);
      const int m = jet.dim();
      CHECK((jet.metric - jet.metric.transpose()).norm() < 1e-12);
      CHECK((jet.metric * jet.metric_inv - Mat::Identity(m, m)).norm() < 1e-9);
      CHECK((jet.normal_projector * jet.tangent).norm() < 1e-10);
      for (const Vec& h : jet.second_fundamental) CHECK((jet.tangent.transpose() * h).norm() < 1e-8);
      for (int k = 0; k < m; ++k)
        CHECK((jet.christoffel[k] - jet.christoffel[k].transpose()).norm() < 1e-9);
    }
  }
}

TEST_CASE("Gauss-Legendre rules") {
  const GaussRule rule = gauss_legendre(10);
  double sum = 0.0, x8 = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i];
    x8 += rule.weights[i] * std::pow(rule.nodes[i], 8);
  }
  CHECK(sum == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(x8 == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("area of S^m(r) by quadrature") {
  for (int m = 1; m <= 3; ++m) {
    const double r = 1.3;
    const CatalogImmersion s = make_sphere(m, r);
    const QuadratureGrid grid = tensor_grid(s.immersion.domain(), std::vector<int>(m, 20));
    const double area = integrate(s.immersion, grid, [](const Vec&) { return 1.0; });
    CHECK(area == doctest::Approx(testing::unit_sphere_area(m) * std::pow(r, m)).epsilon(1e-10));
  }
}

TEST_CASE("serial and parallel reductions") {
  const std::size_t n = 10007;
  const auto term = [](std::size_t i) { return std::sin(0.001 * static_cast<double>(i)) / (1.0 + i); };
  const double serial = kernels::reduce_sum_serial(n, term);
  const double a = kernels::reduce_sum(n, term, {true, true});
  const double b = kernels::reduce_sum(n, term, {true, true});
  CHECK(a == b);
  CHECK(a == doctest::Approx(serial).epsilon(1e-13));
  CHECK(kernels::reduce_sum(n, term, {true, false}) == doctest::Approx(serial).epsilon(1e-13));
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = term(i);
  CHECK(kernels::pairwise_sum(values) == a);
  CHECK(kernels::pairwise_sum(nullptr, 0) == 0.0);
}

TEST_CASE("worker exceptions propagate") {
  CHECK_THROWS_AS(kernels::for_each_index(100, [](std::size_t i) {
                    if (i == 37) throw Error(ErrorCode::NonFinite, "boom");
                  }),
                  Error);
}

TEST_CASE("finite-difference jets converge at fourth order") {
  const ParametricImmersion exact = make_ellipse(2.0, 1.0);
  const auto error_at = [&](double h) {
    ParametricImmersion fd_only(1, 1, exact.domain(), [exact](const Vec& u) { return exact.position(u); });
    fd_only.with_steps({h, h});
    double worst_tangent = 0.0, worst_h = 0.0;
    for (double u : {0.3, 1.1, 2.5}) {
      const GeometryJet a = geometry_jet(exact, Vec::Constant(1, u));
      const GeometryJet b = geometry_jet(fd_only, Vec::Constant(1, u));
      worst_tangent = std::max(worst_tangent, (a.tangent - b.tangent).norm());
      worst_h = std::max(worst_h, (a.mean_curvature - b.mean_curvature).norm());
    }
    return std::pair{worst_tangent, worst_h};
  };
  const auto [t1, h1] = error_at(0.05);
  const auto [t2, h2] = error_at(0.025);
  CHECK(std::log2(t1 / t2) >= 3.5);
  CHECK(std::log2(h1 / h2) >= 3.5);
}

}  // TEST_SUITE
