#include "helpers.hpp"

#include "xisub/catalog.hpp"
#include "xisub/error.hpp"
#include "xisub/xi_equation.hpp"

#include <doctest.h>

using namespace xisub;

namespace {

double residual(const ParametricImmersion& imm, int nodes = 8) {
  return xi_residual(imm, verification_grid(imm, nodes)).residual;
}

// max |xi(u) - (H + x_perp)(u)| over a small grid
double xi_mismatch(const CatalogImmersion& item) {
  double worst = 0.0;
  for (const Vec& u : verification_grid(item.immersion, 3).nodes)
    worst = std::max(worst, (item.xi(u) - xi_vector(geometry_jet(item.immersion, u))).norm());
  return worst;
}

}  // namespace

TEST_SUITE("catalog") {

TEST_CASE("planes") {
  const CatalogImmersion P = make_plane(2, 1, Vec::Zero(3));
  CHECK(P.self_shrinker);
  CHECK(P.name() == "plane(m=2,offset2=0,p=1)");

  const CatalogImmersion line = make_plane(1, 1, Vec{{0.0, 1.0}});
  CHECK_FALSE(line.self_shrinker);
  CHECK((line.xi(Vec::Constant(1, 0.4)) - Vec{{0.0, 1.0}}).norm() == 0.0);
  CHECK(xi_mismatch(line) < 1e-12);

  const CatalogImmersion P22 = make_plane(2, 2, Vec{{0.0, 0.0, 0.5, -0.3}});
  CHECK(residual(P22.immersion) <= 1e-12);

  try {
    make_plane(2, 1, Vec{{0.1, 0.0, 1.0}});
    FAIL("expected BadOffset");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadOffset);
  }
}

TEST_CASE("spheres") {
  const CatalogImmersion circle = make_sphere(1, 1.0);
  CHECK(circle.self_shrinker);
  CHECK(make_sphere(2, std::sqrt(2.0)).self_shrinker);
  const CatalogImmersion s = make_sphere(2, 1.0);
  CHECK_FALSE(s.self_shrinker);
  for (const Vec& u : verification_grid(s.immersion, 3).nodes) {
    CHECK((s.xi(u) + s.immersion.position(u)).norm() < 1e-14);
    CHECK(s.xi(u).norm() == doctest::Approx(1.0));
  }
  for (int m = 1; m <= 3; ++m)
    for (double r : {0.8, 1.0, std::sqrt(2.0), 2.0}) CHECK(xi_mismatch(make_sphere(m, r)) < 1e-9);
}

TEST_CASE("products") {
  const CatalogImmersion torus = make_product(make_sphere(1, 1.0), make_sphere(1, 1.0));
  CHECK(torus.immersion.ambient_dim() == 4);
  CHECK(torus.self_shrinker);
  CHECK(residual(torus.immersion) < 1e-9);

  const double r = 1.5;
  const CatalogImmersion cyl = make_product(make_sphere(1, r), make_plane(1, 0, Vec::Zero(1)));
  for (const Vec& u : verification_grid(cyl.immersion, 3).nodes) {
    const Vec x = cyl.immersion.position(u);
    Vec expected = Vec::Zero(3);
    expected.head(2) = (1.0 - 1.0 / (r * r)) * x.head(2);
    CHECK((cyl.xi(u) - expected).norm() < 1e-14);
  }
  CHECK(xi_mismatch(cyl) < 1e-9);
  CHECK(cyl.flat_axes == std::vector<bool>{false, true});

  const CatalogImmersion lines =
      make_product(make_plane(1, 1, Vec{{0.0, 0.7}}), make_plane(1, 1, Vec{{0.0, -0.2}}));
  const Vec u{{0.3, -1.1}};
  CHECK((lines.xi(u) - Vec{{0.0, 0.7, 0.0, -0.2}}).norm() == 0.0);
  CHECK((lines.immersion.position(u) - Vec{{0.3, 0.7, -1.1, -0.2}}).norm() == 0.0);
  CHECK(residual(lines.immersion) < 1e-12);

  // products of catalog items satisfy the catalog invariants again
  const CatalogImmersion nested = make_product(make_sphere(1, 1.2), make_sphere(2, 1.0));
  CHECK(nested.parallel_frame.size() == 2);
  CHECK(residual(nested.immersion, 5) < 1e-8);
  CHECK(xi_mismatch(nested) < 1e-9);
}

TEST_CASE("submanifolds of spheres") {
  const double a = 1.5;
  SphericalSpec great{SphericalSpec::Kind::GreatSphere, 2, a, 0.0};
  const CatalogImmersion g = make_spherical(great);
  CHECK(g.immersion.ambient_dim() == 4);
  for (const Vec& u : verification_grid(g.immersion, 3).nodes)
    CHECK((g.xi(u) - (1.0 - 2.0 / (a * a)) * g.immersion.position(u)).norm() < 1e-14);
  CHECK(make_spherical({SphericalSpec::Kind::GreatSphere, 2, std::sqrt(2.0), 0.0}).self_shrinker);

  const CatalogImmersion clifford = make_spherical({SphericalSpec::Kind::CliffordTorus, 2, 2.0, 0.0});
  CHECK(residual(clifford.immersion) <= 1e-8);
  const CatalogImmersion small = make_spherical({SphericalSpec::Kind::SmallSphere, 2, 2.0, 1.0});
  CHECK(residual(small.immersion) <= 1e-8);
  CHECK(xi_mismatch(small) < 1e-9);
  CHECK_THROWS_AS(make_spherical({SphericalSpec::Kind::SmallSphere, 2, 1.0, 2.0}), Error);
}

TEST_CASE("parallel frames are orthonormal, normal and parallel") {
  for (const auto& item : standard_catalog()) {
    const auto& frame = item.parallel_frame;
    REQUIRE(frame.size() == static_cast<std::size_t>(item.codim()));
    for (const Vec& u : verification_grid(item.immersion, 2).nodes) {
      const Mat P = normal_projector(item.immersion, u);
      for (std::size_t a = 0; a < frame.size(); ++a) {
        CHECK((P * frame[a](u) - frame[a](u)).norm() < 1e-10);
        for (std::size_t b = 0; b < frame.size(); ++b)
          CHECK(frame[a](u).dot(frame[b](u)) == doctest::Approx(a == b ? 1.0 : 0.0));
        for (int i = 0; i < item.dim(); ++i)
          CHECK(normal_derivative(item.immersion, frame[a], u, i).norm() < 1e-8);
      }
    }
  }
}

TEST_CASE("catalog listing") {
  const auto items = standard_catalog();
  CHECK(items.size() >= 20);
  for (const auto& item : items) {
    const auto j = catalog_entry(item, 4);
    CHECK(j["name"] == item.name());
    CHECK(j["m"] == item.dim());
    CHECK(j["self_shrinker"] == item.self_shrinker);
  }
}

}  // TEST_SUITE
