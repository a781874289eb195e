#include "helpers.hpp"

#include "xisub/catalog.hpp"
#include "xisub/xi_equation.hpp"

#include <doctest.h>

#include <random>

using namespace xisub;

TEST_SUITE("xi_equation") {

TEST_CASE("xi vector closed forms") {
  const double r = 1.3;
  const CatalogImmersion s = make_sphere(2, r);
  const GeometryJet jet = geometry_jet(s.immersion, Vec{{0.9, 2.0}});
  CHECK((xi_vector(jet) - (1.0 - 2.0 / (r * r)) * jet.x).norm() < 1e-9);
  const CatalogImmersion P = make_plane(2, 1, Vec::Zero(3));
  CHECK(xi_vector(geometry_jet(P.immersion, Vec{{1.0, -3.0}})).norm() < 1e-12);

  const XiData d = xi_data(jet, s.xi(jet.u));
  CHECK(d.f == doctest::Approx(0.5 * 4.0 / (r * r)));
  CHECK(d.f_bar == doctest::Approx(d.f - 0.5 * d.xi.squaredNorm()));
}

TEST_CASE("residual separates examples from non-examples") {
  for (const auto& item : standard_catalog())
    CHECK(xi_residual(item.immersion, verification_grid(item.immersion, 6)).residual <= 1e-8);
  const ParametricImmersion off = make_offcenter_sphere(1.0, Vec{{0.3, 0.0, 0.4}});
  CHECK(xi_residual(off, verification_grid(off, 8)).residual > 1e-2);
  const ParametricImmersion ellipse = make_ellipse(2.0, 1.0);
  CHECK(xi_residual(ellipse, verification_grid(ellipse, 16)).residual > 1e-2);
}

TEST_CASE("residual is invariant under ambient rotations") {
  const Mat Q = testing::rotation3(0.7, -1.1);
  for (const ParametricImmersion& imm :
       {make_sphere(2, 0.8).immersion, make_offcenter_sphere(1.0, Vec{{0.3, 0.0, 0.4}}),
        make_plane(2, 1, Vec{{0.0, 0.0, 0.6}}).immersion}) {
    const QuadratureGrid grid = verification_grid(imm, 6);
    const double a = xi_residual(imm, grid).residual;
    const double b = xi_residual(testing::rotated(imm, Q), grid).residual;
    CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, a));
  }
}

TEST_CASE("serial and parallel residuals agree") {
  const CatalogImmersion s = make_sphere(3, 2.0);
  const QuadratureGrid grid = verification_grid(s.immersion, 5);
  const XiResidual a = xi_residual(s.immersion, grid, {false, true});
  const XiResidual b = xi_residual(s.immersion, grid, {true, true});
  CHECK(a.residual == b.residual);
  CHECK(a.xi_max == b.xi_max);
}

TEST_CASE("conformal connection") {
  const Vec zero = Vec::Zero(3);
  const Vec a{{1.0, 2.0, -1.0}}, b{{0.5, 0.0, 2.0}};
  CHECK(conformal_shift(zero, a, b, 1).norm() == 0.0);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5; ++trial) {
    const Vec x{{nd(rng), nd(rng), nd(rng)}};
    const Vec e1{{nd(rng), nd(rng), nd(rng)}}, e2{{nd(rng), nd(rng), nd(rng)}};
    CHECK((conformal_shift(x, e1, e2, 1) - koszul_shift(x, e1, e2, 1)).norm() < 1e-6);
    // radial direction: (1/m)(<e,e> x - 2 <x,e> e)
    const Vec e = x / x.norm();
    for (int m : {1, 2}) {
      const Vec closed = (e.squaredNorm() * x - 2.0 * x.dot(e) * e) / m;
      CHECK((conformal_shift(x, e, e, m) - closed).norm() < 1e-14);
    }
  }
  CHECK(conformal_connection_check(make_sphere(2, 1.2).immersion, Vec{{1.0, 0.5}}) < 1e-6);
}

TEST_CASE("Gaussian-space mean curvature") {
  const CatalogImmersion circle = make_sphere(1, 1.0);
  const GaussianJet gc = gaussian_geometry(geometry_jet(circle.immersion, Vec::Constant(1, 0.4)));
  CHECK(gc.H_bar.norm() < 1e-9);

  const CatalogImmersion P = make_plane(2, 1, Vec::Zero(3));
  const GaussianJet gp = gaussian_geometry(geometry_jet(P.immersion, Vec{{1.0, 2.0}}));
  for (const Vec& h : gp.h_bar) CHECK(h.norm() < 1e-12);

  for (int m : {1, 2, 3}) {
    const double r = 1.7;
    const CatalogImmersion s = make_sphere(m, r);
    const GeometryJet jet = geometry_jet(s.immersion, Vec::Constant(m, 0.6));
    const GaussianJet g = gaussian_geometry(jet);
    const Vec expected = std::exp(r * r / m) * (1.0 - m / (r * r)) * jet.x;
    CHECK((g.H_bar - expected).norm() < 1e-8 * expected.norm());
    CHECK((g.H_tilde - std::exp(r * r / (2.0 * m)) * xi_vector(jet)).norm() < 1e-8 * expected.norm());
  }
}

TEST_CASE("parallelism identity holds on examples and non-examples") {
  const CatalogImmersion s = make_sphere(2, 1.0);
  const ParallelismCheck cs = modified_mcv_parallelism_check(s.immersion, verification_grid(s.immersion, 6));
  CHECK(cs.discrepancy <= 1e-6);
  CHECK(cs.euclidean_side < 1e-7);

  const ParametricImmersion ellipse = make_ellipse(2.0, 1.0);
  const ParallelismCheck ce = modified_mcv_parallelism_check(ellipse, verification_grid(ellipse, 16));
  CHECK(ce.gaussian_side > 1e-2);
  CHECK(ce.euclidean_side > 1e-2);
  CHECK(ce.discrepancy <= 1e-5);

  const CatalogImmersion line = make_plane(1, 1, Vec{{0.0, 1.0}});
  const ParallelismCheck cl = modified_mcv_parallelism_check(line.immersion, verification_grid(line.immersion, 8));
  CHECK(cl.gaussian_side / cl.max_weight < 1e-8);
  CHECK(cl.euclidean_side < 1e-8);
}

}  // TEST_SUITE
