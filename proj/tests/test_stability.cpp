#include "helpers.hpp"

#include "xisub/catalog.hpp"
#include "xisub/error.hpp"
#include "xisub/stability.hpp"

#include <doctest.h>

#include <numbers>

using namespace xisub;

namespace {

constexpr double kPi = std::numbers::pi;

NormalField position_field(const ParametricImmersion& imm) {
  NormalField f;
  f.value = [imm](const Vec& u) { return imm.position(u); };
  return f;
}

NormalField constant_field(const Vec& v) {
  NormalField f;
  f.value = [v](const Vec&) { return v; };
  f.parallel = true;
  return f;
}

}  // namespace

TEST_SUITE("stability") {

TEST_CASE("stability operator closed forms") {
  for (int m : {1, 2}) {
    const double r = 1.4;
    const CatalogImmersion s = make_sphere(m, r);
    const StabilityOperator L = make_stability_operator(s.immersion, OperatorMode::BundleL);
    const NormalField x = position_field(s.immersion);
    for (const Vec& u : verification_grid(s.immersion, 3).nodes)
      CHECK((L.apply(x, u) - (m + r * r) / (r * r) * s.immersion.position(u)).norm() < 1e-7);
  }
  const CatalogImmersion P = make_plane(2, 1, Vec::Zero(3));
  const StabilityOperator LP = make_stability_operator(P.immersion, OperatorMode::BundleL);
  const Vec e3{{0.0, 0.0, 1.0}};
  CHECK((LP.apply(constant_field(e3), Vec{{2.0, -1.0}}) - e3).norm() < 1e-9);

  CHECK_THROWS_AS(make_stability_operator(make_ellipse(2.0, 1.0), OperatorMode::BundleL), Error);
}

TEST_CASE("product rule") {
  const double r = 1.3;
  const CatalogImmersion s = make_sphere(2, r);
  const QuadratureGrid grid = verification_grid(s.immersion, 4);
  const ScalarField one = [](const Vec&) { return 1.0; };
  CHECK(product_rule_check(s.immersion, one, s.parallel_frame[0], grid) < 1e-7);
  const ScalarField height = [imm = s.immersion](const Vec& u) { return imm.position(u)[2]; };
  CHECK(product_rule_check(s.immersion, height, s.parallel_frame[0], grid) <= 1e-6);

  const CatalogImmersion c = make_sphere(1, 0.9);
  const ScalarField b = [](const Vec& u) { return bump(std::sin(u[0])); };
  CHECK(product_rule_check(c.immersion, b, position_field(c.immersion), verification_grid(c.immersion, 12)) <= 1e-6);
}

TEST_CASE("integration by parts") {
  const CatalogImmersion P = make_plane(1, 1, Vec::Zero(2));
  const CompactField f = random_compact_normal_field(P, 8);
  const QuadratureGrid grid = variation_grid(P.immersion, 32, f.panels);
  const IntegralGap g = integration_by_parts_check(P.immersion, P.xi, f.field, f.field, grid);
  CHECK(g.gap() <= 1e-6 * std::max(1.0, g.scale));

  const CatalogImmersion s = make_sphere(2, 1.1);
  const CompactField h = random_compact_normal_field(s, 3);
  const QuadratureGrid sg = variation_grid(s.immersion, 20);
  const IntegralGap par = integration_by_parts_check(s.immersion, s.xi, h.field, s.parallel_frame[0], sg);
  CHECK(std::abs(par.lhs) < 1e-7);
  CHECK(std::abs(par.rhs) < 1e-7);

  const CompactScalar phi = random_compact_scalar(P, 5);
  const QuadratureGrid pg = variation_grid(P.immersion, 32, phi.panels);
  const IntegralGap sgap = integration_by_parts_check(P.immersion, P.xi, phi.field, phi.field, pg);
  CHECK(sgap.gap() <= 1e-6 * std::max(1.0, sgap.scale));
}

TEST_CASE("cutoff identity") {
  const CatalogImmersion P = make_plane(1, 1, Vec{{0.0, 0.4}});
  const CompactScalar phi = random_compact_scalar(P, 6);
  const QuadratureGrid grid = variation_grid(P.immersion, 32, phi.panels);
  const IntegralGap g = cutoff_identity_check(P.immersion, P.xi, phi.field, P.parallel_frame[0], grid);
  CHECK(g.gap() <= 1e-6 * std::max(1.0, g.scale));
}

TEST_CASE("height identities") {
  const CatalogImmersion P = make_plane(2, 1, Vec::Zero(3));
  const HeightIdentities hp =
      height_identities(P.immersion, Vec{{0.3, -1.0, 2.0}}, P.parallel_frame[0], verification_grid(P.immersion, 4));
  CHECK(hp.vn_defect < 1e-8);
  CHECK(hp.condition_a_holds);

  const CatalogImmersion s = make_sphere(2, 1.6);
  const HeightIdentities hs =
      height_identities(s.immersion, Vec{{1.0, 2.0, -0.5}}, s.parallel_frame[0], verification_grid(s.immersion, 4));
  CHECK(hs.condition_a_holds);
  CHECK(hs.condition_a < 1e-10);
  CHECK(hs.lvbot_defect <= 1e-6);

  const CatalogImmersion cyl = make_product(make_sphere(1, 1.5), make_plane(1, 0, Vec::Zero(1)));
  const HeightIdentities hc =
      height_identities(cyl.immersion, Vec{{0.4, -0.7, 1.1}}, cyl.parallel_frame[0], verification_grid(cyl.immersion, 5));
  CHECK(hc.vn_defect <= 1e-6);
  CHECK(hc.lvbot_defect <= 1e-6);
}

TEST_CASE("Hermite polynomials") {
  for (double u : {-1.3, 0.0, 0.7, 2.5}) {
    CHECK(hermite(0, u) == 1.0);
    CHECK(hermite(1, u) == u);
    CHECK(hermite(3, u) == doctest::Approx(u * u * u - 3.0 * u));
    CHECK(hermite(4, u) == doctest::Approx(std::pow(u, 4) - 6.0 * u * u + 3.0));
  }
  CHECK(hermite_eval({1, 2}, Vec{{0.5, 2.0}}) == doctest::Approx(0.5 * 3.0));
  try {
    hermite(31, 0.1);
    FAIL("expected DegreeTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegreeTooLarge);
  }
  const QuadratureGrid grid = tensor_grid(Box(2, Axis{-3.0, 3.0, false, 0.0}), {6, 6});
  CHECK(ou_eigen_check({1, 2}, grid) < 1e-12);
  CHECK(multi_indices(2, 2).size() == 6);
  CHECK(multi_indices(3, 6).size() == 84);
  CHECK(hermite_orthogonality_defect(2, 6) < 1e-8);

  // projecting a polynomial of degree 3 leaves no residual from degree 3 on
  const ScalarField cubic = [](const Vec& u) { return u[0] * u[0] * u[0] - u[0] + 2.0; };
  const auto res = hermite_projection_residuals(cubic, 1, 5);
  CHECK(res[2] > 1e-3);
  CHECK(res[3] < 1e-10);
  CHECK(res[5] < 1e-10);
}

TEST_CASE("Galerkin spectra") {
  const Spectrum p1 = galerkin_spectrum(plane_scalar_problem(1, 5));
  REQUIRE(p1.eigenvalues.size() == 6);
  for (int n = 0; n < 6; ++n) CHECK(p1.eigenvalues[n] == doctest::Approx(n - 1.0).epsilon(1e-6));
  CHECK(p1.symmetry_defect < 1e-10);

  const double r = 1.7;
  const CatalogImmersion circle = make_sphere(1, r);
  SpectralProblem pb{circle.immersion, circle.xi, OperatorMode::ScalarL, fourier_scalar_basis(4),
                     variation_grid(circle.immersion, 32), false, {}};
  const Spectrum sc = galerkin_spectrum(pb);
  std::vector<double> expected{-1.0};
  for (int k = 1; k <= 4; ++k) expected.insert(expected.end(), 2, k * k / (r * r) - 1.0);
  std::sort(expected.begin(), expected.end());
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(sc.eigenvalues[i] == doctest::Approx(expected[i]).epsilon(1e-9));

  const Spectrum vp = galerkin_spectrum(sphere_problem(1, 1, 1.0, true, 6));
  CHECK(vp.eigenvalues[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(vp.eigenvalues[1] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(vp.eigenvalues[2] > -0.5);
}

TEST_CASE("serial and parallel assembly") {
  const SpectralProblem pb = sphere_problem(2, 1, 1.2, true, 3);
  const Assembly a = assemble_serial(pb);
  const Assembly b = assemble_parallel(pb, true);
  const Assembly c = assemble_parallel(pb, true);
  CHECK((a.G - b.G).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((a.K - b.K).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((b.G - c.G).cwiseAbs().maxCoeff() == 0.0);
  CHECK((b.K - c.K).cwiseAbs().maxCoeff() == 0.0);
  const Assembly d = assemble_parallel(pb, false);
  CHECK((a.K - d.K).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ill-conditioned bases are rejected") {
  SpectralProblem pb = plane_scalar_problem(1, 2);
  pb.basis.scalars.push_back(pb.basis.scalars.front());
  pb.basis.labels.push_back("duplicate");
  try {
    galerkin_spectrum(pb);
    FAIL("expected IllConditionedBasis");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IllConditionedBasis);
  }
}

TEST_CASE("sphere index") {
  CHECK(harmonic_multiplicity(2, 0) == 1);
  CHECK(harmonic_multiplicity(2, 3) == 7);
  CHECK(harmonic_multiplicity(1, 4) == 2);
  CHECK(harmonic_multiplicity(3, 2) == 9);
  CHECK(sphere_index(2, 1, 1.0, true).index == 3);
  CHECK(sphere_index(1, 1, 2.0, true).index == 4);
  // r^2 = m + 2 is the p = 1 threshold: the k = 2 band reaches zero
  CHECK(sphere_index(2, 1, 2.0, true).index == 3);
  CHECK(sphere_index(2, 1, 2.1, true).index > 3);
  for (int m : {1, 2})
    for (double r : {0.8, 2.0}) {
      const Spectrum s = galerkin_spectrum(sphere_problem(m, 1, r, true, m == 1 ? 12 : 6));
      CHECK(s.negative_count() == sphere_index(m, 1, r, true).index);
    }
  CHECK(bands_csv(sphere_index(1, 1, 1.0, true)).rfind("band,k,multiplicity,value\n", 0) == 0);
}

TEST_CASE("instability witnesses") {
  WitnessParams params;
  params.m = 1;
  params.r = 1.0;
  const Witness radial = instability_witness(WitnessKind::SphereRadial, params);
  CHECK(radial.Q == doctest::Approx(-2.0 * 2.0 * kPi * std::exp(-0.5)).epsilon(1e-8));

  params.frame_index = 1;
  const Witness parallel = instability_witness(WitnessKind::ParallelNormal, params);
  CHECK(parallel.Q == doctest::Approx(-parallel.V).epsilon(1e-8));

  params.m = 2;
  params.R = 10.0;
  const Witness cutoff = instability_witness(WitnessKind::PlaneCutoff, params);
  CHECK(cutoff.Q < 0.0);
  CHECK(cutoff.threshold >= 0.0);

  CHECK(radial_cutoff(3.0, 4.0) == 1.0);
  CHECK(radial_cutoff(6.0, 4.0) == 0.0);
  CHECK(radial_cutoff(5.0, 4.0) == doctest::Approx(0.5));
  double slope = 0.0;
  for (double s = 4.0; s < 6.0; s += 0.01) slope = std::max(slope, std::abs(radial_cutoff(s + 1e-6, 4.0) - radial_cutoff(s, 4.0)) / 1e-6);
  CHECK(slope <= 15.0 / 16.0 + 1e-6);
}

TEST_CASE("W-stability of the line") {
  const WStability w = plane_w_stability(1, 6);
  CHECK(w.min_ratio >= -1e-8);
  CHECK(w.unconstrained_min < 0.0);
}

}  // TEST_SUITE
