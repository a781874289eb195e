#pragma once

// Stability analysis of xi-submanifolds: operator identities, Galerkin
// spectra in the weighted space L^2(e^{-f} dV), Hermite polynomials of the
// Ornstein-Uhlenbeck operator, closed-form sphere index, instability witnesses
// and the height-function identities.

#include "xisub/catalog.hpp"
#include "xisub/functionals.hpp"
#include "xisub/kernels.hpp"
#include "xisub/quadrature.hpp"
#include "xisub/stability_operator.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace xisub {

// ---- pointwise and integral identities ----

/// sup over the grid of |L(phi eta) - (L~_drift phi) eta - phi L eta - 2 D_perp_{grad phi} eta|.
double product_rule_check(const ParametricImmersion& base, const ScalarField& phi,
                          const NormalField& eta, const QuadratureGrid& grid,
                          const kernels::ExecutionPolicy& policy = {});

struct IntegralGap {
  double lhs = 0.0;
  double rhs = 0.0;
  double scale = 0.0;  // sum of the absolute integrands
  double gap() const { return std::abs(lhs - rhs); }
};

/// int <eta1, cal L eta2> e^{-f} vs -int <D_perp eta1, D_perp eta2> e^{-f}.
IntegralGap integration_by_parts_check(const ParametricImmersion& base, const PositionMap& xi,
                                       const NormalField& eta1, const NormalField& eta2,
                                       const QuadratureGrid& grid,
                                       const kernels::ExecutionPolicy& policy = {});
/// Scalar version with cal L~.
IntegralGap integration_by_parts_check(const ParametricImmersion& base, const PositionMap& xi,
                                       const ScalarField& phi1, const ScalarField& phi2,
                                       const QuadratureGrid& grid,
                                       const kernels::ExecutionPolicy& policy = {});

/// int <phi eta, L(phi eta)> e^{-f} vs int phi^2 <eta, L eta> e^{-f} - int |grad phi|^2 |eta|^2 e^{-f}.
IntegralGap cutoff_identity_check(const ParametricImmersion& base, const PositionMap& xi,
                                  const ScalarField& phi, const NormalField& eta,
                                  const QuadratureGrid& grid,
                                  const kernels::ExecutionPolicy& policy = {});

struct HeightIdentities {
  double vn_defect = 0.0;     // sup |L~_drift <v,N> + <A_N, A_{v_perp}> - <A_N v_tan, A_xi x_tan>|
  double lvbot_defect = 0.0;  // sup |L(v_perp) - v_perp - h(A_xi x_tan, v_tan)|
  double condition_a = 0.0;   // sup |h(A_xi x_tan, v_tan)|
  bool condition_a_holds = false;
};

/// Throws NotXiSubmanifold if base fails the xi-residual check.
HeightIdentities height_identities(const ParametricImmersion& base, const Vec& v,
                                   const NormalField& N, const QuadratureGrid& grid,
                                   const kernels::ExecutionPolicy& policy = {});

// ---- Galerkin spectra ----

struct GalerkinBasis {
  std::string description;
  std::vector<std::string> labels;
  std::vector<ScalarField> scalars;  // used by scalar operators
  std::vector<NormalField> normals;  // used by bundle operators

  bool normal() const { return !normals.empty(); }
  std::size_t size() const { return normal() ? normals.size() : scalars.size(); }
};

struct SpectralProblem {
  ParametricImmersion base;
  PositionMap xi;
  OperatorMode mode = OperatorMode::BundleL;
  GalerkinBasis basis;
  QuadratureGrid grid;
  /// Weighted-orthogonality constraints (parallel normal fields for VP).
  bool vp = false;
  GalerkinBasis constraints;
};

/// G_ab = int <b_a, b_b> e^{-f} and K_ab = -int <b_a, op b_b> e^{-f} in weak form.
struct Assembly {
  Mat G;
  Mat K;
};

Assembly assemble_serial(const SpectralProblem& problem);
Assembly assemble_parallel(const SpectralProblem& problem, bool reproducible = true);
Assembly assemble(const SpectralProblem& problem, const kernels::ExecutionPolicy& policy = {});

struct Spectrum {
  std::vector<double> eigenvalues;  // ascending
  Mat vectors;                      // coefficient vectors, one per column
  Mat G;
  Mat K;
  double gram_condition = 0.0;
  double symmetry_defect = 0.0;  // max |K - K^T| / max |K|
  double max_residual = 0.0;     // max |K v - lambda G v|_inf / |v|
  int constrained_dimension = 0;

  int negative_count(double tol = 1e-7) const;
  nlohmann::json to_json() const;
};

/// Ascending eigenvalues of K v = lambda G v; with vp set, restricted to the
/// coefficient subspace weighted-orthogonal to the constraints.  Throws
/// IllConditionedBasis if cond(G) > 1e8.
Spectrum galerkin_spectrum(const SpectralProblem& problem,
                           const kernels::ExecutionPolicy& policy = {});

// Bases.
GalerkinBasis hermite_scalar_basis(int m, int max_degree);
GalerkinBasis fourier_scalar_basis(int max_mode);
/// Real spherical harmonics in (polar, azimuth) coordinates, unit L^2 norm.
GalerkinBasis spherical_harmonic_basis(int max_degree);
/// scalar basis times each of the given normal fields.
GalerkinBasis tensor_basis(const GalerkinBasis& scalars, const std::vector<NormalField>& normals);
GalerkinBasis constraint_basis(const std::vector<NormalField>& frame);

/// Bundle problem for S^m(r), m in {1, 2}, with codimension p.
SpectralProblem sphere_problem(int m, int p, double r, bool vp, int max_degree);
/// Scalar -L~ on P^m with Hermite products; chart box [-16, 16]^m.
SpectralProblem plane_scalar_problem(int m, int max_degree);

// ---- Hermite polynomials ----

using HermiteIndex = std::vector<int>;

/// Probabilists' Hermite He_n(u); throws DegreeTooLarge for n > 30.
double hermite(int n, double u);
/// H_{n_1...n_m}(u) = prod He_{n_i}(u^i).
double hermite_eval(const HermiteIndex& idx, const Vec& u);
/// sup over nodes of |(-Lap + u . grad) H - |n| H| / (1 + |n| |H|), derivatives from the recurrence.
double ou_eigen_check(const HermiteIndex& idx, const QuadratureGrid& grid);
/// All multi-indices of m entries with total degree <= d, graded order.
std::vector<HermiteIndex> multi_indices(int m, int max_degree);
/// max over a != b of |<H_a, H_b>_w| / sqrt(<H_a,H_a>_w <H_b,H_b>_w), Gaussian weight on R^m.
double hermite_orthogonality_defect(int m, int max_degree);
/// Weighted L^2 residual of projecting phi onto Hermite degree <= d, for d = 0..max_degree.
std::vector<double> hermite_projection_residuals(const ScalarField& phi, int m, int max_degree);

// ---- sphere index ----

struct SphereBand {
  std::string band;  // "radial" or "transverse"
  int k = 0;
  long multiplicity = 0;
  double value = 0.0;
};

struct SphereIndex {
  int index = 0;
  std::vector<SphereBand> bands;
};

/// Spherical-harmonic multiplicity N(m, k) = C(m+k, m) - C(m+k-2, m).
long harmonic_multiplicity(int m, int k);

/// Closed-form eigenvalues of -L on S^m(r) in R^{m+p}, bands up to k_max.
SphereIndex sphere_index(int m, int p, double r, bool vp, int k_max = 12);

/// CSV rows "band,k,multiplicity,value".
std::string bands_csv(const SphereIndex& index);

// ---- instability witnesses ----

enum class WitnessKind { PlaneCutoff, SphereRadial, ParallelNormal };

struct WitnessParams {
  int m = 2;
  int p = 1;
  double r = 1.0;        // sphere radius
  double R = 10.0;       // plane cutoff radius
  std::size_t frame_index = 0;
};

struct Witness {
  double Q = 0.0;
  double V = 0.0;
  double threshold = -1.0;  // plane cutoff: smallest scanned R with Q < 0
};

/// sphere_radial: S^m(r) with eta = x.  parallel_normal: the cylinder
/// S^1(r) x P^1 with eta = frame field frame_index.  plane_cutoff: P^m with
/// eta = phi_R N.
Witness instability_witness(WitnessKind kind, const WitnessParams& params);

/// Radial cutoff: 1 on |u| <= R, 0 beyond R + 2, |grad| <= 15/16.
double radial_cutoff(double rho, double R);

/// After vp_project, min over Hermite-basis fields eta = He_n N (|n| <= d) of
/// Q(eta, eta) / |eta|^2_w on P^m.
struct WStability {
  double min_ratio = 0.0;
  std::size_t fields = 0;
  double unconstrained_min = 0.0;  // same without projection
};
WStability plane_w_stability(int m, int max_degree);

}  // namespace xisub
