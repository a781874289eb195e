#pragma once

// Weighted volumes V_xi = int e^{-f} dV (f = 1/2 |x - xi|^2), V_bar_xi (weight
// e^{-f_bar}, f_bar = f - 1/2 |xi|^2) and V~_xi = int e^{<x, xi>} dV, their
// first and second variations, and finite-difference oracles over the
// straight-line family F = x + psi(t) eta.

#include "xisub/catalog.hpp"
#include "xisub/immersion.hpp"
#include "xisub/kernels.hpp"
#include "xisub/quadrature.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace xisub {

struct TimeProfile {
  std::function<double(double)> psi = [](double t) { return t; };
  double d2psi0 = 0.0;  // psi''(0)

  static TimeProfile linear() { return {}; }
};

struct VariationFamily {
  PositionMap field;  // eta, R^{m+p}-valued
  bool normal = true;
  TimeProfile profile;
  /// Breakpoints of the compact-support window, one entry per chart axis.
  std::vector<AxisPanels> panels;

  bool specially_normal() const { return normal && profile.d2psi0 == 0.0; }
};

VariationFamily normal_family(const NormalField& eta, std::vector<AxisPanels> panels = {});
VariationFamily general_family(PositionMap eta, std::vector<AxisPanels> panels = {});

/// Grid with nodes_per_panel Gauss nodes in every panel of every axis.
QuadratureGrid variation_grid(const ParametricImmersion& imm, int nodes_per_panel,
                              const std::vector<AxisPanels>& panels = {});

struct WeightedVolume {
  double V = 0.0;
  double V_bar = 0.0;
  int nodes_per_panel = 0;
  bool converged = true;
};

/// Throws NonFinite if the integrand overflows.
WeightedVolume weighted_volume(const ParametricImmersion& imm, const PositionMap& xi,
                               const QuadratureGrid& grid,
                               const kernels::ExecutionPolicy& policy = {});

/// Doubles nodes per panel from `start` until successive V differ by less
/// than rel_tol relative, capped at `cap`.
WeightedVolume weighted_volume_refined(const ParametricImmersion& imm, const PositionMap& xi,
                                       const std::vector<AxisPanels>& panels = {},
                                       int start = 12, int cap = 96, double rel_tol = 1e-10,
                                       const kernels::ExecutionPolicy& policy = {});

struct FirstVariation {
  double V = 0.0;
  double V_bar = 0.0;
};

/// Analytic first variation at t = 0.  Normal families use the normal
/// integrand; general ones add the gradient of <x, xi> - 1/2|xi|^2 (resp.
/// <x, xi> for V_bar).
FirstVariation first_variation(const ParametricImmersion& imm, const PositionMap& xi,
                               const VariationFamily& fam, const QuadratureGrid& grid,
                               const kernels::ExecutionPolicy& policy = {});

/// Central difference at t and t/2 with Richardson extrapolation.  Throws
/// StepTooLarge if x + psi(t) eta loses rank on the grid.
FirstVariation first_variation_fd(const ParametricImmersion& imm, const PositionMap& xi,
                                  const VariationFamily& fam, const QuadratureGrid& grid,
                                  double step = 1e-3,
                                  const kernels::ExecutionPolicy& policy = {});

/// Q(eta, eta) = -int <L eta, eta> e^{-f} dV.  Throws NotXiSubmanifold when
/// the xi-residual of imm exceeds 1e-6 (skipped if check is false).
double second_variation(const ParametricImmersion& imm, const PositionMap& xi,
                        const NormalField& eta, const QuadratureGrid& grid,
                        const kernels::ExecutionPolicy& policy = {}, bool check = true);

/// Q(eta1, eta2) = -int <L eta1, eta2> e^{-f} dV (strong form, not symmetrized).
double second_variation_bilinear(const ParametricImmersion& imm, const PositionMap& xi,
                                 const NormalField& eta1, const NormalField& eta2,
                                 const QuadratureGrid& grid,
                                 const kernels::ExecutionPolicy& policy = {});

/// int (|D_perp eta|^2 - sum <h_ij, eta>^2 - |eta|^2) e^{-f} dV.
double second_variation_weak(const ParametricImmersion& imm, const PositionMap& xi,
                             const NormalField& eta, const QuadratureGrid& grid,
                             const kernels::ExecutionPolicy& policy = {});

/// Second central difference of V_xi along an SN family, Richardson-extrapolated.
double second_variation_fd(const ParametricImmersion& imm, const PositionMap& xi,
                           const VariationFamily& fam, const QuadratureGrid& grid,
                           double step = 1e-2, const kernels::ExecutionPolicy& policy = {});

/// defect_a = int <eta, e_a> e^{-f} dV.  Throws NoParallelFrame on an empty frame.
std::vector<double> vp_defect(const ParametricImmersion& imm, const PositionMap& xi,
                              const NormalField& eta, const std::vector<NormalField>& frame,
                              const QuadratureGrid& grid,
                              const kernels::ExecutionPolicy& policy = {});

/// eta - sum_a (defect_a / V_xi) e_a, for an orthonormal parallel frame.
NormalField vp_project(const ParametricImmersion& imm, const PositionMap& xi,
                       const NormalField& eta, const std::vector<NormalField>& frame,
                       const QuadratureGrid& grid,
                       const kernels::ExecutionPolicy& policy = {});

struct PmcSuite {
  double V_tilde = 0.0;
  double first = 0.0;
  double first_fd = 0.0;
  double second = 0.0;
  double second_fd = 0.0;
  double mean_curvature_gap = 0.0;  // sup |H - xi| on the grid
  bool has_second = false;
};

/// V~_xi and its variations along eta.  The second variation is evaluated
/// only when H = xi on the grid (to 1e-8).  Throws NonFinite on overflow.
PmcSuite pmc_functional_suite(const ParametricImmersion& imm, const PositionMap& xi,
                              const NormalField& eta, const QuadratureGrid& grid,
                              const kernels::ExecutionPolicy& policy = {});

/// (1 - s^2)^5 on [-1, 1], zero outside; C^4 at the ends.
double bump(double s);

struct CompactField {
  NormalField field;
  std::vector<AxisPanels> panels;
};

/// eta = window(u) * P_perp V(x(u)) with V a random ambient polynomial field
/// of degree <= 2.  The window acts on the flat axes of the item only.
CompactField random_compact_normal_field(const CatalogImmersion& item, std::uint64_t seed);

struct CompactScalar {
  ScalarField field;
  std::vector<AxisPanels> panels;
};

/// window(u) * (random quadratic polynomial of x(u)).
CompactScalar random_compact_scalar(const CatalogImmersion& item, std::uint64_t seed);

}  // namespace xisub
