#pragma once

// Pointwise stability operators of a xi-submanifold:
//   bundle  cal L = Lap_perp - D_perp_b,       L = cal L + <h_ij, .> h_ij + 1
//   scalar  cal L~ = Lap - grad_b,             L~ = cal L~ + 1
// with drift b = x_tan + A_xi(x_tan) and xi = H + x_perp read off the jet.

#include "xisub/immersion.hpp"

namespace xisub {

enum class OperatorMode { BundleL, BundleDrift, ScalarL, ScalarDrift };

/// Coordinates of x_tan + A_xi(x_tan), xi = H + x_perp.
Vec drift_coords(const GeometryJet& jet);

/// D_perp_b eta for coordinate vector b.
Vec normal_derivative_along(const GeometryJet& jet, const NormalField& eta, const Vec& b,
                            const fd::StepPolicy& steps = fd::default_policy());

/// sum_{ij} g^{ik} g^{jl} <h_ij, eta> h_kl
Vec curvature_term(const GeometryJet& jet, const Vec& eta);

struct StabilityOperator {
  ParametricImmersion base;
  OperatorMode mode = OperatorMode::BundleL;

  bool bundle() const {
    return mode == OperatorMode::BundleL || mode == OperatorMode::BundleDrift;
  }
  Vec apply(const NormalField& eta, const Vec& u) const;
  Vec apply(const GeometryJet& jet, const NormalField& eta) const;
  double apply(const ScalarField& phi, const Vec& u) const;
  double apply(const GeometryJet& jet, const ScalarField& phi) const;
};

/// Checks the xi-residual on a small verification grid first; throws
/// NotXiSubmanifold above residual_tol.
StabilityOperator make_stability_operator(const ParametricImmersion& base, OperatorMode mode,
                                          double residual_tol = 1e-6);

/// Same as make_stability_operator but trusts the caller.
StabilityOperator stability_operator_unchecked(const ParametricImmersion& base,
                                               OperatorMode mode);

void require_xi_submanifold(const ParametricImmersion& base, double residual_tol = 1e-6);

}  // namespace xisub
