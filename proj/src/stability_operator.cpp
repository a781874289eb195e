#include "xisub/stability_operator.hpp"

#include "xisub/error.hpp"
#include "xisub/xi_equation.hpp"

#include <sstream>

namespace xisub {

Vec drift_coords(const GeometryJet& jet) {
  const Vec t = jet.tangent_coords(jet.x_tan);
  return t + weingarten_map(jet, jet.mean_curvature + jet.x_perp) * t;
}

Vec normal_derivative_along(const GeometryJet& jet, const NormalField& eta, const Vec& b,
                            const fd::StepPolicy& steps) {
  Vec out = Vec::Zero(jet.ambient_dim());
  for (int i = 0; i < jet.dim(); ++i) {
    if (b[i] == 0.0) continue;
    out += b[i] * normal_derivative(jet, eta, i, steps);
  }
  return out;
}

Vec curvature_term(const GeometryJet& jet, const Vec& eta) {
  const int m = jet.dim();
  Mat S(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) S(i, j) = jet.h(i, j).dot(eta);
  // raise both indices
  const Mat R = jet.metric_inv * S * jet.metric_inv;
  Vec out = Vec::Zero(jet.ambient_dim());
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l) out += R(k, l) * jet.h(k, l);
  return out;
}

Vec StabilityOperator::apply(const GeometryJet& jet, const NormalField& eta) const {
  if (!bundle()) throw Error(ErrorCode::InvalidArgument, "scalar operator applied to a normal field");
  const fd::StepPolicy& steps = base.steps();
  Vec out = bundle_laplacian(jet, eta, steps) -
            normal_derivative_along(jet, eta, drift_coords(jet), steps);
  if (mode == OperatorMode::BundleL) {
    const Vec v = eta(jet.u);
    out += curvature_term(jet, v) + v;
  }
  return out;
}

Vec StabilityOperator::apply(const NormalField& eta, const Vec& u) const {
  return apply(geometry_jet(base, u), eta);
}

double StabilityOperator::apply(const GeometryJet& jet, const ScalarField& phi) const {
  if (bundle()) throw Error(ErrorCode::InvalidArgument, "bundle operator applied to a scalar");
  const fd::StepPolicy& steps = base.steps();
  Vec d(jet.dim());
  for (int i = 0; i < jet.dim(); ++i) d[i] = fd::first(phi, jet.u, i, steps.first);
  double out = laplace_beltrami(jet, phi, steps) - d.dot(drift_coords(jet));
  if (mode == OperatorMode::ScalarL) out += phi(jet.u);
  return out;
}

double StabilityOperator::apply(const ScalarField& phi, const Vec& u) const {
  return apply(geometry_jet(base, u), phi);
}

void require_xi_submanifold(const ParametricImmersion& base, double residual_tol) {
  const XiResidual r = xi_residual(base, verification_grid(base, 6));
  if (!(r.residual <= residual_tol)) {
    std::ostringstream os;
    os << "xi-residual " << r.residual << " exceeds " << residual_tol;
    throw Error(ErrorCode::NotXiSubmanifold, os.str());
  }
}

StabilityOperator make_stability_operator(const ParametricImmersion& base, OperatorMode mode,
                                          double residual_tol) {
  require_xi_submanifold(base, residual_tol);
  return StabilityOperator{base, mode};
}

StabilityOperator stability_operator_unchecked(const ParametricImmersion& base,
                                               OperatorMode mode) {
  return StabilityOperator{base, mode};
}

}  // namespace xisub
