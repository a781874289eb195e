#pragma once

// Planar xi-curves (kappa' = kappa <x, T>, first integral kappa e^{-|x|^2/2} = C)
// and self-shrinker curves (kappa = -<x, N>, N the left normal of T), integrated
// in the heading-angle formulation with an embedded Dormand-Prince 5(4) pair.

#include "xisub/immersion.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace xisub {

using Vec2 = Eigen::Vector2d;

struct CurveState {
  double s = 0.0;
  Vec2 x = Vec2::Zero();
  double theta = 0.0;
  double kappa = 0.0;  // signed curvature relative to the left normal

  Vec2 tangent() const { return {std::cos(theta), std::sin(theta)}; }
  Vec2 normal() const { return {-std::sin(theta), std::cos(theta)}; }
};

enum class CurveKind { Xi, SelfShrinker };

struct CurveOptions {
  double atol = 1e-10;
  double rtol = 1e-10;
  double blowup_radius = 6.0;
  double initial_step = 1e-3;
  double max_step = 0.05;
};

class Trajectory {
 public:
  CurveKind kind = CurveKind::Xi;
  double C = 0.0;  // first-integral constant
  std::vector<CurveState> nodes;
  CurveOptions options;
  int rejected_steps = 0;

  double s_max() const { return nodes.empty() ? 0.0 : nodes.back().s; }
  /// State at arc length s, by classical RK4 substeps from the nearest node.
  CurveState state_at(double s) const;
  double first_integral(const CurveState& state) const;
  /// sup over nodes of |kappa e^{-|x|^2/2} - C|
  double max_drift() const;
  double min_radius() const;
  double max_radius() const;
  bool degenerate() const { return C == 0.0; }

  /// Columns s, x1, x2, theta, kappa_r, first_integral.
  std::string csv() const;
  /// The polyline as a 1-dimensional immersion in R^2 over [0, s_max].
  ParametricImmersion as_immersion() const;
};

/// Starts with kappa = C e^{|x0|^2/2}.  Throws BlowUp when |x| passes the
/// guard radius or the step size collapses.
Trajectory integrate_xi_curve(const Vec2& x0, double theta0, double C, double s_max,
                              const CurveOptions& options = {});

Trajectory integrate_self_shrinker_curve(const Vec2& x0, double theta0, double s_max,
                                         const CurveOptions& options = {});

enum class ClosureStatus { Closed, Open, Inconclusive };

std::string to_string(ClosureStatus status);

struct Closure {
  ClosureStatus status = ClosureStatus::Inconclusive;
  double period = 0.0;
  double rotation_number = 0.0;  // total turning over one period / 2 pi
  double gap = 0.0;              // |x(period) - x0| + |T(period) - T0|
};

/// Looks for returns of (x, T) to the initial state through the section
/// <x - x0, T0> = 0 crossed from negative to positive.  A curve with no
/// curvature never closes (Open); otherwise no return within s_max is
/// Inconclusive.
Closure closure_detect(const Trajectory& trajectory, double tol = 1e-6);

nlohmann::json curve_summary(const Trajectory& trajectory, const Closure& closure);

/// A parametrized space curve with derivatives up to second order.
struct SpaceCurve {
  std::function<Vec(double)> position;
  std::function<Vec(double)> velocity;
  std::function<Vec(double)> acceleration;
};

/// Finite-difference derivatives for a position-only curve.
SpaceCurve space_curve(std::function<Vec(double)> position);

struct FrenetResidual {
  double curvature_equation = 0.0;  // sup |dkappa_1/ds - kappa_1 <c, T>|
  double torsion = 0.0;             // sup |kappa_1 kappa_2|
};

/// Throws FrenetDegenerate where kappa_1 vanishes.
FrenetResidual frenet_torsion_check(const SpaceCurve& curve, const std::vector<double>& grid);

/// Planar trajectory embedded in R^{1+p} (p >= 1) with exact first and second derivatives.
SpaceCurve embed_trajectory(const Trajectory& trajectory, int p = 2);

}  // namespace xisub
