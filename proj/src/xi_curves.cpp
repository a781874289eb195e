#include "xisub/xi_curves.hpp"

#include "xisub/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace xisub {

namespace {

using State = Eigen::Vector4d;  // x1, x2, theta, kappa

constexpr double kTwoPi = 2.0 * std::numbers::pi;

State rhs(CurveKind kind, const State& y) {
  const double c = std::cos(y[2]), s = std::sin(y[2]);
  State d;
  d[0] = c;
  d[1] = s;
  if (kind == CurveKind::Xi) {
    d[2] = y[3];
    d[3] = y[3] * (y[0] * c + y[1] * s);
  } else {
    // kappa = -<x, N>, N = (-sin, cos)
    d[2] = y[0] * s - y[1] * c;
    d[3] = 0.0;
  }
  return d;
}

void refresh_curvature(CurveKind kind, State& y) {
  if (kind == CurveKind::SelfShrinker) y[3] = y[0] * std::sin(y[2]) - y[1] * std::cos(y[2]);
}

CurveState to_curve_state(double s, const State& y) {
  CurveState out;
  out.s = s;
  out.x = Vec2(y[0], y[1]);
  out.theta = y[2];
  out.kappa = y[3];
  return out;
}

State from_curve_state(const CurveState& c) { return State(c.x[0], c.x[1], c.theta, c.kappa); }

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                 e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

struct StepResult {
  State y;
  State k_last;
  double error = 0.0;
};

StepResult dopri_step(CurveKind kind, const State& y, const State& k1, double h,
                      const CurveOptions& opt) {
  const State k2 = rhs(kind, y + h * a21 * k1);
  const State k3 = rhs(kind, y + h * (a31 * k1 + a32 * k2));
  const State k4 = rhs(kind, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const State k5 = rhs(kind, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const State k6 = rhs(kind, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  StepResult r;
  r.y = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  refresh_curvature(kind, r.y);
  r.k_last = rhs(kind, r.y);
  const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * r.k_last);
  // Euclidean on the position so that the step sequence is rotation invariant.
  const double rx = std::max(y.head<2>().norm(), r.y.head<2>().norm());
  double e = err.head<2>().norm() / (opt.atol + opt.rtol * rx);
  e = std::max(e, std::abs(err[2]) / (opt.atol + opt.rtol));
  if (kind == CurveKind::Xi) {
    const double rk = std::max(std::abs(y[3]), std::abs(r.y[3]));
    e = std::max(e, std::abs(err[3]) / (opt.atol + opt.rtol * rk));
  }
  r.error = e;
  return r;
}

Trajectory integrate(CurveKind kind, const State& y0, double C, double s_max,
                     const CurveOptions& opt) {
  if (!(s_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "s_max must be positive");
  Trajectory traj;
  traj.kind = kind;
  traj.C = C;
  traj.options = opt;
  State y = y0;
  refresh_curvature(kind, y);
  if (kind == CurveKind::SelfShrinker) traj.C = y[3] * std::exp(-0.5 * y.head<2>().squaredNorm());
  traj.nodes.push_back(to_curve_state(0.0, y));
  double s = 0.0;
  double h = std::min(opt.initial_step, s_max);
  State k1 = rhs(kind, y);
  while (s < s_max) {
    h = std::min({h, opt.max_step, s_max - s});
    if (h < 1e-12 * std::max(1.0, s)) {
      throw Error(ErrorCode::BlowUp, "step size collapsed at s = " + std::to_string(s));
    }
    const StepResult step = dopri_step(kind, y, k1, h, opt);
    if (!std::isfinite(step.error)) {
      h *= 0.2;
      ++traj.rejected_steps;
      continue;
    }
    if (step.error <= 1.0) {
      s = (s_max - s - h <= 1e-14 * s_max) ? s_max : s + h;
      y = step.y;
      k1 = step.k_last;
      traj.nodes.push_back(to_curve_state(s, y));
      if (y.head<2>().norm() > opt.blowup_radius) {
        std::ostringstream os;
        os << "|x| exceeded " << opt.blowup_radius << " at s = " << s;
        throw Error(ErrorCode::BlowUp, os.str());
      }
    } else {
      ++traj.rejected_steps;
    }
    const double factor = step.error == 0.0 ? 5.0 : 0.9 * std::pow(step.error, -0.2);
    h *= std::clamp(factor, 0.2, 5.0);
  }
  return traj;
}

}  // namespace

CurveState Trajectory::state_at(double s) const {
  if (nodes.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
  if (s < -1e-12 || s > s_max() + 1e-12) {
    throw Error(ErrorCode::OutOfDomain, "arc length outside the integrated range");
  }
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), s,
                                   [](const CurveState& c, double v) { return c.s < v; });
  std::size_t idx = static_cast<std::size_t>(it - nodes.begin());
  if (idx == nodes.size()) idx = nodes.size() - 1;
  if (idx > 0 && s - nodes[idx - 1].s < nodes[idx].s - s) --idx;
  State y = from_curve_state(nodes[idx]);
  const int substeps = 16;
  const double h = (s - nodes[idx].s) / substeps;
  if (h != 0.0) {
    for (int i = 0; i < substeps; ++i) {
      const State q1 = rhs(kind, y);
      const State q2 = rhs(kind, y + 0.5 * h * q1);
      const State q3 = rhs(kind, y + 0.5 * h * q2);
      const State q4 = rhs(kind, y + h * q3);
      y += h / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4);
      refresh_curvature(kind, y);
    }
  }
  return to_curve_state(s, y);
}

double Trajectory::first_integral(const CurveState& state) const {
  return state.kappa * std::exp(-0.5 * state.x.squaredNorm());
}

double Trajectory::max_drift() const {
  double worst = 0.0;
  for (const auto& n : nodes) worst = std::max(worst, std::abs(first_integral(n) - C));
  return worst;
}

double Trajectory::min_radius() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& n : nodes) r = std::min(r, n.x.norm());
  return r;
}

double Trajectory::max_radius() const {
  double r = 0.0;
  for (const auto& n : nodes) r = std::max(r, n.x.norm());
  return r;
}

std::string Trajectory::csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "s,x1,x2,theta,kappa_r,first_integral\n";
  for (const auto& n : nodes) {
    os << n.s << "," << n.x[0] << "," << n.x[1] << "," << n.theta << "," << n.kappa << ","
       << first_integral(n) << "\n";
  }
  return os.str();
}

ParametricImmersion Trajectory::as_immersion() const {
  const Trajectory copy = *this;
  ParametricImmersion imm(1, 1, {Axis{0.0, s_max(), false, 0.0}}, [copy](const Vec& u) {
    const CurveState c = copy.state_at(std::clamp(u[0], 0.0, copy.s_max()));
    // linear continuation past the ends keeps stencils near the boundary valid
    const double over = u[0] - std::clamp(u[0], 0.0, copy.s_max());
    const Vec2 x = c.x + over * c.tangent();
    return Vec(x);
  });
  imm.with_jacobian([copy](const Vec& u) {
       const CurveState c = copy.state_at(std::clamp(u[0], 0.0, copy.s_max()));
       return Mat(c.tangent());
     })
      .with_hessian([copy](const Vec& u) {
        const CurveState c = copy.state_at(std::clamp(u[0], 0.0, copy.s_max()));
        return std::vector<Mat>{Mat(c.kappa * c.normal())};
      });
  return imm;
}

Trajectory integrate_xi_curve(const Vec2& x0, double theta0, double C, double s_max,
                              const CurveOptions& options) {
  const State y0(x0[0], x0[1], theta0, C * std::exp(0.5 * x0.squaredNorm()));
  return integrate(CurveKind::Xi, y0, C, s_max, options);
}

Trajectory integrate_self_shrinker_curve(const Vec2& x0, double theta0, double s_max,
                                         const CurveOptions& options) {
  const State y0(x0[0], x0[1], theta0, 0.0);
  return integrate(CurveKind::SelfShrinker, y0, 0.0, s_max, options);
}

std::string to_string(ClosureStatus status) {
  switch (status) {
    case ClosureStatus::Closed:
      return "closed";
    case ClosureStatus::Open:
      return "open";
    case ClosureStatus::Inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

Closure closure_detect(const Trajectory& traj, double tol) {
  Closure out;
  if (traj.nodes.size() < 2) return out;
  const CurveState& start = traj.nodes.front();
  const Vec2 x0 = start.x;
  const Vec2 T0 = start.tangent();
  double max_kappa = 0.0;
  for (const auto& n : traj.nodes) max_kappa = std::max(max_kappa, std::abs(n.kappa));
  if (max_kappa == 0.0) {
    out.status = ClosureStatus::Open;
    return out;
  }
  const auto section = [&](double s) { return (traj.state_at(s).x - x0).dot(T0); };
  bool left = false;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < traj.nodes.size(); ++i) {
    const CurveState& a = traj.nodes[i - 1];
    const CurveState& b = traj.nodes[i];
    if (!left) {
      if ((b.x - x0).norm() > 100.0 * tol) left = true;
      continue;
    }
    const double ga = (a.x - x0).dot(T0);
    const double gb = (b.x - x0).dot(T0);
    if (!(ga < 0.0 && gb >= 0.0)) continue;
    // bracketed root of the section function
    double lo = a.s, hi = b.s, flo = ga;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = section(mid);
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    const double s_star = 0.5 * (lo + hi);
    const CurveState c = traj.state_at(s_star);
    const double gap = (c.x - x0).norm() + (c.tangent() - T0).norm();
    best_gap = std::min(best_gap, gap);
    if (gap <= tol) {
      out.status = ClosureStatus::Closed;
      out.period = s_star;
      out.rotation_number = (c.theta - start.theta) / kTwoPi;
      out.gap = gap;
      return out;
    }
  }
  out.gap = best_gap;
  return out;
}

nlohmann::json curve_summary(const Trajectory& traj, const Closure& closure) {
  nlohmann::json j;
  j["kind"] = traj.kind == CurveKind::Xi ? "xi" : "shrinker";
  j["C"] = traj.C;
  j["s_max"] = traj.s_max();
  j["nodes"] = traj.nodes.size();
  j["closure"] = to_string(closure.status);
  j["period"] = closure.period;
  j["rotation_number"] = closure.rotation_number;
  j["closure_gap"] = std::isfinite(closure.gap) ? nlohmann::json(closure.gap) : nlohmann::json(nullptr);
  j["min_radius"] = traj.min_radius();
  j["max_radius"] = traj.max_radius();
  j["first_integral_drift"] = traj.max_drift();
  return j;
}

SpaceCurve space_curve(std::function<Vec(double)> position) {
  SpaceCurve c;
  c.position = position;
  const auto as_chart = [position](const Vec& t) { return position(t[0]); };
  c.velocity = [as_chart](double t) { return fd::first(as_chart, Vec::Constant(1, t), 0); };
  c.acceleration = [as_chart](double t) {
    const Vec u = Vec::Constant(1, t);
    return fd::second(as_chart, u, 0, 0, as_chart(u));
  };
  return c;
}

namespace {

double curvature_1(const SpaceCurve& c, double t) {
  const Vec v = c.velocity(t);
  const Vec a = c.acceleration(t);
  const double speed2 = v.squaredNorm();
  return (a - (a.dot(v) / speed2) * v).norm() / speed2;
}

}  // namespace

FrenetResidual frenet_torsion_check(const SpaceCurve& curve, const std::vector<double>& grid) {
  FrenetResidual out;
  const auto k1_chart = [&curve](const Vec& t) { return curvature_1(curve, t[0]); };
  const auto acc_chart = [&curve](const Vec& t) { return curve.acceleration(t[0]); };
  for (double t : grid) {
    const Vec v = curve.velocity(t);
    const Vec a = curve.acceleration(t);
    const double speed = v.norm();
    const double k1 = curvature_1(curve, t);
    if (k1 < 1e-10) {
      throw Error(ErrorCode::FrenetDegenerate, "first curvature vanishes at t = " + std::to_string(t));
    }
    const Vec u = Vec::Constant(1, t);
    const Vec jerk = fd::first(acc_chart, u, 0);
    Mat span(v.size(), 2);
    span << v, a;
    Eigen::HouseholderQR<Mat> qr(span);
    const Mat Q = qr.householderQ() * Mat::Identity(v.size(), 2);
    const Vec perp = jerk - Q * (Q.transpose() * jerk);
    const double k1k2 = perp.norm() / (speed * speed * speed);
    const double dk1_ds = fd::first(k1_chart, u, 0) / speed;
    const Vec T = v / speed;
    out.curvature_equation = std::max(out.curvature_equation, std::abs(dk1_ds - k1 * curve.position(t).dot(T)));
    out.torsion = std::max(out.torsion, k1k2);
  }
  return out;
}

SpaceCurve embed_trajectory(const Trajectory& trajectory, int p) {
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "embedding needs p >= 1");
  const int n = 1 + p;
  const auto lift = [n](const Vec2& v) {
    Vec out = Vec::Zero(n);
    out.head<2>() = v;
    return out;
  };
  SpaceCurve c;
  c.position = [trajectory, lift](double s) { return lift(trajectory.state_at(s).x); };
  c.velocity = [trajectory, lift](double s) { return lift(trajectory.state_at(s).tangent()); };
  c.acceleration = [trajectory, lift](double s) {
    const CurveState st = trajectory.state_at(s);
    return lift(st.kappa * st.normal());
  };
  return c;
}

}  // namespace xisub
