#include "xisub/functionals.hpp"

#include "xisub/error.hpp"
#include "xisub/stability_operator.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace xisub {

namespace {

enum class Weight { Gaussian, GaussianBar, Exponential };

double weight_exponent(Weight kind, const Vec& x, const Vec& xi) {
  switch (kind) {
    case Weight::Gaussian:
      return -0.5 * (x - xi).squaredNorm();
    case Weight::GaussianBar:
      return -0.5 * (x - xi).squaredNorm() + 0.5 * xi.squaredNorm();
    case Weight::Exponential:
      return x.dot(xi);
  }
  return 0.0;
}

double checked_exp(double exponent) {
  const double v = std::exp(exponent);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "weight e^" << exponent << " overflows";
    throw Error(ErrorCode::NonFinite, os.str());
  }
  return v;
}

// Per-node data for evaluating a functional along x + psi(t) eta.
struct NodeState {
  Vec x;
  Vec xi;
  Vec eta;
  Mat J;
  Mat dEta;
  double w = 0.0;
  double det0 = 0.0;
};

std::vector<NodeState> node_states(const ParametricImmersion& imm, const PositionMap& xi,
                                   const VariationFamily& fam, const QuadratureGrid& grid,
                                   const kernels::ExecutionPolicy& policy) {
  std::vector<NodeState> out(grid.size());
  kernels::for_each_index(
      grid.size(),
      [&](std::size_t k) {
        const Vec& u = grid.nodes[k];
        NodeState& s = out[k];
        s.x = imm.position(u);
        s.xi = xi(u);
        s.eta = fam.field(u);
        s.J = imm.jacobian(u);
        s.dEta.resize(s.x.size(), imm.dim());
        for (int i = 0; i < imm.dim(); ++i)
          s.dEta.col(i) = fd::first(fam.field, u, i, imm.steps().first);
        s.w = grid.weights[k];
        s.det0 = (s.J.transpose() * s.J).determinant();
      },
      policy);
  return out;
}

double functional_at(const std::vector<NodeState>& states, double psi, Weight kind,
                     const kernels::ExecutionPolicy& policy) {
  return kernels::reduce_sum(
      states.size(),
      [&](std::size_t k) {
        const NodeState& s = states[k];
        const Vec F = s.x + psi * s.eta;
        const Mat JF = s.J + psi * s.dEta;
        const double det = (JF.transpose() * JF).determinant();
        if (!(det > 1e-8 * s.det0)) {
          std::ostringstream os;
          os << "variation loses rank at psi = " << psi;
          throw Error(ErrorCode::StepTooLarge, os.str());
        }
        const double value = s.w * std::sqrt(det) * checked_exp(weight_exponent(kind, F, s.xi));
        if (!std::isfinite(value)) throw Error(ErrorCode::NonFinite, "non-finite integrand");
        return value;
      },
      policy);
}

double first_difference(const std::vector<NodeState>& states, const TimeProfile& profile,
                        double t, Weight kind, const kernels::ExecutionPolicy& policy) {
  const auto D = [&](double h) {
    return (functional_at(states, profile.psi(h), kind, policy) -
            functional_at(states, profile.psi(-h), kind, policy)) /
           (2.0 * h);
  };
  return (4.0 * D(0.5 * t) - D(t)) / 3.0;
}

double second_difference(const std::vector<NodeState>& states, const TimeProfile& profile,
                         double t, Weight kind, const kernels::ExecutionPolicy& policy) {
  const double v0 = functional_at(states, profile.psi(0.0), kind, policy);
  const auto S = [&](double h) {
    return (functional_at(states, profile.psi(h), kind, policy) - 2.0 * v0 +
            functional_at(states, profile.psi(-h), kind, policy)) /
           (h * h);
  };
  return (4.0 * S(0.5 * t) - S(t)) / 3.0;
}

// Integrates term(jet, k) * sqrt(g) * w over the grid.
template <class Term>
double integrate_jets(const ParametricImmersion& imm, const QuadratureGrid& grid, Term&& term,
                      const kernels::ExecutionPolicy& policy) {
  return kernels::reduce_sum(
      grid.size(),
      [&](std::size_t k) {
        const GeometryJet jet = geometry_jet(imm, grid.nodes[k], JetOptions{0.0, true});
        const double value = grid.weights[k] * jet.volume_density * term(jet);
        if (!std::isfinite(value)) throw Error(ErrorCode::NonFinite, "non-finite integrand");
        return value;
      },
      policy);
}

Vec random_vector(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = U(rng);
  return v;
}

struct Window {
  std::vector<int> axes;
  std::vector<double> center;
  std::vector<double> half_width;

  double operator()(const Vec& u) const {
    double w = 1.0;
    for (std::size_t a = 0; a < axes.size(); ++a)
      w *= bump((u[axes[a]] - center[a]) / half_width[a]);
    return w;
  }
};

Window random_window(const CatalogImmersion& item, std::mt19937_64& rng,
                     std::vector<AxisPanels>& panels) {
  std::uniform_real_distribution<double> C(-1.0, 1.0);
  std::uniform_real_distribution<double> W(2.0, 4.0);
  Window win;
  panels.assign(item.dim(), AxisPanels{});
  for (int a = 0; a < item.dim(); ++a) {
    if (!item.flat_axes[a]) continue;
    const double c = C(rng);
    const double w = W(rng);
    win.axes.push_back(a);
    win.center.push_back(c);
    win.half_width.push_back(w);
    panels[a].breaks = {c - w, c + w};
  }
  return win;
}

}  // namespace

VariationFamily normal_family(const NormalField& eta, std::vector<AxisPanels> panels) {
  VariationFamily fam;
  fam.field = eta.value;
  fam.normal = true;
  fam.panels = std::move(panels);
  return fam;
}

VariationFamily general_family(PositionMap eta, std::vector<AxisPanels> panels) {
  VariationFamily fam;
  fam.field = std::move(eta);
  fam.normal = false;
  fam.panels = std::move(panels);
  return fam;
}

QuadratureGrid variation_grid(const ParametricImmersion& imm, int nodes_per_panel,
                              const std::vector<AxisPanels>& panels) {
  return tensor_grid(imm.domain(), std::vector<int>(imm.dim(), nodes_per_panel), panels);
}

WeightedVolume weighted_volume(const ParametricImmersion& imm, const PositionMap& xi,
                               const QuadratureGrid& grid,
                               const kernels::ExecutionPolicy& policy) {
  const std::vector<double> density = volume_densities(imm, grid, policy);
  WeightedVolume out;
  out.V = kernels::reduce_sum(
      grid.size(),
      [&](std::size_t k) {
        const Vec& u = grid.nodes[k];
        return grid.weights[k] * density[k] *
               checked_exp(weight_exponent(Weight::Gaussian, imm.position(u), xi(u)));
      },
      policy);
  out.V_bar = kernels::reduce_sum(
      grid.size(),
      [&](std::size_t k) {
        const Vec& u = grid.nodes[k];
        return grid.weights[k] * density[k] *
               checked_exp(weight_exponent(Weight::GaussianBar, imm.position(u), xi(u)));
      },
      policy);
  out.nodes_per_panel = grid.axis_counts.empty() ? 0 : grid.axis_counts.front();
  return out;
}

WeightedVolume weighted_volume_refined(const ParametricImmersion& imm, const PositionMap& xi,
                                       const std::vector<AxisPanels>& panels, int start,
                                       int cap, double rel_tol,
                                       const kernels::ExecutionPolicy& policy) {
  WeightedVolume prev = weighted_volume(imm, xi, variation_grid(imm, start, panels), policy);
  prev.nodes_per_panel = start;
  for (int n = 2 * start; n <= cap; n *= 2) {
    WeightedVolume next = weighted_volume(imm, xi, variation_grid(imm, n, panels), policy);
    next.nodes_per_panel = n;
    if (std::abs(next.V - prev.V) <= rel_tol * std::abs(next.V)) return next;
    prev = next;
  }
  prev.converged = false;
  return prev;
}

FirstVariation first_variation(const ParametricImmersion& imm, const PositionMap& xi,
                               const VariationFamily& fam, const QuadratureGrid& grid,
                               const kernels::ExecutionPolicy& policy) {
  const fd::StepPolicy& steps = imm.steps();
  const auto potential = [&](bool bar) -> ScalarField {
    return [&imm, &xi, bar](const Vec& u) {
      const Vec x = imm.position(u);
      const Vec z = xi(u);
      return x.dot(z) - (bar ? 0.0 : 0.5 * z.squaredNorm());
    };
  };
  const ScalarField phi = potential(false);
  const ScalarField phi_bar = potential(true);
  const auto integrand = [&](bool bar) {
    return [&, bar](const GeometryJet& jet) {
      const Vec z = xi(jet.u);
      const Vec eta = fam.field(jet.u);
      Vec force = jet.mean_curvature + jet.x_perp - z;
      if (!fam.normal) force += jet.tangent * gradient_coords(jet, bar ? phi_bar : phi, steps);
      const Weight kind = bar ? Weight::GaussianBar : Weight::Gaussian;
      return -force.dot(eta) * checked_exp(weight_exponent(kind, jet.x, z));
    };
  };
  FirstVariation out;
  out.V = integrate_jets(imm, grid, integrand(false), policy);
  out.V_bar = integrate_jets(imm, grid, integrand(true), policy);
  return out;
}

FirstVariation first_variation_fd(const ParametricImmersion& imm, const PositionMap& xi,
                                  const VariationFamily& fam, const QuadratureGrid& grid,
                                  double step, const kernels::ExecutionPolicy& policy) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "step must be positive");
  const auto states = node_states(imm, xi, fam, grid, policy);
  return {first_difference(states, fam.profile, step, Weight::Gaussian, policy),
          first_difference(states, fam.profile, step, Weight::GaussianBar, policy)};
}

double second_variation_bilinear(const ParametricImmersion& imm, const PositionMap& xi,
                                 const NormalField& eta1, const NormalField& eta2,
                                 const QuadratureGrid& grid,
                                 const kernels::ExecutionPolicy& policy) {
  const StabilityOperator L = stability_operator_unchecked(imm, OperatorMode::BundleL);
  return integrate_jets(
      imm, grid,
      [&](const GeometryJet& jet) {
        return -L.apply(jet, eta1).dot(eta2(jet.u)) *
               checked_exp(weight_exponent(Weight::Gaussian, jet.x, xi(jet.u)));
      },
      policy);
}

double second_variation(const ParametricImmersion& imm, const PositionMap& xi,
                        const NormalField& eta, const QuadratureGrid& grid,
                        const kernels::ExecutionPolicy& policy, bool check) {
  if (check) require_xi_submanifold(imm);
  return second_variation_bilinear(imm, xi, eta, eta, grid, policy);
}

double second_variation_weak(const ParametricImmersion& imm, const PositionMap& xi,
                             const NormalField& eta, const QuadratureGrid& grid,
                             const kernels::ExecutionPolicy& policy) {
  return integrate_jets(
      imm, grid,
      [&](const GeometryJet& jet) {
        const Mat D = normal_derivatives(jet, eta, imm.steps());
        const double grad = (jet.metric_inv * (D.transpose() * D)).trace();
        const Vec v = eta(jet.u);
        return (grad - h_contraction(jet, v, v) - v.squaredNorm()) *
               checked_exp(weight_exponent(Weight::Gaussian, jet.x, xi(jet.u)));
      },
      policy);
}

double second_variation_fd(const ParametricImmersion& imm, const PositionMap& xi,
                           const VariationFamily& fam, const QuadratureGrid& grid,
                           double step, const kernels::ExecutionPolicy& policy) {
  if (!fam.specially_normal()) {
    throw Error(ErrorCode::InvalidArgument, "second variation needs an SN family");
  }
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "step must be positive");
  const auto states = node_states(imm, xi, fam, grid, policy);
  return second_difference(states, fam.profile, step, Weight::Gaussian, policy);
}

std::vector<double> vp_defect(const ParametricImmersion& imm, const PositionMap& xi,
                              const NormalField& eta, const std::vector<NormalField>& frame,
                              const QuadratureGrid& grid,
                              const kernels::ExecutionPolicy& policy) {
  if (frame.empty()) throw Error(ErrorCode::NoParallelFrame, "no parallel normal frame available");
  std::vector<double> out;
  for (const NormalField& e : frame) {
    out.push_back(integrate_jets(
        imm, grid,
        [&](const GeometryJet& jet) {
          return eta(jet.u).dot(e(jet.u)) *
                 checked_exp(weight_exponent(Weight::Gaussian, jet.x, xi(jet.u)));
        },
        policy));
  }
  return out;
}

NormalField vp_project(const ParametricImmersion& imm, const PositionMap& xi,
                       const NormalField& eta, const std::vector<NormalField>& frame,
                       const QuadratureGrid& grid, const kernels::ExecutionPolicy& policy) {
  const std::vector<double> defect = vp_defect(imm, xi, eta, frame, grid, policy);
  const double V = weighted_volume(imm, xi, grid, policy).V;
  std::vector<double> coef;
  for (double d : defect) coef.push_back(d / V);
  NormalField out = eta;
  out.compact = false;
  out.label = eta.label.empty() ? "vp" : eta.label + "/vp";
  out.value = [eta, frame, coef](const Vec& u) {
    Vec v = eta(u);
    for (std::size_t a = 0; a < frame.size(); ++a) v -= coef[a] * frame[a](u);
    return v;
  };
  return out;
}

PmcSuite pmc_functional_suite(const ParametricImmersion& imm, const PositionMap& xi,
                              const NormalField& eta, const QuadratureGrid& grid,
                              const kernels::ExecutionPolicy& policy) {
  PmcSuite out;
  const fd::StepPolicy& steps = imm.steps();
  const auto weight = [&](const GeometryJet& jet) {
    return checked_exp(weight_exponent(Weight::Exponential, jet.x, xi(jet.u)));
  };
  out.V_tilde = integrate_jets(imm, grid, weight, policy);
  out.first = integrate_jets(
      imm, grid,
      [&](const GeometryJet& jet) {
        return -(jet.mean_curvature - xi(jet.u)).dot(eta(jet.u)) * weight(jet);
      },
      policy);
  std::vector<double> gap(grid.size());
  kernels::for_each_index(
      grid.size(),
      [&](std::size_t k) {
        const GeometryJet jet = geometry_jet(imm, grid.nodes[k], JetOptions{0.0, true});
        gap[k] = (jet.mean_curvature - xi(jet.u)).norm();
      },
      policy);
  for (double g : gap) out.mean_curvature_gap = std::max(out.mean_curvature_gap, g);

  const auto states = node_states(imm, xi, normal_family(eta), grid, policy);
  const TimeProfile linear = TimeProfile::linear();
  out.first_fd = first_difference(states, linear, 1e-3, Weight::Exponential, policy);

  if (out.mean_curvature_gap <= 1e-8) {
    out.has_second = true;
    const ScalarField height = [&imm, &xi](const Vec& u) { return imm.position(u).dot(xi(u)); };
    out.second = integrate_jets(
        imm, grid,
        [&](const GeometryJet& jet) {
          const Vec v = eta(jet.u);
          const Vec grad = gradient_coords(jet, height, steps);
          const Vec term = bundle_laplacian(jet, eta, steps) +
                           normal_derivative_along(jet, eta, grad, steps);
          return -(term.dot(v) + h_contraction(jet, v, v)) * weight(jet);
        },
        policy);
    out.second_fd = second_difference(states, linear, 1e-2, Weight::Exponential, policy);
  }
  return out;
}

double bump(double s) {
  if (s <= -1.0 || s >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return q * q * q * q * q;
}

CompactField random_compact_normal_field(const CatalogImmersion& item, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CompactField out;
  const Window win = random_window(item, rng, out.panels);
  const int n = item.immersion.ambient_dim();
  const Vec a = random_vector(rng, n);
  Mat B(n, n), Q(n, n * n);
  for (int i = 0; i < n; ++i) B.row(i) = random_vector(rng, n).transpose();
  for (int i = 0; i < n; ++i) {
    const Vec r = random_vector(rng, n * n);
    Q.row(i) = 0.3 * r.transpose();
  }
  const ParametricImmersion imm = item.immersion;
  out.field.label = "random-" + std::to_string(seed);
  out.field.compact = true;
  out.field.value = [imm, win, a, B, Q, n](const Vec& u) -> Vec {
    const double w = win(u);
    if (w == 0.0) return Vec::Zero(n);
    const Vec x = imm.position(u);
    Vec V = a + B * x;
    for (int i = 0; i < n; ++i) {
      double q = 0.0;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) q += Q(i, k * n + l) * x[k] * x[l];
      V[i] += q;
    }
    return w * (normal_projector(imm, u) * V);
  };
  return out;
}

CompactScalar random_compact_scalar(const CatalogImmersion& item, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CompactScalar out;
  const Window win = random_window(item, rng, out.panels);
  const int n = item.immersion.ambient_dim();
  const double c = random_vector(rng, 1)[0];
  const Vec b = random_vector(rng, n);
  Mat Q(n, n);
  for (int i = 0; i < n; ++i) Q.row(i) = 0.3 * random_vector(rng, n).transpose();
  const ParametricImmersion imm = item.immersion;
  out.field = [imm, win, c, b, Q](const Vec& u) {
    const double w = win(u);
    if (w == 0.0) return 0.0;
    const Vec x = imm.position(u);
    return w * (c + b.dot(x) + x.dot(Q * x));
  };
  return out;
}

}  // namespace xisub
