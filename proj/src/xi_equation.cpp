#include "xisub/xi_equation.hpp"

#include "xisub/error.hpp"

#include <cmath>

namespace xisub {

namespace {

JetOptions unchecked() {
  JetOptions o;
  o.check_domain = false;
  return o;
}

Vec xi_vector_at(const ParametricImmersion& imm, const Vec& u) {
  return xi_vector(geometry_jet(imm, u, unchecked()));
}

Vec modified_mean_curvature_at(const ParametricImmersion& imm, const Vec& u) {
  return gaussian_geometry(geometry_jet(imm, u, unchecked())).H_tilde;
}

// Fourth-order stencil at h and h/2, combined to cancel the h^4 term.  Used
// where the field grows like e^{|x|^2/2m}.
Vec extrapolated_first(const PositionMap& fn, const Vec& u, int i, double scale) {
  const Vec coarse = fd::first(fn, u, i, scale);
  const Vec fine = fd::first(fn, u, i, 0.5 * scale);
  return (16.0 * fine - coarse) / 15.0;
}

}  // namespace

XiData xi_data(const GeometryJet& jet, const Vec& xi) {
  XiData d;
  d.xi = xi;
  d.f = 0.5 * (jet.x - xi).squaredNorm();
  d.f_bar = d.f - 0.5 * xi.squaredNorm();
  d.A_xi = weingarten_map(jet, xi);
  const Vec t = jet.tangent_coords(jet.x_tan);
  d.drift = t + d.A_xi * t;
  return d;
}

Vec xi_vector(const GeometryJet& jet) { return jet.mean_curvature + jet.x_perp; }

XiResidual xi_residual(const ParametricImmersion& imm, const QuadratureGrid& grid,
                       const kernels::ExecutionPolicy& policy) {
  const std::size_t n = grid.size();
  std::vector<XiResidual> per(n);
  const PositionMap field = [&imm](const Vec& u) { return xi_vector_at(imm, u); };
  kernels::for_each_index(
      n,
      [&](std::size_t k) {
        const GeometryJet jet = geometry_jet(imm, grid.nodes[k]);
        const Vec xi = xi_vector(jet);
        XiResidual r;
        r.tangential = jet.tangential_part(xi).norm();
        r.xi_max = xi.norm();
        for (int i = 0; i < jet.dim(); ++i) {
          const Vec d = jet.normal_projector * fd::first(field, jet.u, i, imm.steps().first);
          r.residual = std::max(r.residual, d.norm() / jet.tangent.col(i).norm());
        }
        per[k] = r;
      },
      policy);
  XiResidual out;
  for (const auto& r : per) {
    out.residual = std::max(out.residual, r.residual);
    out.tangential = std::max(out.tangential, r.tangential);
    out.xi_max = std::max(out.xi_max, r.xi_max);
  }
  return out;
}

Vec conformal_shift(const Vec& x, const Vec& a, const Vec& b, int m) {
  return (a.dot(b) * x - x.dot(a) * b - x.dot(b) * a) / m;
}

Vec koszul_shift(const Vec& x, const Vec& a, const Vec& b, int m) {
  // Christoffel symbols of a general metric matrix field G(y), then
  // Gamma(a, b) = G^{-1} * 1/2 (d_a G b + d_b G a - grad <G a, b>).
  const auto n = x.size();
  const auto metric = [m, n](const Vec& y) -> Mat {
    return std::exp(-y.squaredNorm() / m) * Mat::Identity(n, n);
  };
  std::vector<Mat> dG(n);
  for (Eigen::Index c = 0; c < n; ++c) dG[c] = fd::first(metric, x, static_cast<int>(c));
  Mat da = Mat::Zero(n, n), db = Mat::Zero(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    da += a[c] * dG[c];
    db += b[c] * dG[c];
  }
  Vec grad(n);
  for (Eigen::Index c = 0; c < n; ++c) grad[c] = a.dot(dG[c] * b);
  const Vec lowered = 0.5 * (da * b + db * a - grad);
  return metric(x).ldlt().solve(lowered);
}

double conformal_connection_check(const ParametricImmersion& imm, const Vec& u) {
  imm.require_in_domain(u);
  const int m = imm.dim();
  const Vec x = imm.position(u);
  const Mat J = imm.jacobian(u);
  const auto n = x.size();
  std::vector<Vec> basis;
  for (Eigen::Index c = 0; c < n; ++c) basis.push_back(Mat::Identity(n, n).col(c));
  for (int i = 0; i < m; ++i) basis.push_back(J.col(i));
  double worst = 0.0;
  for (const Vec& a : basis) {
    for (const Vec& b : basis) {
      const double scale = std::max(1.0, a.norm() * b.norm() * (1.0 + x.norm()));
      worst = std::max(worst, (conformal_shift(x, a, b, m) - koszul_shift(x, a, b, m)).norm() / scale);
    }
  }
  return worst;
}

GaussianJet gaussian_geometry(const GeometryJet& jet) {
  const int m = jet.dim();
  GaussianJet gj;
  const double r2 = jet.x.squaredNorm();
  gj.conformal_factor = std::exp(-r2 / m);
  // h_bar_ij = normal part of D_bar_{d_j} d_i x = h_ij + normal part of the shift
  gj.h_bar.resize(m * m);
  gj.H_bar = Vec::Zero(jet.ambient_dim());
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const Vec shift = conformal_shift(jet.x, jet.tangent.col(i), jet.tangent.col(j), m);
      gj.h_bar[i * m + j] = jet.h(i, j) + jet.normal_projector * shift;
    }
  }
  // g_bar^{ij} = e^{|x|^2/m} g^{ij}
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) gj.H_bar += jet.metric_inv(i, j) * gj.h_bar[i * m + j];
  gj.H_bar /= gj.conformal_factor;
  gj.H_tilde = std::exp(-r2 / (2.0 * m)) * gj.H_bar;
  return gj;
}

ParallelismCheck modified_mcv_parallelism_check(const ParametricImmersion& imm,
                                                const QuadratureGrid& grid,
                                                const kernels::ExecutionPolicy& policy) {
  const std::size_t n = grid.size();
  std::vector<ParallelismCheck> per(n);
  const PositionMap tilde = [&imm](const Vec& u) { return modified_mean_curvature_at(imm, u); };
  const PositionMap plain = [&imm](const Vec& u) { return xi_vector_at(imm, u); };
  kernels::for_each_index(
      n,
      [&](std::size_t k) {
        const GeometryJet jet = geometry_jet(imm, grid.nodes[k]);
        const int m = jet.dim();
        const double weight = std::exp(jet.x.squaredNorm() / (2.0 * m));
        const Vec Ht = gaussian_geometry(jet).H_tilde;
        ParallelismCheck c;
        c.max_weight = weight;
        for (int i = 0; i < m; ++i) {
          const Vec e = jet.tangent.col(i);
          const Vec dHt = extrapolated_first(tilde, jet.u, i, imm.steps().first);
          const Vec lhs = jet.normal_projector * (dHt + conformal_shift(jet.x, Ht, e, m));
          const Vec dxi = jet.normal_projector * extrapolated_first(plain, jet.u, i, imm.steps().first);
          const Vec rhs = weight * dxi;
          const double len = e.norm();
          c.discrepancy = std::max(c.discrepancy, (lhs - rhs).norm() / (weight * len));
          c.gaussian_side = std::max(c.gaussian_side, lhs.norm() / len);
          c.euclidean_side = std::max(c.euclidean_side, dxi.norm() / len);
        }
        per[k] = c;
      },
      policy);
  ParallelismCheck out;
  for (const auto& c : per) {
    out.discrepancy = std::max(out.discrepancy, c.discrepancy);
    out.gaussian_side = std::max(out.gaussian_side, c.gaussian_side);
    out.euclidean_side = std::max(out.euclidean_side, c.euclidean_side);
    out.max_weight = std::max(out.max_weight, c.max_weight);
  }
  return out;
}

}  // namespace xisub
