#include "xisub/quadrature.hpp"

#include "xisub/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace xisub {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "Gauss-Legendre rule needs n >= 1");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      const double step = p1 / dp;
      z -= step;
      if (std::abs(step) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureGrid tensor_grid(const Box& box, const std::vector<int>& nodes_per_panel,
                           const std::vector<AxisPanels>& panels) {
  const int m = static_cast<int>(box.size());
  if (static_cast<int>(nodes_per_panel.size()) != m) {
    throw Error(ErrorCode::InvalidArgument, "need one node count per axis");
  }
  std::vector<std::vector<double>> axis_nodes(m), axis_weights(m);
  for (int a = 0; a < m; ++a) {
    std::vector<double> cuts{box[a].lo};
    if (a < static_cast<int>(panels.size())) {
      for (double b : panels[a].breaks)
        if (b > box[a].lo && b < box[a].hi) cuts.push_back(b);
    }
    cuts.push_back(box[a].hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const GaussRule rule = gauss_legendre(nodes_per_panel[a]);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double mid = 0.5 * (cuts[c] + cuts[c + 1]);
      const double half = 0.5 * (cuts[c + 1] - cuts[c]);
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        axis_nodes[a].push_back(mid + half * rule.nodes[k]);
        axis_weights[a].push_back(half * rule.weights[k]);
      }
    }
  }
  QuadratureGrid grid;
  grid.dim = m;
  std::size_t total = 1;
  for (int a = 0; a < m; ++a) {
    grid.axis_counts.push_back(static_cast<int>(axis_nodes[a].size()));
    total *= axis_nodes[a].size();
  }
  grid.nodes.reserve(total);
  grid.weights.reserve(total);
  std::vector<std::size_t> idx(m, 0);
  for (std::size_t n = 0; n < total; ++n) {
    Vec u(m);
    double w = 1.0;
    for (int a = 0; a < m; ++a) {
      u[a] = axis_nodes[a][idx[a]];
      w *= axis_weights[a][idx[a]];
    }
    grid.nodes.push_back(std::move(u));
    grid.weights.push_back(w);
    for (int a = m - 1; a >= 0; --a) {
      if (++idx[a] < axis_nodes[a].size()) break;
      idx[a] = 0;
    }
  }
  return grid;
}

QuadratureGrid verification_grid(const ParametricImmersion& imm, int nodes_per_axis) {
  Box box = imm.domain();
  for (auto& axis : box) {
    axis.lo += axis.collar;
    axis.hi -= axis.collar;
  }
  return tensor_grid(box, std::vector<int>(imm.dim(), nodes_per_axis));
}

namespace {

double density_at(const ParametricImmersion& imm, const Vec& u) {
  const Mat J = imm.jacobian(u);
  const double det = (J.transpose() * J).determinant();
  if (!(det > 0.0) || !std::isfinite(det)) {
    throw Error(ErrorCode::DegenerateMetric, "vanishing volume density at a quadrature node");
  }
  return std::sqrt(det);
}

}  // namespace

std::vector<double> volume_densities(const ParametricImmersion& imm,
                                     const QuadratureGrid& grid,
                                     const kernels::ExecutionPolicy& policy) {
  std::vector<double> out(grid.size());
  kernels::for_each_index(
      grid.size(), [&](std::size_t k) { out[k] = density_at(imm, grid.nodes[k]); }, policy);
  return out;
}

double integrate(const ParametricImmersion& imm, const QuadratureGrid& grid,
                 const ScalarField& phi, const kernels::ExecutionPolicy& policy) {
  return kernels::reduce_sum(
      grid.size(),
      [&](std::size_t k) {
        const Vec& u = grid.nodes[k];
        return grid.weights[k] * density_at(imm, u) * phi(u);
      },
      policy);
}

}  // namespace xisub
