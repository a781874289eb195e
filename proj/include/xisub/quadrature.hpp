#pragma once

#include "xisub/immersion.hpp"
#include "xisub/kernels.hpp"
#include "xisub/linalg.hpp"

#include <vector>

namespace xisub {

struct GaussRule {
  std::vector<double> nodes;  // on [-1, 1], ascending
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (Newton iteration on P_n).
GaussRule gauss_legendre(int n);

/// Tensor-product Gauss-Legendre nodes over a chart box.  Each axis may be
/// split into panels at breakpoints; every panel gets the same rule.
struct QuadratureGrid {
  int dim = 0;
  std::vector<Vec> nodes;
  std::vector<double> weights;   // chart weights
  std::vector<int> axis_counts;  // total nodes per axis

  std::size_t size() const { return nodes.size(); }
};

struct AxisPanels {
  std::vector<double> breaks;  // interior breakpoints, any order
};

QuadratureGrid tensor_grid(const Box& box, const std::vector<int>& nodes_per_panel,
                           const std::vector<AxisPanels>& panels = {});

/// Gauss-Legendre grid for pointwise verification: polar collars trimmed.
QuadratureGrid verification_grid(const ParametricImmersion& imm, int nodes_per_axis = 24);

/// Volume density sqrt(det g) at each node.  Uses a relaxed rank tolerance:
/// quadrature nodes may sit close to coordinate singularities.
std::vector<double> volume_densities(const ParametricImmersion& imm,
                                     const QuadratureGrid& grid,
                                     const kernels::ExecutionPolicy& policy = {});

/// Integral of phi dV over the chart box.
double integrate(const ParametricImmersion& imm, const QuadratureGrid& grid,
                 const ScalarField& phi, const kernels::ExecutionPolicy& policy = {});

}  // namespace xisub
