#pragma once

// The xi-equation H + x_perp = xi, its residual on a grid, and the geometry
// of the Gaussian space (R^{m+p}, e^{-|x|^2/m} <.,.>).

#include "xisub/immersion.hpp"
#include "xisub/kernels.hpp"
#include "xisub/quadrature.hpp"

#include <vector>

namespace xisub {

struct XiData {
  Vec xi;
  double f = 0.0;      // 1/2 |x - xi|^2
  double f_bar = 0.0;  // f - 1/2 |xi|^2
  Mat A_xi;            // Weingarten map of xi, coordinates
  Vec drift;           // coordinates of x_tan + A_xi(x_tan)
};

/// xi must be normal at the jet (NotNormal otherwise).
XiData xi_data(const GeometryJet& jet, const Vec& xi);

/// H + x_perp.
Vec xi_vector(const GeometryJet& jet);

struct XiResidual {
  /// sup over nodes and coordinate directions of |D_perp_i (H + x_perp)| / |d_i x|
  double residual = 0.0;
  /// sup |(H + x_perp)_tan|; zero up to roundoff
  double tangential = 0.0;
  double xi_max = 0.0;
};

XiResidual xi_residual(const ParametricImmersion& imm, const QuadratureGrid& grid,
                       const kernels::ExecutionPolicy& policy = {});

/// Levi-Civita shift of the conformal metric e^{-|x|^2/m}<.,.> applied to
/// constant vector fields a, b at x.
Vec conformal_shift(const Vec& x, const Vec& a, const Vec& b, int m);

/// Same shift from a numerical Koszul formula on the metric matrix field.
Vec koszul_shift(const Vec& x, const Vec& a, const Vec& b, int m);

/// Largest |closed form - Koszul| over pairs drawn from the ambient standard
/// basis and the tangent vectors at u.
double conformal_connection_check(const ParametricImmersion& imm, const Vec& u);

struct GaussianJet {
  std::vector<Vec> h_bar;  // h_bar[i * m + j]
  Vec H_bar;
  Vec H_tilde;
  double conformal_factor = 1.0;  // e^{-|x|^2/m}
};

GaussianJet gaussian_geometry(const GeometryJet& jet);

struct ParallelismCheck {
  /// sup |D_bar_perp H_tilde - e^{|x|^2/2m} D_perp(H + x_perp)| / e^{|x|^2/2m};
  /// dividing by the weight keeps far chart regions of planes comparable.
  double discrepancy = 0.0;
  double gaussian_side = 0.0;   // sup |D_bar_perp H_tilde|
  double euclidean_side = 0.0;  // sup |D_perp (H + x_perp)|
  double max_weight = 1.0;      // sup e^{|x|^2/2m}
};

/// Both sides per coordinate direction, normalized by |d_i x|.
ParallelismCheck modified_mcv_parallelism_check(const ParametricImmersion& imm,
                                                const QuadratureGrid& grid,
                                                const kernels::ExecutionPolicy& policy = {});

}  // namespace xisub
