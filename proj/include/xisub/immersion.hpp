#pragma once

// Parametric immersions u in D (a box in R^m) -> R^{m+p} and their pointwise
// differential geometry: metric, Christoffel symbols, second fundamental form,
// mean curvature, tangent/normal projections, normal connection, Laplacians.
//
// Everything is frame-free.  The normal bundle is handled through the
// pointwise projector P_perp, never through a chosen normal frame.

#include "xisub/finite_difference.hpp"
#include "xisub/linalg.hpp"

#include <functional>
#include <string>
#include <vector>

namespace xisub {

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool periodic = false;
  /// Width trimmed off both ends when building verification grids
  /// (polar collars of angular charts).
  double collar = 0.0;

  double length() const { return hi - lo; }
};

using Box = std::vector<Axis>;

using PositionMap = std::function<Vec(const Vec&)>;
/// n x m Jacobian: column i is d x / d u^i.
using JacobianMap = std::function<Mat(const Vec&)>;
/// Entry i is an n x m matrix whose column j is d^2 x / du^i du^j.
using HessianMap = std::function<std::vector<Mat>(const Vec&)>;

class ParametricImmersion {
 public:
  ParametricImmersion(int m, int p, Box domain, PositionMap position);

  ParametricImmersion& with_jacobian(JacobianMap jacobian);
  ParametricImmersion& with_hessian(HessianMap hessian);
  ParametricImmersion& with_scale(double scale);
  ParametricImmersion& with_steps(fd::StepPolicy steps);

  int dim() const { return m_; }
  int codim() const { return p_; }
  int ambient_dim() const { return m_ + p_; }
  const Box& domain() const { return domain_; }
  double scale() const { return scale_; }
  bool has_exact_jets() const { return bool(jacobian_) && bool(hessian_); }
  const fd::StepPolicy& steps() const { return steps_; }

  Vec position(const Vec& u) const;
  Mat jacobian(const Vec& u) const;
  std::vector<Mat> hessian(const Vec& u) const;

  bool contains(const Vec& u, double slack = 1e-12) const;
  /// Throws OutOfDomain unless u lies in the chart box.
  void require_in_domain(const Vec& u) const;
  /// Largest endpoint mismatch over periodic axes, sampled on a small grid.
  double periodicity_defect(int samples = 5) const;

 private:
  int m_;
  int p_;
  Box domain_;
  PositionMap position_;
  JacobianMap jacobian_;
  HessianMap hessian_;
  double scale_ = 1.0;
  fd::StepPolicy steps_{};
};

struct JetOptions {
  /// Relative rank tolerance: det g must exceed rank_tol * scale^(2m).
  double rank_tol = 1e-10;
  bool check_domain = true;
};

struct GeometryJet {
  Vec u;
  Vec x;
  Mat tangent;  // n x m, columns d x / d u^i
  Mat metric;
  Mat metric_inv;
  double volume_density = 0.0;
  /// christoffel[k](i, j) = Gamma^k_ij
  std::vector<Mat> christoffel;
  /// second_fundamental[i * m + j] = h_ij, normal-valued
  std::vector<Vec> second_fundamental;
  Vec mean_curvature;
  Vec x_tan;
  Vec x_perp;
  Mat normal_projector;

  int dim() const { return static_cast<int>(tangent.cols()); }
  int ambient_dim() const { return static_cast<int>(tangent.rows()); }
  const Vec& h(int i, int j) const { return second_fundamental[i * dim() + j]; }

  /// Coordinates c with tangential part of v equal to tangent * c.
  Vec tangent_coords(const Vec& v) const;
  Vec normal_part(const Vec& v) const { return normal_projector * v; }
  Vec tangential_part(const Vec& v) const { return v - normal_projector * v; }
  /// g^{-1/2}: columns give a g-orthonormal coordinate frame.
  Mat orthonormal_factor() const;
};

GeometryJet geometry_jet(const ParametricImmersion& imm, const Vec& u,
                         const JetOptions& options = {});

/// Normal projector at u from the Jacobian alone (no second derivatives).
Mat normal_projector(const Mat& tangent);
Mat normal_projector(const ParametricImmersion& imm, const Vec& u);

/// Weingarten map A_N with A(l, i) = g^{lk} <h_ik, N>.  Throws NotNormal if N
/// has a tangential component above tol * max(1, |N|).
Mat weingarten_map(const GeometryJet& jet, const Vec& normal, double tol = 1e-8);

/// h(X, Y) for coordinate vectors X, Y.
Vec second_fundamental_form(const GeometryJet& jet, const Vec& X, const Vec& Y);

/// Sum_{ij} <h_ij, a><h_ij, b> over a g-orthonormal frame
/// (= g^{ik} g^{jl} <h_ij, a><h_kl, b>).
double h_contraction(const GeometryJet& jet, const Vec& a, const Vec& b);

using ScalarField = std::function<double(const Vec&)>;

/// A section of the normal bundle, given by its value map u -> eta(u).
struct NormalField {
  PositionMap value;
  bool compact = false;
  bool parallel = false;
  std::string label;

  Vec operator()(const Vec& u) const { return value(u); }
};

/// Normal field u -> P_perp(u) V(x(u)) for an ambient vector field V.
NormalField project_to_normal(const ParametricImmersion& imm,
                              std::function<Vec(const Vec&)> ambient_field,
                              std::string label = {});

/// D_perp_{d_i} eta = P_perp d_i eta.
Vec normal_derivative(const GeometryJet& jet, const NormalField& field, int i,
                      const fd::StepPolicy& steps = fd::default_policy());
Vec normal_derivative(const ParametricImmersion& imm, const NormalField& field,
                      const Vec& u, int i);
/// All coordinate directions at once: column i is D_perp_i eta.
Mat normal_derivatives(const GeometryJet& jet, const NormalField& field,
                       const fd::StepPolicy& steps = fd::default_policy());

/// Rough Laplacian of the normal bundle, g^{ij}(D_i D_j - Gamma^k_ij D_k) eta.
Vec bundle_laplacian(const GeometryJet& jet, const NormalField& field,
                     const fd::StepPolicy& steps = fd::default_policy());
Vec bundle_laplacian(const ParametricImmersion& imm, const NormalField& field,
                     const Vec& u);

/// Coordinate gradient g^{ij} d_j phi.
Vec gradient_coords(const GeometryJet& jet, const ScalarField& phi,
                    const fd::StepPolicy& steps = fd::default_policy());
double laplace_beltrami(const GeometryJet& jet, const ScalarField& phi,
                        const fd::StepPolicy& steps = fd::default_policy());
double laplace_beltrami(const ParametricImmersion& imm, const ScalarField& phi,
                        const Vec& u);

}  // namespace xisub
