#include "xisub/immersion.hpp"

#include "xisub/error.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace xisub {

ParametricImmersion::ParametricImmersion(int m, int p, Box domain, PositionMap position)
    : m_(m), p_(p), domain_(std::move(domain)), position_(std::move(position)) {
  if (m < 1 || p < 0) {
    throw Error(ErrorCode::InvalidArgument, "immersion needs m >= 1 and p >= 0");
  }
  if (static_cast<int>(domain_.size()) != m) {
    throw Error(ErrorCode::InvalidArgument, "domain box must have one axis per chart dimension");
  }
}

ParametricImmersion& ParametricImmersion::with_jacobian(JacobianMap jacobian) {
  jacobian_ = std::move(jacobian);
  return *this;
}

ParametricImmersion& ParametricImmersion::with_hessian(HessianMap hessian) {
  hessian_ = std::move(hessian);
  return *this;
}

ParametricImmersion& ParametricImmersion::with_scale(double scale) {
  scale_ = scale;
  return *this;
}

ParametricImmersion& ParametricImmersion::with_steps(fd::StepPolicy steps) {
  steps_ = steps;
  return *this;
}

Vec ParametricImmersion::position(const Vec& u) const { return position_(u); }

Mat ParametricImmersion::jacobian(const Vec& u) const {
  if (jacobian_) return jacobian_(u);
  Mat J(ambient_dim(), m_);
  for (int i = 0; i < m_; ++i) J.col(i) = fd::first(position_, u, i, steps_.first);
  return J;
}

std::vector<Mat> ParametricImmersion::hessian(const Vec& u) const {
  if (hessian_) return hessian_(u);
  std::vector<Mat> out(m_, Mat(ambient_dim(), m_));
  const Vec x0 = position_(u);
  for (int i = 0; i < m_; ++i) {
    for (int j = i; j < m_; ++j) {
      Vec d = fd::second(position_, u, i, j, x0, steps_.second);
      out[i].col(j) = d;
      out[j].col(i) = d;
    }
  }
  return out;
}

bool ParametricImmersion::contains(const Vec& u, double slack) const {
  if (u.size() != m_) return false;
  for (int i = 0; i < m_; ++i) {
    const double pad = slack * (1.0 + std::abs(domain_[i].lo) + std::abs(domain_[i].hi));
    if (u[i] < domain_[i].lo - pad || u[i] > domain_[i].hi + pad) return false;
  }
  return true;
}

void ParametricImmersion::require_in_domain(const Vec& u) const {
  if (!contains(u)) {
    std::ostringstream os;
    os << "chart point (" << u.transpose() << ") lies outside the domain box";
    throw Error(ErrorCode::OutOfDomain, os.str());
  }
}

double ParametricImmersion::periodicity_defect(int samples) const {
  double worst = 0.0;
  for (int i = 0; i < m_; ++i) {
    if (!domain_[i].periodic) continue;
    Vec u(m_);
    for (int s = 0; s < samples; ++s) {
      for (int k = 0; k < m_; ++k) {
        const double t = (s + 0.5) / samples;
        u[k] = domain_[k].lo + t * domain_[k].length();
      }
      Vec a = u, b = u;
      a[i] = domain_[i].lo;
      b[i] = domain_[i].hi;
      worst = std::max(worst, (position_(a) - position_(b)).norm());
    }
  }
  return worst;
}

Vec GeometryJet::tangent_coords(const Vec& v) const {
  return metric_inv * (tangent.transpose() * v);
}

Mat GeometryJet::orthonormal_factor() const {
  Eigen::SelfAdjointEigenSolver<Mat> es(metric);
  return es.operatorInverseSqrt();
}

Mat normal_projector(const Mat& tangent) {
  const auto n = tangent.rows();
  const auto m = tangent.cols();
  Eigen::ColPivHouseholderQR<Mat> qr(tangent);
  Mat Q = qr.householderQ() * Mat::Identity(n, m);
  return Mat::Identity(n, n) - Q * Q.transpose();
}

Mat normal_projector(const ParametricImmersion& imm, const Vec& u) {
  return normal_projector(imm.jacobian(u));
}

GeometryJet geometry_jet(const ParametricImmersion& imm, const Vec& u,
                         const JetOptions& options) {
  if (options.check_domain) imm.require_in_domain(u);
  const int m = imm.dim();
  GeometryJet jet;
  jet.u = u;
  jet.x = imm.position(u);
  jet.tangent = imm.jacobian(u);
  jet.metric = jet.tangent.transpose() * jet.tangent;
  const double det = jet.metric.determinant();
  const double threshold = options.rank_tol * std::pow(imm.scale(), 2 * m);
  if (!(det > threshold)) {
    std::ostringstream os;
    os << "det g = " << det << " at u = (" << u.transpose() << ")";
    throw Error(ErrorCode::DegenerateMetric, os.str());
  }
  jet.metric_inv = jet.metric.ldlt().solve(Mat::Identity(m, m));
  jet.metric_inv = 0.5 * (jet.metric_inv + jet.metric_inv.transpose());
  jet.volume_density = std::sqrt(det);
  jet.normal_projector = normal_projector(jet.tangent);

  const std::vector<Mat> hess = imm.hessian(u);
  jet.christoffel.assign(m, Mat(m, m));
  jet.second_fundamental.assign(m * m, Vec());
  jet.mean_curvature = Vec::Zero(imm.ambient_dim());
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const Vec xij = hess[i].col(j);
      const Vec gamma = jet.metric_inv * (jet.tangent.transpose() * xij);
      for (int k = 0; k < m; ++k) jet.christoffel[k](i, j) = gamma[k];
      jet.second_fundamental[i * m + j] = jet.normal_projector * xij;
    }
  }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      jet.mean_curvature += jet.metric_inv(i, j) * jet.h(i, j);
  jet.x_perp = jet.normal_projector * jet.x;
  jet.x_tan = jet.x - jet.x_perp;
  return jet;
}

namespace {

// S(i, j) = <h_ij, N>
Mat shape_matrix(const GeometryJet& jet, const Vec& normal) {
  const int m = jet.dim();
  Mat S(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) S(i, j) = jet.h(i, j).dot(normal);
  return S;
}

}  // namespace

Mat weingarten_map(const GeometryJet& jet, const Vec& normal, double tol) {
  const double tangential = jet.tangential_part(normal).norm();
  if (tangential > tol * std::max(1.0, normal.norm())) {
    std::ostringstream os;
    os << "vector has tangential component " << tangential;
    throw Error(ErrorCode::NotNormal, os.str());
  }
  return jet.metric_inv * shape_matrix(jet, normal);
}

Vec second_fundamental_form(const GeometryJet& jet, const Vec& X, const Vec& Y) {
  const int m = jet.dim();
  Vec out = Vec::Zero(jet.ambient_dim());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) out += X[i] * Y[j] * jet.h(i, j);
  return out;
}

double h_contraction(const GeometryJet& jet, const Vec& a, const Vec& b) {
  const Mat Sa = shape_matrix(jet, a);
  const Mat Sb = shape_matrix(jet, b);
  return (jet.metric_inv * Sa * jet.metric_inv * Sb).trace();
}

NormalField project_to_normal(const ParametricImmersion& imm,
                              std::function<Vec(const Vec&)> ambient_field,
                              std::string label) {
  NormalField field;
  field.label = std::move(label);
  field.value = [imm, V = std::move(ambient_field)](const Vec& u) -> Vec {
    return normal_projector(imm, u) * V(imm.position(u));
  };
  return field;
}

Vec normal_derivative(const GeometryJet& jet, const NormalField& field, int i,
                      const fd::StepPolicy& steps) {
  return jet.normal_projector * fd::first(field.value, jet.u, i, steps.first);
}

Vec normal_derivative(const ParametricImmersion& imm, const NormalField& field,
                      const Vec& u, int i) {
  imm.require_in_domain(u);
  return normal_projector(imm, u) * fd::first(field.value, u, i, imm.steps().first);
}

Mat normal_derivatives(const GeometryJet& jet, const NormalField& field,
                       const fd::StepPolicy& steps) {
  Mat out(jet.ambient_dim(), jet.dim());
  for (int i = 0; i < jet.dim(); ++i) out.col(i) = normal_derivative(jet, field, i, steps);
  return out;
}

Vec bundle_laplacian(const GeometryJet& jet, const NormalField& field,
                     const fd::StepPolicy& steps) {
  // For a normal field, D_i eta = d_i eta + x_*(A_eta d_i), which gives
  // D_i D_j eta = P_perp d_ij eta + (A_eta)^l_j h_li.
  const int m = jet.dim();
  const Vec eta = field(jet.u);
  const Mat A = jet.metric_inv * shape_matrix(jet, eta);
  std::vector<Vec> d1(m);
  for (int k = 0; k < m; ++k)
    d1[k] = jet.normal_projector * fd::first(field.value, jet.u, k, steps.first);
  Vec out = Vec::Zero(jet.ambient_dim());
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double gij = jet.metric_inv(i, j);
      if (gij == 0.0) continue;
      Vec term = jet.normal_projector * fd::second(field.value, jet.u, i, j, eta, steps.second);
      for (int l = 0; l < m; ++l) term += A(l, j) * jet.h(l, i);
      for (int k = 0; k < m; ++k) term -= jet.christoffel[k](i, j) * d1[k];
      out += gij * term;
    }
  }
  return out;
}

Vec bundle_laplacian(const ParametricImmersion& imm, const NormalField& field,
                     const Vec& u) {
  return bundle_laplacian(geometry_jet(imm, u), field, imm.steps());
}

Vec gradient_coords(const GeometryJet& jet, const ScalarField& phi,
                    const fd::StepPolicy& steps) {
  const int m = jet.dim();
  Vec d(m);
  for (int i = 0; i < m; ++i) d[i] = fd::first(phi, jet.u, i, steps.first);
  return jet.metric_inv * d;
}

double laplace_beltrami(const GeometryJet& jet, const ScalarField& phi,
                        const fd::StepPolicy& steps) {
  const int m = jet.dim();
  const double f0 = phi(jet.u);
  Vec d(m);
  for (int k = 0; k < m; ++k) d[k] = fd::first(phi, jet.u, k, steps.first);
  double out = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double gij = jet.metric_inv(i, j);
      if (gij == 0.0) continue;
      double term = fd::second(phi, jet.u, i, j, f0, steps.second);
      for (int k = 0; k < m; ++k) term -= jet.christoffel[k](i, j) * d[k];
      out += gij * term;
    }
  }
  return out;
}

double laplace_beltrami(const ParametricImmersion& imm, const ScalarField& phi,
                        const Vec& u) {
  return laplace_beltrami(geometry_jet(imm, u), phi, imm.steps());
}

}  // namespace xisub
