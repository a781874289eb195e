#include "xisub/stability.hpp"

#include "xisub/error.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace xisub {

namespace {

constexpr double kPi = std::numbers::pi;

JetOptions quadrature_jet() { return JetOptions{0.0, true}; }

double gaussian_weight(const GeometryJet& jet, const PositionMap& xi) {
  return std::exp(-0.5 * (jet.x - xi(jet.u)).squaredNorm());
}

template <class Term>
double integrate_weighted(const ParametricImmersion& base, const PositionMap& xi,
                          const QuadratureGrid& grid, Term&& term,
                          const kernels::ExecutionPolicy& policy) {
  return kernels::reduce_sum(
      grid.size(),
      [&](std::size_t k) {
        const GeometryJet jet = geometry_jet(base, grid.nodes[k], quadrature_jet());
        return grid.weights[k] * jet.volume_density * gaussian_weight(jet, xi) * term(jet);
      },
      policy);
}

NormalField product_field(const ScalarField& phi, const NormalField& eta) {
  NormalField out;
  out.value = [phi, eta](const Vec& u) { return Vec(phi(u) * eta(u)); };
  out.label = "phi*" + eta.label;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// identities

double product_rule_check(const ParametricImmersion& base, const ScalarField& phi,
                          const NormalField& eta, const QuadratureGrid& grid,
                          const kernels::ExecutionPolicy& policy) {
  const StabilityOperator L = stability_operator_unchecked(base, OperatorMode::BundleL);
  const StabilityOperator Ls = stability_operator_unchecked(base, OperatorMode::ScalarDrift);
  const NormalField prod = product_field(phi, eta);
  std::vector<double> defect(grid.size());
  kernels::for_each_index(
      grid.size(),
      [&](std::size_t k) {
        const GeometryJet jet = geometry_jet(base, grid.nodes[k]);
        const Vec lhs = L.apply(jet, prod);
        const Vec grad = gradient_coords(jet, phi, base.steps());
        const Vec rhs = Ls.apply(jet, phi) * eta(jet.u) + phi(jet.u) * L.apply(jet, eta) +
                        2.0 * normal_derivative_along(jet, eta, grad, base.steps());
        defect[k] = (lhs - rhs).norm();
      },
      policy);
  double worst = 0.0;
  for (double d : defect) worst = std::max(worst, d);
  return worst;
}

IntegralGap integration_by_parts_check(const ParametricImmersion& base, const PositionMap& xi,
                                       const NormalField& eta1, const NormalField& eta2,
                                       const QuadratureGrid& grid,
                                       const kernels::ExecutionPolicy& policy) {
  const StabilityOperator op = stability_operator_unchecked(base, OperatorMode::BundleDrift);
  IntegralGap out;
  out.lhs = integrate_weighted(
      base, xi, grid, [&](const GeometryJet& jet) { return eta1(jet.u).dot(op.apply(jet, eta2)); },
      policy);
  const auto gradient_pairing = [&](const GeometryJet& jet) {
    const Mat D1 = normal_derivatives(jet, eta1, base.steps());
    const Mat D2 = normal_derivatives(jet, eta2, base.steps());
    return (jet.metric_inv * (D1.transpose() * D2)).trace();
  };
  out.rhs = -integrate_weighted(base, xi, grid, gradient_pairing, policy);
  out.scale = integrate_weighted(
      base, xi, grid,
      [&](const GeometryJet& jet) {
        return std::abs(eta1(jet.u).dot(op.apply(jet, eta2))) + std::abs(gradient_pairing(jet));
      },
      policy);
  return out;
}

IntegralGap integration_by_parts_check(const ParametricImmersion& base, const PositionMap& xi,
                                       const ScalarField& phi1, const ScalarField& phi2,
                                       const QuadratureGrid& grid,
                                       const kernels::ExecutionPolicy& policy) {
  const StabilityOperator op = stability_operator_unchecked(base, OperatorMode::ScalarDrift);
  const auto pairing = [&](const GeometryJet& jet) {
    const Vec g1 = gradient_coords(jet, phi1, base.steps());
    const Vec g2 = gradient_coords(jet, phi2, base.steps());
    return g1.dot(jet.metric * g2);
  };
  IntegralGap out;
  out.lhs = integrate_weighted(
      base, xi, grid, [&](const GeometryJet& jet) { return phi1(jet.u) * op.apply(jet, phi2); },
      policy);
  out.rhs = -integrate_weighted(base, xi, grid, pairing, policy);
  out.scale = integrate_weighted(
      base, xi, grid,
      [&](const GeometryJet& jet) {
        return std::abs(phi1(jet.u) * op.apply(jet, phi2)) + std::abs(pairing(jet));
      },
      policy);
  return out;
}

IntegralGap cutoff_identity_check(const ParametricImmersion& base, const PositionMap& xi,
                                  const ScalarField& phi, const NormalField& eta,
                                  const QuadratureGrid& grid,
                                  const kernels::ExecutionPolicy& policy) {
  const StabilityOperator L = stability_operator_unchecked(base, OperatorMode::BundleL);
  const NormalField prod = product_field(phi, eta);
  IntegralGap out;
  out.lhs = integrate_weighted(
      base, xi, grid, [&](const GeometryJet& jet) { return prod(jet.u).dot(L.apply(jet, prod)); },
      policy);
  const auto rhs_terms = [&](const GeometryJet& jet) {
    const double p = phi(jet.u);
    const Vec e = eta(jet.u);
    const Vec g = gradient_coords(jet, phi, base.steps());
    return std::pair<double, double>{p * p * e.dot(L.apply(jet, eta)),
                                     g.dot(jet.metric * g) * e.squaredNorm()};
  };
  out.rhs = integrate_weighted(
      base, xi, grid,
      [&](const GeometryJet& jet) {
        const auto [a, b] = rhs_terms(jet);
        return a - b;
      },
      policy);
  out.scale = integrate_weighted(
      base, xi, grid,
      [&](const GeometryJet& jet) {
        const auto [a, b] = rhs_terms(jet);
        return std::abs(a) + std::abs(b);
      },
      policy);
  return out;
}

HeightIdentities height_identities(const ParametricImmersion& base, const Vec& v,
                                   const NormalField& N, const QuadratureGrid& grid,
                                   const kernels::ExecutionPolicy& policy) {
  require_xi_submanifold(base);
  if (!N.value) throw Error(ErrorCode::NoParallelFrame, "no parallel normal field given");
  const StabilityOperator L = stability_operator_unchecked(base, OperatorMode::BundleL);
  const StabilityOperator Ls = stability_operator_unchecked(base, OperatorMode::ScalarDrift);
  const ScalarField height = [N, v](const Vec& u) { return v.dot(N(u)); };
  const NormalField v_perp = project_to_normal(base, [v](const Vec&) { return v; }, "v_perp");
  std::vector<HeightIdentities> per(grid.size());
  kernels::for_each_index(
      grid.size(),
      [&](std::size_t k) {
        const GeometryJet jet = geometry_jet(base, grid.nodes[k]);
        const Vec n = N(jet.u);
        const Vec vp = jet.normal_part(v);
        const Vec tv = jet.tangent_coords(v);
        const Vec tx = jet.tangent_coords(jet.x_tan);
        const Mat A_xi = weingarten_map(jet, jet.mean_curvature + jet.x_perp);
        const Vec AN_tv = weingarten_map(jet, n) * tv;
        const double vn_rhs = -h_contraction(jet, n, vp) + AN_tv.dot(jet.metric * (A_xi * tx));
        const Vec h_term = second_fundamental_form(jet, A_xi * tx, tv);
        HeightIdentities r;
        r.vn_defect = std::abs(Ls.apply(jet, height) - vn_rhs);
        r.lvbot_defect = (L.apply(jet, v_perp) - vp - h_term).norm();
        r.condition_a = h_term.norm();
        per[k] = r;
      },
      policy);
  HeightIdentities out;
  for (const auto& r : per) {
    out.vn_defect = std::max(out.vn_defect, r.vn_defect);
    out.lvbot_defect = std::max(out.lvbot_defect, r.lvbot_defect);
    out.condition_a = std::max(out.condition_a, r.condition_a);
  }
  out.condition_a_holds = out.condition_a <= 1e-8;
  return out;
}

// ---------------------------------------------------------------------------
// Galerkin assembly

namespace {

struct Accumulator {
  Mat G;
  Mat K;
  Mat C;  // basis x constraints cross Gram

  Accumulator& operator+=(const Accumulator& o) {
    G += o.G;
    K += o.K;
    C += o.C;
    return *this;
  }
};

Accumulator zero_accumulator(const SpectralProblem& pb) {
  const auto B = static_cast<Eigen::Index>(pb.basis.size());
  const auto nc = static_cast<Eigen::Index>(pb.vp ? pb.constraints.size() : 0);
  return {Mat::Zero(B, B), Mat::Zero(B, B), Mat::Zero(B, nc)};
}

// Adds the contribution of quadrature node k.
void accumulate_node(const SpectralProblem& pb, std::size_t k, Accumulator& acc) {
  const Vec& u = pb.grid.nodes[k];
  const GeometryJet jet = geometry_jet(pb.base, u, quadrature_jet());
  const double c = pb.grid.weights[k] * jet.volume_density * gaussian_weight(jet, pb.xi);
  if (c == 0.0) return;
  const fd::StepPolicy& steps = pb.base.steps();
  const int m = jet.dim();
  const int n = jet.ambient_dim();
  const auto B = static_cast<Eigen::Index>(pb.basis.size());
  const Mat W = jet.orthonormal_factor();
  const bool bundle = pb.mode == OperatorMode::BundleL || pb.mode == OperatorMode::BundleDrift;
  const bool zero_order = pb.mode == OperatorMode::BundleL || pb.mode == OperatorMode::ScalarL;
  if (bundle != pb.basis.normal()) {
    throw Error(ErrorCode::InvalidArgument, "basis kind does not match the operator");
  }

  Mat values(B, bundle ? n : 1);
  Mat grads(B, bundle ? n * m : m);
  Mat curv(bundle && zero_order ? B : 0, m * m);
  for (Eigen::Index a = 0; a < B; ++a) {
    if (bundle) {
      const NormalField& f = pb.basis.normals[a];
      const Vec v = f(u);
      values.row(a) = v.transpose();
      const Mat DW = normal_derivatives(jet, f, steps) * W;
      grads.row(a) = Eigen::Map<const Eigen::RowVectorXd>(DW.data(), DW.size());
      if (zero_order) {
        Mat S(m, m);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) S(i, j) = jet.h(i, j).dot(v);
        const Mat WSW = W * S * W;
        curv.row(a) = Eigen::Map<const Eigen::RowVectorXd>(WSW.data(), WSW.size());
      }
    } else {
      const ScalarField& f = pb.basis.scalars[a];
      values(a, 0) = f(u);
      Vec d(m);
      for (int i = 0; i < m; ++i) d[i] = fd::first(f, u, i, steps.first);
      grads.row(a) = (W * d).transpose();
    }
  }
  const Mat mass = values * values.transpose();
  acc.G += c * mass;
  acc.K += c * (grads * grads.transpose());
  if (zero_order) {
    acc.K -= c * mass;
    if (bundle) acc.K -= c * (curv * curv.transpose());
  }
  if (pb.vp) {
    const auto nc = static_cast<Eigen::Index>(pb.constraints.size());
    for (Eigen::Index b = 0; b < nc; ++b) {
      if (bundle) {
        acc.C.col(b) += c * (values * pb.constraints.normals[b](u));
      } else {
        acc.C.col(b) += c * pb.constraints.scalars[b](u) * values.col(0);
      }
    }
  }
}

Accumulator assemble_accumulator(const SpectralProblem& pb, const kernels::ExecutionPolicy& policy) {
  if (!policy.parallel) {
    Accumulator acc = zero_accumulator(pb);
    for (std::size_t k = 0; k < pb.grid.size(); ++k) accumulate_node(pb, k, acc);
    return acc;
  }
  if (policy.reproducible) {
    return kernels::reduce_blocks(
        pb.grid.size(), zero_accumulator(pb),
        [&](std::size_t k, Accumulator& acc) { accumulate_node(pb, k, acc); }, policy);
  }
  // Per-thread partial sums, combined in completion order.
  Accumulator total = zero_accumulator(pb);
  std::exception_ptr failure;
  const auto count = static_cast<long long>(pb.grid.size());
#pragma omp parallel
  {
    Accumulator local = zero_accumulator(pb);
#pragma omp for schedule(dynamic, 16) nowait
    for (long long k = 0; k < count; ++k) {
      try {
        accumulate_node(pb, static_cast<std::size_t>(k), local);
      } catch (...) {
#pragma omp critical(xisub_assembly_error)
        if (!failure) failure = std::current_exception();
      }
    }
#pragma omp critical(xisub_assembly_sum)
    total += local;
  }
  if (failure) std::rethrow_exception(failure);
  return total;
}

}  // namespace

Assembly assemble_serial(const SpectralProblem& problem) {
  const Accumulator acc = assemble_accumulator(problem, {false, true});
  return {acc.G, acc.K};
}

Assembly assemble_parallel(const SpectralProblem& problem, bool reproducible) {
  const Accumulator acc = assemble_accumulator(problem, {true, reproducible});
  return {acc.G, acc.K};
}

Assembly assemble(const SpectralProblem& problem, const kernels::ExecutionPolicy& policy) {
  const Accumulator acc = assemble_accumulator(problem, policy);
  return {acc.G, acc.K};
}

int Spectrum::negative_count(double tol) const {
  int count = 0;
  for (double l : eigenvalues)
    if (l < -tol) ++count;
  return count;
}

nlohmann::json Spectrum::to_json() const {
  return {{"eigenvalues", eigenvalues},
          {"gram_condition", gram_condition},
          {"symmetry_defect", symmetry_defect},
          {"max_residual", max_residual},
          {"dimension", constrained_dimension},
          {"negative_count", negative_count()}};
}

Spectrum galerkin_spectrum(const SpectralProblem& problem, const kernels::ExecutionPolicy& policy) {
  if (problem.basis.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty basis");
  if (problem.vp && problem.constraints.size() == 0) {
    throw Error(ErrorCode::NoParallelFrame, "VP restriction requested without constraint fields");
  }
  const Accumulator acc = assemble_accumulator(problem, policy);
  Spectrum out;
  out.G = 0.5 * (acc.G + acc.G.transpose());
  const double kmax = acc.K.cwiseAbs().maxCoeff();
  out.symmetry_defect = kmax > 0.0 ? (acc.K - acc.K.transpose()).cwiseAbs().maxCoeff() / kmax : 0.0;
  out.K = 0.5 * (acc.K + acc.K.transpose());

  const Eigen::SelfAdjointEigenSolver<Mat> gram(out.G, Eigen::EigenvaluesOnly);
  const double lo = gram.eigenvalues().minCoeff();
  const double hi = gram.eigenvalues().maxCoeff();
  out.gram_condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(out.gram_condition <= 1e8)) {
    std::ostringstream os;
    os << "Gram matrix condition number " << out.gram_condition;
    throw Error(ErrorCode::IllConditionedBasis, os.str());
  }

  // Coefficient subspace orthogonal to the constraints.
  const auto B = out.G.rows();
  Mat Nsp = Mat::Identity(B, B);
  if (problem.vp) {
    Eigen::ColPivHouseholderQR<Mat> qr(acc.C);
    qr.setThreshold(1e-10);
    const auto rank = qr.rank();
    const Mat Q = qr.householderQ() * Mat::Identity(B, B);
    Nsp = Q.rightCols(B - rank);
  }
  out.constrained_dimension = static_cast<int>(Nsp.cols());
  const Mat Gr = Nsp.transpose() * out.G * Nsp;
  const Mat Kr = Nsp.transpose() * out.K * Nsp;
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Kr, Gr);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::IllConditionedBasis, "generalized eigensolver failed");
  }
  const Vec lambda = es.eigenvalues();
  const Mat Y = es.eigenvectors();
  out.vectors = Nsp * Y;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    out.eigenvalues.push_back(lambda[i]);
    const Vec v = out.vectors.col(i);
    const Vec r = Nsp.transpose() * (out.K * v - lambda[i] * (out.G * v));
    out.max_residual = std::max(out.max_residual, r.cwiseAbs().maxCoeff() / v.norm());
  }
  return out;
}

// ---------------------------------------------------------------------------
// bases

GalerkinBasis hermite_scalar_basis(int m, int max_degree) {
  GalerkinBasis basis;
  std::ostringstream os;
  os << "Hermite products, degree <= " << max_degree << ", m = " << m;
  basis.description = os.str();
  for (const HermiteIndex& idx : multi_indices(m, max_degree)) {
    std::ostringstream label;
    label << "He(";
    for (std::size_t i = 0; i < idx.size(); ++i) label << (i ? "," : "") << idx[i];
    label << ")";
    basis.labels.push_back(label.str());
    basis.scalars.push_back([idx](const Vec& u) { return hermite_eval(idx, u); });
  }
  return basis;
}

GalerkinBasis fourier_scalar_basis(int max_mode) {
  GalerkinBasis basis;
  basis.description = "Fourier modes |k| <= " + std::to_string(max_mode);
  basis.labels.push_back("1");
  basis.scalars.push_back([](const Vec&) { return 1.0; });
  for (int k = 1; k <= max_mode; ++k) {
    basis.labels.push_back("cos" + std::to_string(k));
    basis.scalars.push_back([k](const Vec& u) { return std::cos(k * u[0]); });
    basis.labels.push_back("sin" + std::to_string(k));
    basis.scalars.push_back([k](const Vec& u) { return std::sin(k * u[0]); });
  }
  return basis;
}

GalerkinBasis spherical_harmonic_basis(int max_degree) {
  GalerkinBasis basis;
  basis.description = "real spherical harmonics, degree <= " + std::to_string(max_degree);
  for (int l = 0; l <= max_degree; ++l) {
    const auto ul = static_cast<unsigned>(l);
    basis.labels.push_back("Y" + std::to_string(l) + ",0");
    basis.scalars.push_back([ul](const Vec& u) { return std::sph_legendre(ul, 0u, u[0]); });
    for (int mm = 1; mm <= l; ++mm) {
      const auto um = static_cast<unsigned>(mm);
      basis.labels.push_back("Y" + std::to_string(l) + ",+" + std::to_string(mm));
      basis.scalars.push_back([ul, um](const Vec& u) {
        return std::sqrt(2.0) * std::sph_legendre(ul, um, u[0]) * std::cos(um * u[1]);
      });
      basis.labels.push_back("Y" + std::to_string(l) + ",-" + std::to_string(mm));
      basis.scalars.push_back([ul, um](const Vec& u) {
        return std::sqrt(2.0) * std::sph_legendre(ul, um, u[0]) * std::sin(um * u[1]);
      });
    }
  }
  return basis;
}

GalerkinBasis tensor_basis(const GalerkinBasis& scalars, const std::vector<NormalField>& normals) {
  GalerkinBasis basis;
  basis.description = scalars.description + " x " + std::to_string(normals.size()) + " normal fields";
  for (std::size_t a = 0; a < normals.size(); ++a) {
    for (std::size_t s = 0; s < scalars.scalars.size(); ++s) {
      basis.labels.push_back(scalars.labels[s] + "*" + normals[a].label);
      basis.normals.push_back(product_field(scalars.scalars[s], normals[a]));
    }
  }
  return basis;
}

GalerkinBasis constraint_basis(const std::vector<NormalField>& frame) {
  GalerkinBasis basis;
  basis.description = "parallel normal frame";
  for (const auto& f : frame) {
    basis.labels.push_back(f.label);
    basis.normals.push_back(f);
  }
  return basis;
}

SpectralProblem sphere_problem(int m, int p, double r, bool vp, int max_degree) {
  if (m != 1 && m != 2) throw Error(ErrorCode::UnsupportedSpec, "sphere spectra exist for m = 1, 2");
  const CatalogImmersion item = make_sphere(m, r, p);
  const GalerkinBasis scalars =
      m == 1 ? fourier_scalar_basis(max_degree) : spherical_harmonic_basis(max_degree);
  const int nodes = m == 1 ? 4 * max_degree + 16 : 4 * max_degree + 8;
  SpectralProblem pb{item.immersion, item.xi, OperatorMode::BundleL,
                     tensor_basis(scalars, item.parallel_frame),
                     variation_grid(item.immersion, nodes), vp, {}};
  if (vp) pb.constraints = constraint_basis(item.parallel_frame);
  return pb;
}

SpectralProblem plane_scalar_problem(int m, int max_degree) {
  const CatalogImmersion item = make_plane(m, 1, Vec::Zero(m + 1), 16.0);
  const int nodes = m == 1 ? 128 : 80;
  return SpectralProblem{item.immersion, item.xi, OperatorMode::ScalarL,
                         hermite_scalar_basis(m, max_degree),
                         variation_grid(item.immersion, nodes), false, {}};
}

// ---------------------------------------------------------------------------
// Hermite polynomials

double hermite(int n, double u) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "negative Hermite degree");
  if (n > 30) throw Error(ErrorCode::DegreeTooLarge, "Hermite degree above 30");
  double prev = 0.0, cur = 1.0;
  for (int k = 0; k < n; ++k) {
    const double next = u * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double hermite_eval(const HermiteIndex& idx, const Vec& u) {
  if (static_cast<Eigen::Index>(idx.size()) != u.size()) {
    throw Error(ErrorCode::InvalidArgument, "multi-index and point dimensions differ");
  }
  int degree = 0;
  for (int n : idx) {
    if (n < 0) throw Error(ErrorCode::InvalidArgument, "negative Hermite index");
    degree += n;
  }
  if (degree > 30) throw Error(ErrorCode::DegreeTooLarge, "Hermite degree above 30");
  double out = 1.0;
  for (std::size_t i = 0; i < idx.size(); ++i) out *= hermite(idx[i], u[static_cast<Eigen::Index>(i)]);
  return out;
}

double ou_eigen_check(const HermiteIndex& idx, const QuadratureGrid& grid) {
  int degree = 0;
  for (int n : idx) degree += n;
  if (degree > 30) throw Error(ErrorCode::DegreeTooLarge, "Hermite degree above 30");
  const auto d1 = [](int n, double u) { return n == 0 ? 0.0 : n * hermite(n - 1, u); };
  const auto d2 = [](int n, double u) { return n < 2 ? 0.0 : n * (n - 1) * hermite(n - 2, u); };
  double worst = 0.0;
  for (const Vec& u : grid.nodes) {
    const auto m = idx.size();
    std::vector<double> h(m), h1(m), h2(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double x = u[static_cast<Eigen::Index>(i)];
      h[i] = hermite(idx[i], x);
      h1[i] = d1(idx[i], x);
      h2[i] = d2(idx[i], x);
    }
    double value = 1.0, lap = 0.0, drift = 0.0;
    for (std::size_t i = 0; i < m; ++i) value *= h[i];
    for (std::size_t i = 0; i < m; ++i) {
      double rest = 1.0;
      for (std::size_t j = 0; j < m; ++j)
        if (j != i) rest *= h[j];
      lap += h2[i] * rest;
      drift += u[static_cast<Eigen::Index>(i)] * h1[i] * rest;
    }
    const double defect = std::abs(-lap + drift - degree * value);
    worst = std::max(worst, defect / (1.0 + degree * std::abs(value)));
  }
  return worst;
}

std::vector<HermiteIndex> multi_indices(int m, int max_degree) {
  std::vector<HermiteIndex> out;
  for (int d = 0; d <= max_degree; ++d) {
    HermiteIndex idx(m, 0);
    // enumerate compositions of d into m parts
    const auto rec = [&](auto&& self, int pos, int left) -> void {
      if (pos == m - 1) {
        idx[pos] = left;
        out.push_back(idx);
        return;
      }
      for (int k = left; k >= 0; --k) {
        idx[pos] = k;
        self(self, pos + 1, left - k);
      }
    };
    rec(rec, 0, d);
  }
  return out;
}

namespace {

// 1-D Gaussian-weighted Gram matrix of He_0..He_d on [-12, 12].
Mat hermite_gram_1d(int d) {
  const QuadratureGrid g = tensor_grid({Axis{-12.0, 12.0, false, 0.0}}, {96});
  Mat G = Mat::Zero(d + 1, d + 1);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double u = g.nodes[k][0];
    const double w = g.weights[k] * std::exp(-0.5 * u * u);
    Vec h(d + 1);
    for (int n = 0; n <= d; ++n) h[n] = hermite(n, u);
    G += w * h * h.transpose();
  }
  return G;
}

}  // namespace

double hermite_orthogonality_defect(int m, int max_degree) {
  const Mat G1 = hermite_gram_1d(max_degree);
  const auto idx = multi_indices(m, max_degree);
  const auto inner = [&](const HermiteIndex& a, const HermiteIndex& b) {
    double v = 1.0;
    for (int i = 0; i < m; ++i) v *= G1(a[i], b[i]);
    return v;
  };
  double worst = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      worst = std::max(worst, std::abs(inner(idx[a], idx[b])) /
                                  std::sqrt(inner(idx[a], idx[a]) * inner(idx[b], idx[b])));
  return worst;
}

std::vector<double> hermite_projection_residuals(const ScalarField& phi, int m, int max_degree) {
  const int nodes = m == 1 ? 96 : 48;
  const QuadratureGrid g =
      tensor_grid(Box(m, Axis{-12.0, 12.0, false, 0.0}), std::vector<int>(m, nodes));
  const auto idx = multi_indices(m, max_degree);
  const auto n = static_cast<Eigen::Index>(g.size());
  Vec w(n), f(n);
  Mat H(n, static_cast<Eigen::Index>(idx.size()));
  for (Eigen::Index k = 0; k < n; ++k) {
    const Vec& u = g.nodes[k];
    w[k] = g.weights[k] * std::exp(-0.5 * u.squaredNorm());
    f[k] = phi(u);
    for (std::size_t a = 0; a < idx.size(); ++a) H(k, static_cast<Eigen::Index>(a)) = hermite_eval(idx[a], u);
  }
  std::vector<double> out;
  Vec residual = f;
  std::size_t used = 0;
  for (int d = 0; d <= max_degree; ++d) {
    // indices are graded, so degree d adds a contiguous block
    while (used < idx.size()) {
      int deg = 0;
      for (int v : idx[used]) deg += v;
      if (deg > d) break;
      const Vec h = H.col(static_cast<Eigen::Index>(used));
      const double c = (w.array() * f.array() * h.array()).sum() /
                       (w.array() * h.array() * h.array()).sum();
      residual -= c * h;
      ++used;
    }
    out.push_back(std::sqrt((w.array() * residual.array().square()).sum()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// sphere index

long harmonic_multiplicity(int m, int k) {
  const auto binom = [](int n, int r) -> long {
    if (r < 0 || n < r) return 0;
    long v = 1;
    for (int i = 1; i <= r; ++i) v = v * (n - r + i) / i;
    return v;
  };
  return binom(m + k, m) - binom(m + k - 2, m);
}

SphereIndex sphere_index(int m, int p, double r, bool vp, int k_max) {
  if (m < 1 || p < 1 || !(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "need m, p >= 1 and r > 0");
  SphereIndex out;
  const double r2 = r * r;
  constexpr double kZeroTol = 1e-9;
  for (int k = vp ? 1 : 0;; ++k) {
    const double lap = k * (m + k - 1) / r2;
    const double mu = lap - 1.0 - m / r2;
    const double nu = lap - 1.0;
    const long mult = harmonic_multiplicity(m, k);
    out.bands.push_back({"radial", k, mult, mu});
    if (mu < -kZeroTol) out.index += static_cast<int>(mult);
    if (p > 1) {
      out.bands.push_back({"transverse", k, mult * (p - 1), nu});
      if (nu < -kZeroTol) out.index += static_cast<int>(mult * (p - 1));
    }
    if (k >= k_max && mu > kZeroTol) break;
  }
  return out;
}

std::string bands_csv(const SphereIndex& index) {
  std::ostringstream os;
  os.precision(17);
  os << "band,k,multiplicity,value\n";
  for (const auto& b : index.bands) os << b.band << "," << b.k << "," << b.multiplicity << "," << b.value << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// witnesses

double radial_cutoff(double rho, double R) {
  if (rho <= R) return 1.0;
  if (rho >= R + 2.0) return 0.0;
  const double s = 0.5 * (rho - R);
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

namespace {

double plane_cutoff_Q(int m, double R) {
  const double half = R + 2.0;
  const CatalogImmersion plane = make_plane(m, 1, Vec::Zero(m + 1), half);
  const Vec N = Vec::Unit(m + 1, m);
  NormalField eta;
  eta.value = [N, R, m](const Vec& u) { return Vec(radial_cutoff(u.head(m).norm(), R) * N); };
  eta.compact = true;
  const int nodes = m == 1 ? 96 : 64;
  const QuadratureGrid grid = variation_grid(plane.immersion, nodes);
  return second_variation(plane.immersion, plane.xi, eta, grid, {}, false);
}

}  // namespace

Witness instability_witness(WitnessKind kind, const WitnessParams& params) {
  Witness out;
  switch (kind) {
    case WitnessKind::SphereRadial: {
      const CatalogImmersion s = make_sphere(params.m, params.r, params.p);
      const QuadratureGrid grid = variation_grid(s.immersion, params.m == 3 ? 16 : 32);
      NormalField eta;
      eta.value = [imm = s.immersion](const Vec& u) { return imm.position(u); };
      eta.label = "x";
      out.Q = second_variation(s.immersion, s.xi, eta, grid);
      out.V = weighted_volume(s.immersion, s.xi, grid).V;
      break;
    }
    case WitnessKind::ParallelNormal: {
      const CatalogImmersion c = make_product(make_sphere(1, params.r), make_plane(1, 1, Vec::Zero(2)));
      if (params.frame_index >= c.parallel_frame.size()) {
        throw Error(ErrorCode::NoParallelFrame, "frame index out of range");
      }
      const QuadratureGrid grid = variation_grid(c.immersion, 48);
      out.Q = second_variation(c.immersion, c.xi, c.parallel_frame[params.frame_index], grid);
      out.V = weighted_volume(c.immersion, c.xi, grid).V;
      break;
    }
    case WitnessKind::PlaneCutoff: {
      out.Q = plane_cutoff_Q(params.m, params.R);
      out.V = std::pow(2.0 * kPi, 0.5 * params.m);
      for (double R = 0.0; R <= params.R + 1e-12; R += 0.5) {
        if (plane_cutoff_Q(params.m, R) < 0.0) {
          out.threshold = R;
          break;
        }
      }
      break;
    }
  }
  return out;
}

WStability plane_w_stability(int m, int max_degree) {
  const CatalogImmersion plane = make_plane(m, 1, Vec::Zero(m + 1), 16.0);
  const QuadratureGrid grid = variation_grid(plane.immersion, m == 1 ? 128 : 72);
  WStability out;
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.unconstrained_min = std::numeric_limits<double>::infinity();
  const GalerkinBasis fields = tensor_basis(hermite_scalar_basis(m, max_degree), plane.parallel_frame);
  const auto norm2 = [&](const NormalField& eta) {
    return integrate_weighted(
        plane.immersion, plane.xi, grid,
        [&](const GeometryJet& jet) { return eta(jet.u).squaredNorm(); }, {});
  };
  for (const NormalField& eta : fields.normals) {
    const double n0 = norm2(eta);
    out.unconstrained_min = std::min(
        out.unconstrained_min, second_variation_weak(plane.immersion, plane.xi, eta, grid) / n0);
    const NormalField proj = vp_project(plane.immersion, plane.xi, eta, plane.parallel_frame, grid);
    // projection may annihilate the field; compare against the original norm
    const double q = second_variation_weak(plane.immersion, plane.xi, proj, grid);
    out.min_ratio = std::min(out.min_ratio, q / n0);
    ++out.fields;
  }
  return out;
}

}  // namespace xisub
