#pragma once

#include "xisub/immersion.hpp"

#include <cmath>
#include <numbers>

namespace testing {

using xisub::Mat;
using xisub::Vec;

inline Mat rotation3(double a, double b) {
  Mat Rz = Mat::Identity(3, 3), Rx = Mat::Identity(3, 3);
  Rz(0, 0) = std::cos(a), Rz(0, 1) = -std::sin(a), Rz(1, 0) = std::sin(a), Rz(1, 1) = std::cos(a);
  Rx(1, 1) = std::cos(b), Rx(1, 2) = -std::sin(b), Rx(2, 1) = std::sin(b), Rx(2, 2) = std::cos(b);
  return Rz * Rx;
}

/// Q applied to the immersion and all of its jets.
inline xisub::ParametricImmersion rotated(const xisub::ParametricImmersion& imm, const Mat& Q) {
  xisub::ParametricImmersion out(imm.dim(), imm.codim(), imm.domain(),
                                 [imm, Q](const Vec& u) -> Vec { return Q * imm.position(u); });
  out.with_jacobian([imm, Q](const Vec& u) -> Mat { return Q * imm.jacobian(u); })
      .with_hessian([imm, Q](const Vec& u) {
        auto H = imm.hessian(u);
        for (auto& h : H) h = Q * h;
        return H;
      })
      .with_scale(imm.scale())
      .with_steps(imm.steps());
  return out;
}

/// |S^m(1)| = 2 pi^{(m+1)/2} / Gamma((m+1)/2).
inline double unit_sphere_area(int m) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1));
}

}  // namespace testing
