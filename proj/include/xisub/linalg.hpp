#pragma once

#include <Eigen/Dense>

#include <vector>

namespace xisub {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Ambient dot product shorthand.
inline double dot(const Vec& a, const Vec& b) { return a.dot(b); }

}  // namespace xisub
