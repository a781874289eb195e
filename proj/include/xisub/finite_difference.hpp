#pragma once

// Fourth-order central difference stencils over chart coordinates.
//
// Steps scale with (1 + |u_i|) so that relative perturbations stay constant
// far from the chart origin.  First derivatives use eps^(1/5), second
// derivatives eps^(1/6); these are the roundoff/truncation balance points of
// the fourth-order stencils.

#include "xisub/linalg.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <type_traits>

namespace xisub::fd {

struct StepPolicy {
  double first = std::pow(std::numeric_limits<double>::epsilon(), 0.2);
  double second = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / 6.0);
};

inline const StepPolicy& default_policy() {
  static const StepPolicy policy{};
  return policy;
}

/// Step actually representable at u (so that (u + h) - u == h).
inline double exact_step(double u, double scale) {
  volatile double probe = u + scale * (1.0 + std::abs(u));
  return probe - u;
}

namespace detail {
inline constexpr std::array<int, 4> kOffsets{-2, -1, 1, 2};
inline constexpr std::array<double, 4> kFirstWeights{1.0, -8.0, 8.0, -1.0};
}  // namespace detail

template <class F>
using value_t = std::decay_t<std::invoke_result_t<const F&, const Vec&>>;

/// d/du_i of fn at u.
template <class F>
value_t<F> first(const F& fn, const Vec& u, int i, double scale) {
  const double h = exact_step(u[i], scale);
  Vec v = u;
  v[i] = u[i] - 2 * h;
  value_t<F> acc = detail::kFirstWeights[0] * fn(v);
  for (int k = 1; k < 4; ++k) {
    v[i] = u[i] + detail::kOffsets[k] * h;
    acc += detail::kFirstWeights[k] * fn(v);
  }
  return acc / (12.0 * h);
}

template <class F>
value_t<F> first(const F& fn, const Vec& u, int i) {
  return first(fn, u, i, default_policy().first);
}

/// d^2/du_i du_j of fn at u; f0 is fn(u), passed in to avoid re-evaluation.
template <class F>
value_t<F> second(const F& fn, const Vec& u, int i, int j, const value_t<F>& f0,
                  double scale) {
  Vec v = u;
  if (i == j) {
    const double h = exact_step(u[i], scale);
    v[i] = u[i] + h;
    value_t<F> acc = 16.0 * fn(v);
    v[i] = u[i] - h;
    acc += 16.0 * fn(v);
    v[i] = u[i] + 2 * h;
    acc -= fn(v);
    v[i] = u[i] - 2 * h;
    acc -= fn(v);
    acc -= 30.0 * f0;
    return acc / (12.0 * h * h);
  }
  const double hi = exact_step(u[i], scale);
  const double hj = exact_step(u[j], scale);
  value_t<F> acc = 0.0 * f0;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      v[i] = u[i] + detail::kOffsets[a] * hi;
      v[j] = u[j] + detail::kOffsets[b] * hj;
      acc += (detail::kFirstWeights[a] * detail::kFirstWeights[b]) * fn(v);
    }
  }
  return acc / (144.0 * hi * hj);
}

template <class F>
value_t<F> second(const F& fn, const Vec& u, int i, int j, const value_t<F>& f0) {
  return second(fn, u, i, j, f0, default_policy().second);
}

}  // namespace xisub::fd
