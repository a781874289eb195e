#pragma once

// Data-parallel reduction kernels.  Each kernel has a plain serial reference
// loop and an OpenMP version; the reproducible OpenMP path fixes the summation
// order independently of the thread count.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace xisub::kernels {

struct ExecutionPolicy {
  bool parallel = true;
  /// Fixed block decomposition and pairwise combination, so results are
  /// bitwise identical across runs and thread counts.
  bool reproducible = true;
};

inline constexpr std::size_t kBlock = 64;

/// Sums values[0..n) by recursive halving.
double pairwise_sum(const double* values, std::size_t n);

inline double pairwise_sum(const std::vector<double>& values) {
  return pairwise_sum(values.data(), values.size());
}

/// Runs f(i) for i in [0, n); exceptions from worker threads are rethrown.
template <class F>
void for_each_index(std::size_t n, F&& f, const ExecutionPolicy& policy = {}) {
  if (!policy.parallel) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex guard;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 8)
  for (long long i = 0; i < count; ++i) {
    try {
      f(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

template <class F>
double reduce_sum_serial(std::size_t n, F&& term) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += term(i);
  return acc;
}

template <class F>
double reduce_sum_parallel(std::size_t n, F&& term, bool reproducible) {
  if (reproducible) {
    std::vector<double> values(n);
    for_each_index(n, [&](std::size_t i) { values[i] = term(i); });
    return pairwise_sum(values);
  }
  std::exception_ptr failure;
  std::mutex guard;
  double acc = 0.0;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for reduction(+ : acc) schedule(static)
  for (long long i = 0; i < count; ++i) {
    try {
      acc += term(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return acc;
}

template <class F>
double reduce_sum(std::size_t n, F&& term, const ExecutionPolicy& policy = {}) {
  if (!policy.parallel) return reduce_sum_serial(n, term);
  return reduce_sum_parallel(n, term, policy.reproducible);
}

/// Accumulates accumulate(i, acc) over i into copies of zero, one copy per
/// block of kBlock indices, then combines block results in index order.
template <class T, class F>
T reduce_blocks(std::size_t n, const T& zero, F&& accumulate,
                const ExecutionPolicy& policy = {}) {
  if (!policy.parallel) {
    T acc = zero;
    for (std::size_t i = 0; i < n; ++i) accumulate(i, acc);
    return acc;
  }
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<T> partial(blocks, zero);
  for_each_index(blocks, [&](std::size_t b) {
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) accumulate(i, partial[b]);
  });
  T acc = zero;
  for (const T& p : partial) acc += p;
  return acc;
}

int thread_count();

}  // namespace xisub::kernels
