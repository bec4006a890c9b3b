#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace potlab {

/// Which kernel variant to run. The serial path is the reference the
/// OpenMP path is tested against.
enum class Execution { kSerial, kParallel };

inline int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_worker_count(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

/// out[i] = fn(i). Each index is computed independently, so the result does
/// not depend on the execution policy or the number of workers.
template <class T, class Fn>
std::vector<T> map_indices(std::size_t count, Execution exec, Fn&& fn) {
  std::vector<T> out(count);
  const auto n = static_cast<long long>(count);
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (long long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
  } else {
    for (long long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
  }
  return out;
}

inline constexpr std::size_t kReductionBlock = 2048;

/// Sum of term(i) over [0, count) using fixed blocks combined in index order.
/// Block boundaries do not depend on the worker count, so the rounding is
/// identical for any thread count and for both execution policies.
template <class T, class Fn>
T blocked_sum(std::size_t count, T zero, Execution exec, Fn&& term) {
  const std::size_t blocks = (count + kReductionBlock - 1) / kReductionBlock;
  auto partial = map_indices<T>(blocks, exec, [&](std::size_t b) {
    T acc = zero;
    const std::size_t end = std::min(count, (b + 1) * kReductionBlock);
    for (std::size_t i = b * kReductionBlock; i < end; ++i) acc += term(i);
    return acc;
  });
  T total = zero;
  for (const T& p : partial) total += p;
  return total;
}

}  // namespace potlab
