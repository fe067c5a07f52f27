#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace pin {

/// Runs f(i) for i in [0, n) across the OpenMP worker pool. Callers write
/// into slot i only, so results do not depend on scheduling. The first
/// exception thrown by any iteration is rethrown after the loop.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  std::exception_ptr err;
  std::mutex m;
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    try {
      f(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(m);
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace pin
