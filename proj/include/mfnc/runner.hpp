#pragma once

#include <cstddef>
#include <exception>
#include <optional>
#include <type_traits>
#include <vector>

#include <omp.h>

namespace mfnc {

enum class Execution { serial, openmp };

/// jobs <= 0 means all available threads.
int resolve_jobs(int jobs);

/// results[r] = task(r) for r in [0, count). The serial path is the reference;
/// the OpenMP path must agree with it bit for bit, since every task draws its
/// randomness from counter-based streams keyed by r. If tasks throw, the
/// exception of the lowest failing index is rethrown after all tasks finish.
template <class F>
auto run_replicates(std::size_t count, F&& task, Execution ex = Execution::openmp, int jobs = 0)
    -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  using T = std::invoke_result_t<F&, std::size_t>;
  std::vector<std::optional<T>> slots(count);
  std::vector<std::exception_ptr> errors(count);

  if (ex == Execution::serial) {
    for (std::size_t r = 0; r < count; ++r) {
      try {
        slots[r].emplace(task(r));
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  } else {
    const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_jobs(jobs))
    for (long long r = 0; r < n; ++r) {
      const auto i = static_cast<std::size_t>(r);
      try {
        slots[i].emplace(task(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  }

  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace mfnc
