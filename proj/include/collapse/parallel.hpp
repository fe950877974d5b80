#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

namespace collapse {

/// Kernel execution policy. `serial` is the reference path; `parallel` runs
/// the same per-index work under OpenMP and must produce identical results.
enum class Exec { serial, parallel };

/// Worker cap: explicit override if set, else COLLAPSE_WALK_THREADS, else the
/// OpenMP default.
int worker_count();

/// Overrides the worker cap for subsequent parallel kernels; 0 clears it.
void set_worker_count(int n);

/// Runs body(i) for i in [0, n). Iterations must only write to slots owned by
/// their index. If iterations throw, the exception of the lowest index is
/// rethrown after the loop, whatever the schedule.
template <class Body>
void for_each_index(Exec exec, std::size_t n, Body&& body)
{
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count())
    for (std::int64_t i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace collapse
