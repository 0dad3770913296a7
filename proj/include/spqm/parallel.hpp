#pragma once

#include <cstdint>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spqm {

/// Parallel kernels run under OpenMP; the serial variant is the reference used in tests.
enum class Execution { Parallel, Serial };

/// Environment variable that overrides the worker count.
inline constexpr const char* kWorkerEnv = "SPQM_NUM_THREADS";

int worker_count();
void set_worker_count(int n);
/// Apply SPQM_NUM_THREADS if set; returns the resulting worker count.
int apply_worker_env();

/// \brief Run f(i) for i in [0, n). Work items must write to disjoint outputs.
template <class F>
void for_each_index(Execution exec, std::int64_t n, F&& f) {
    if (exec == Execution::Serial) {
        for (std::int64_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::exception_ptr err = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            f(i);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(spqm_for_each_error)
#endif
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

}  // namespace spqm
