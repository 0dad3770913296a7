#include "spqm/parallel.hpp"

#include <cstdlib>
#include <string>

namespace spqm {

int worker_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_worker_count(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

int apply_worker_env() {
    if (const char* v = std::getenv(kWorkerEnv)) {
        try {
            const int n = std::stoi(v);
            if (n > 0) set_worker_count(n);
        } catch (const std::exception&) {
            // Ignore malformed values and keep the OpenMP default.
        }
    }
    return worker_count();
}

}  // namespace spqm
