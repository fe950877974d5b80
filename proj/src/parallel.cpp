#include "collapse/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace collapse {

namespace {
std::atomic<int> g_override{0};

int env_cap()
{
    const char* raw = std::getenv("COLLAPSE_WALK_THREADS");
    if (raw == nullptr) {
        return 0;
    }
    try {
        const int n = std::stoi(raw);
        return n > 0 ? n : 0;
    } catch (const std::exception&) {
        return 0;
    }
}
}  // namespace

int worker_count()
{
    if (const int forced = g_override.load(); forced > 0) {
        return forced;
    }
#ifdef _OPENMP
    int n = omp_get_max_threads();
#else
    int n = 1;
#endif
    if (const int cap = env_cap(); cap > 0 && cap < n) {
        n = cap;
    }
    return n;
}

void set_worker_count(int n)
{
    g_override.store(n > 0 ? n : 0);
}

}  // namespace collapse
