#include "elastix/util.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <thread>
#include <vector>

namespace elastix {

int assembly_thread_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    int n = static_cast<int>(hw);
    if (const char* env = std::getenv("ELASTIX_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1) n = std::min<long>(n, cap);
    }
    return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const int nthreads = assembly_thread_count();
    if (nthreads <= 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    const std::size_t chunk = (n + static_cast<std::size_t>(nthreads) - 1) / static_cast<std::size_t>(nthreads);
    for (int t = 0; t < nthreads; ++t) {
        const std::size_t lo = static_cast<std::size_t>(t) * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace elastix
