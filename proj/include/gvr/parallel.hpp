#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace gvr {

// Thread count resolution: GVR_THREADS env var overrides, then the requested
// value, then hardware concurrency.
inline int resolve_threads(int requested) {
    if (const char* env = std::getenv("GVR_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(worker, begin, end) over contiguous partitions of [0, count).
// Partitioning depends only on (count, workers), so writes to disjoint regions
// and worker-ordered reductions are reproducible.
template <typename Fn>
void parallel_for_partitions(int count, int workers, const Fn& fn) {
    workers = std::max(1, std::min(workers, count));
    if (workers <= 1) {
        if (count > 0) fn(0, 0, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int base = count / workers;
    const int extra = count % workers;
    int begin = 0;
    for (int w = 0; w < workers; ++w) {
        const int len = base + (w < extra ? 1 : 0);
        pool.emplace_back(fn, w, begin, begin + len);
        begin += len;
    }
    for (auto& t : pool) t.join();
}

}  // namespace gvr
