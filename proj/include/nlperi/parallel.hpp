#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace nlperi {

// Thread budget: NLPERI_THREADS caps parallelism, otherwise hardware width.
inline int thread_count() {
    if (const char* env = std::getenv("NLPERI_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<int>(std::min<long>(v, 256));
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// Static-partition parallel loop over [0, count). The partition depends only on
// the active thread budget, and callers never reduce across the partition
// directly: reductions go through per-item slots combined in index order (see
// parallel_reduce_rows), so results are bitwise independent of the thread count.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body) {
    const int nt = std::min<std::size_t>(thread_count(), count ? count : 1);
    if (nt <= 1 || count < 2) {
        body(0, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (count + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
        const std::size_t lo = std::min(count, t * chunk);
        const std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

// Deterministic reduction: each row i computes its partial sum sequentially,
// partials are then combined in fixed row order on one thread. Bitwise
// reproducible for any thread count.
inline double parallel_reduce_rows(std::size_t rows, const std::function<double(std::size_t)>& row_sum) {
    std::vector<double> partial(rows, 0.0);
    parallel_for(rows, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) partial[i] = row_sum(i);
    });
    double acc = 0.0;
    for (std::size_t i = 0; i < rows; ++i) acc += partial[i];
    return acc;
}

} // namespace nlperi
