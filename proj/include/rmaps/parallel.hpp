#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace rmaps {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must be written
// into pre-sized slots; scheduling is by contiguous blocks so output order is
// independent of the number of threads.
inline void parallel_for_index(int n, int jobs, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (int t = 0; t < jobs; ++t) {
        int lo = static_cast<int>(static_cast<long long>(n) * t / jobs);
        int hi = static_cast<int>(static_cast<long long>(n) * (t + 1) / jobs);
        workers.emplace_back([=]() {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& w : workers) w.join();
}

}  // namespace rmaps
