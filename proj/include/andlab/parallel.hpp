#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace andlab {

// Runs fn(i) for i in [0, total) across a fixed pool. Work is claimed from an
// atomic counter, so assignment of trials to threads is nondeterministic, but
// callers index their outputs by i and reduce in index order, which keeps
// every aggregate byte-identical across worker counts.
inline void run_indexed(long long total, int workers,
                        const std::function<void(long long)>& fn) {
    if (total <= 0) return;
    const int n = std::max(1, std::min<long long>(workers, total) > 0
                                  ? static_cast<int>(std::min<long long>(workers, total))
                                  : 1);
    if (n == 1) {
        for (long long i = 0; i < total; ++i) fn(i);
        return;
    }
    std::atomic<long long> next{0};
    std::exception_ptr first_error;
    std::mutex error_lock;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const long long i = next.fetch_add(1);
                if (i >= total) return;
                {
                    std::lock_guard<std::mutex> g(error_lock);
                    if (first_error) return;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> g(error_lock);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

template <typename T>
std::vector<T> parallel_map(long long total, int workers,
                            const std::function<T(long long)>& fn) {
    std::vector<T> out(static_cast<std::size_t>(total));
    run_indexed(total, workers,
                [&](long long i) { out[static_cast<std::size_t>(i)] = fn(i); });
    return out;
}

}  // namespace andlab
