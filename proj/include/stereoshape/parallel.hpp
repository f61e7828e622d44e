#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace stereoshape {

// Runs fn(i) for i in [0, count) across `jobs` threads. The body must be a
// pure gather into slots owned by i; results are then independent of the
// schedule. The first exception thrown by any worker is rethrown on the
// calling thread. jobs == 0 means hardware concurrency.
template <typename Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::atomic<bool> abort{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) {
                    if (abort.load(std::memory_order_relaxed)) return;
                    fn(i);
                }
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                abort.store(true, std::memory_order_relaxed);
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace stereoshape
