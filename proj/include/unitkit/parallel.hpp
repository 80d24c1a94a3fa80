#ifndef UNITKIT_PARALLEL_HPP
#define UNITKIT_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace unitkit {

/// Runs fn(i) for i in [0, n) on up to num_threads workers. Results must be
/// written to pre-sized per-index slots by the caller, so the outcome is
/// independent of the thread count.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t num_threads, Fn&& fn) {
    if (n == 0) return;
    if (num_threads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    if (num_threads > n) num_threads = n;
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(num_threads);
    for (std::size_t w = 0; w < num_threads; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace unitkit

#endif
