#ifndef SALNET_PARALLEL_HPP
#define SALNET_PARALLEL_HPP

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace salnet {

// Runs fn(i) for i in [0, n) on up to `workers` threads. Work items must be
// independent; the first exception is rethrown after all threads join.
inline void parallel_for(size_t n, int workers, const std::function<void(size_t)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    int count = std::min<size_t>(workers, n);
    for (int t = 0; t < count; ++t) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace salnet

#endif
