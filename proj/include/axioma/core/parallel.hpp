#ifndef AXIOMA_CORE_PARALLEL_HPP
#define AXIOMA_CORE_PARALLEL_HPP

// Minimal parallel loop over an index range on std::thread.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace axioma {

inline unsigned worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    return std::max(1u, std::min(n, 16u));
}

// Calls body(i) for i in [0, n); iterations are claimed one at a time. The
// first exception thrown by any iteration is rethrown after all workers join.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    unsigned workers = std::min<std::size_t>(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex m;
    auto run = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(m);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace axioma

#endif
