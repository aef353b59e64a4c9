#ifndef SPINBUS_PARALLEL_HPP
#define SPINBUS_PARALLEL_HPP

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace spinbus {

/// Worker count resolution: explicit request > PROBE_THREADS > hardware.
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PROBE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs body(i) for i in [0, count) across up to n_threads workers.
/// Work items are claimed from a shared counter; results must be written to
/// caller-owned slots indexed by i, which keeps output deterministic no matter
/// the thread count.  The first exception thrown by any worker is rethrown.
template <typename Body>
void parallel_for(std::size_t count, int n_threads, Body&& body) {
    n_threads = resolve_threads(n_threads);
    if (count == 0) return;
    if (n_threads <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }

    std::mutex claim_mutex;
    std::size_t next = 0;
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(claim_mutex);
                if (next >= count) return;
                i = next++;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const std::size_t spawn = std::min<std::size_t>(static_cast<std::size_t>(n_threads), count);
    std::vector<std::thread> pool;
    pool.reserve(spawn);
    for (std::size_t t = 0; t < spawn; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace spinbus

#endif // SPINBUS_PARALLEL_HPP
