#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cafl {

/// Runs body(i) for i in [begin, end) across at most `threads` workers.
/// Contract for determinism: body(i) may only write to slot i of
/// preallocated storage; reductions happen sequentially in the caller
/// afterwards, so results are byte-identical for every thread count.
/// The first exception thrown by any body is rethrown in the caller.
template <typename Fn>
void parallel_for(int begin, int end, int threads, Fn&& body) {
    const int count = end - begin;
    if (count <= 0) return;
    if (threads <= 1 || count == 1) {
        for (int i = begin; i < end; ++i) body(i);
        return;
    }
    const int workers = std::min(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error = nullptr;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            // Static block partition: worker w owns a contiguous range, so
            // the work assignment itself is deterministic too.
            const long lo = begin + static_cast<long>(count) * w / workers;
            const long hi = begin + static_cast<long>(count) * (w + 1) / workers;
            try {
                for (long i = lo; i < hi; ++i) body(static_cast<int>(i));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace cafl
