#pragma once

// Internal helper: run body(0..count-1) on up to `threads` workers with a
// static index partition. Callers must write only to index-addressed slots,
// which keeps results independent of the worker count. Worker exceptions
// are rethrown after the join.

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace spdelab::detail {

inline void pforeach(int count, int threads, const std::function<void(int)>& body) {
    const int workers = std::max(1, std::min(threads, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < count; i += workers) body(i);
            } catch (...) {
                failures[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }
}

} // namespace spdelab::detail
