// nlpot/parallel.hpp
//
// Fork-join parallel map over an index range. Each index writes its own
// output slot, so results are independent of thread count and schedule;
// the process-wide cap is set once from the CLI --threads flag or the
// NLPOT_THREADS environment variable.
#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace nlpot {

namespace detail {
inline std::atomic<int>& thread_cap_storage() {
    static std::atomic<int> cap{0};  // 0 = auto (hardware concurrency)
    return cap;
}
}  // namespace detail

// 0 restores the automatic default.
inline void set_thread_cap(int k) { detail::thread_cap_storage().store(k < 0 ? 0 : k); }

inline int effective_threads() {
    int cap = detail::thread_cap_storage().load();
    if (cap == 0) {
        if (const char* env = std::getenv("NLPOT_THREADS")) {
            const int v = std::atoi(env);
            if (v > 0) cap = v;
        }
    }
    if (cap == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        cap = hw == 0 ? 1 : static_cast<int>(hw);
    }
    return cap;
}

// body(i) is invoked exactly once for every i in [0, count); work is
// pulled in fixed-size blocks from a shared counter. body must only
// write to per-index state.
template <class F>
void parallel_for(std::size_t count, F&& body, std::size_t grain = 8) {
    const int nthreads = effective_threads();
    if (count == 0) return;
    if (nthreads <= 1 || count <= grain) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t begin = next.fetch_add(grain);
            if (begin >= count) return;
            const std::size_t end = begin + grain < count ? begin + grain : count;
            for (std::size_t i = begin; i < end; ++i) body(i);
        }
    };
    std::vector<std::thread> pool;
    const std::size_t spawn =
        static_cast<std::size_t>(nthreads) < (count + grain - 1) / grain
            ? static_cast<std::size_t>(nthreads)
            : (count + grain - 1) / grain;
    pool.reserve(spawn);
    for (std::size_t t = 1; t < spawn; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

}  // namespace nlpot
