#pragma once

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace iscreen {

/// Worker cap: ISCREEN_THREADS if set (clamped to >= 1), hardware concurrency
/// otherwise.
inline unsigned worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("ISCREEN_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<unsigned>(v);
    }
    return hw;
}

/// Run f(i) for i in [0, count) across worker threads. Tasks are claimed from
/// an atomic counter; callers must make f(i) write only to slot i so results
/// are independent of scheduling.
template <class F>
void parallel_for(int count, F&& f) {
    if (count <= 0) return;
    const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(count));
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) f(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace iscreen
