#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace rrmar {

// Runs body(i) for i in [0, count) on up to `threads` workers. Work items must
// be independent; whoever calls decides how results are slotted (typically a
// preallocated vector indexed by i, which keeps aggregation deterministic).
template <typename Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
    if (threads < 1) threads = 1;
    if (threads == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            body(i);
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

// Worker-count resolution: explicit value, else RRMAR_THREADS, else hardware.
int resolve_threads(int requested);

}  // namespace rrmar
