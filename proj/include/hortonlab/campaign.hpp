#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hortonlab {

// Worker count from HORTONLAB_WORKERS, falling back to 1.
int worker_count();

// Runs body(index, acc) for every index in [0, n) on `workers` threads. Each
// worker owns a private accumulator; the private accumulators are merged at
// the end with Acc::merge, so exact-merge accumulators give results that do
// not depend on the worker count.
template <class Acc, class Body>
Acc run_indexed(std::uint64_t n, int workers, Acc init, Body body) {
    if (workers < 1) workers = 1;
    constexpr std::uint64_t chunk = 256;
    std::atomic<std::uint64_t> next{0};
    std::vector<Acc> accs(static_cast<std::size_t>(workers), init);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&](int w) {
        try {
            for (;;) {
                const std::uint64_t begin = next.fetch_add(chunk);
                if (begin >= n) break;
                const std::uint64_t end = begin + chunk < n ? begin + chunk : n;
                for (std::uint64_t i = begin; i < end; ++i) body(i, accs[static_cast<std::size_t>(w)]);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(n);
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    Acc total = std::move(accs[0]);
    for (std::size_t w = 1; w < accs.size(); ++w) total.merge(accs[w]);
    return total;
}

}  // namespace hortonlab
