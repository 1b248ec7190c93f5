#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace pushsum {

/// Worker count actually used for a request (0 means "all hardware threads").
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(chunk_index, begin, end) over [0, total) split into fixed-size
/// chunks, pulled by a pool of threads. Chunk boundaries depend only on
/// `total` and `chunk_size`, so per-chunk results can be reduced in chunk
/// order for results that do not depend on the thread count. Exceptions
/// from workers are rethrown on the calling thread.
template <typename Fn>
void parallel_chunks(long total, long chunk_size, int threads, Fn&& fn) {
    if (total <= 0) return;
    if (chunk_size < 1) chunk_size = 1;
    const long n_chunks = (total + chunk_size - 1) / chunk_size;
    const int workers = std::min<long>(resolve_threads(threads), n_chunks);

    if (workers <= 1) {
        for (long c = 0; c < n_chunks; ++c)
            fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
        return;
    }

    std::atomic<long> next_chunk{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (long c = next_chunk.fetch_add(1); c < n_chunks; c = next_chunk.fetch_add(1))
                    fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace pushsum
