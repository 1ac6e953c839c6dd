#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hpsim {

inline unsigned default_workers() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1u : n;
}

// Runs fn(rep) for rep in [0, reps) on up to `workers` threads and returns the
// results indexed by replicate, so the output never depends on scheduling.
template <class T, class F>
std::vector<T> run_replicates(std::size_t reps, unsigned workers, F&& fn) {
    std::vector<T> out(reps);
    if (workers <= 1 || reps <= 1) {
        for (std::size_t r = 0; r < reps; ++r) out[r] = fn(r);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    auto body = [&] {
        for (;;) {
            std::size_t r = next.fetch_add(1);
            if (r >= reps) return;
            try {
                out[r] = fn(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
                next.store(reps);
                return;
            }
        }
    };
    unsigned n = static_cast<unsigned>(std::min<std::size_t>(workers, reps));
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

}  // namespace hpsim

#include "hpsim/rng.hpp"

namespace hpsim {

struct RunOptions {
    std::uint64_t seed = 0;
    std::uint64_t experiment = 0;
    unsigned workers = 1;
};

inline RandomStream replicate_stream(const RunOptions& o, std::uint64_t rep) {
    return RandomStream(o.seed, derive_stream_id(o.experiment, rep));
}

}  // namespace hpsim
