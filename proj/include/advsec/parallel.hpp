#pragma once

// Order-preserving parallel map over sample indices. Results are identical to
// sequential execution for any worker count; the first worker exception aborts
// the run and is reported with the offending sample index.

#include <atomic>
#include <cstddef>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "advsec/error.hpp"

namespace advsec {

/// Error raised when a parallel worker throws; carries the sample index in
/// its message and the original message verbatim.
class WorkerError : public Error {
public:
    WorkerError(std::size_t index, const std::string& what)
        : Error("worker failed on sample " + std::to_string(index) + ": " + what),
          index_(index) {}
    std::size_t index() const { return index_; }

private:
    std::size_t index_ = 0;
};

/// Applies `worker(i)` for i in [0, n) and returns the results in index
/// order. `n_workers` <= 1 runs inline on the calling thread. The worker must
/// be pure per index against immutable shared state; on failure the run
/// aborts and the lowest observed failing index is reported.
template <typename Result, typename Worker>
std::vector<Result> parallel_map(std::size_t n, Worker worker, int n_workers) {
    std::vector<Result> results(n);
    if (n == 0) return results;

    if (n_workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                results[i] = worker(i);
            } catch (const std::exception& e) {
                throw WorkerError(i, e.what());
            }
        }
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> failed_index{n};  // n = no failure
    std::vector<std::string> failure_message(n);
    const std::size_t pool =
        std::min<std::size_t>(static_cast<std::size_t>(n_workers), n);

    auto drain = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed_index.load() < n) return;
            try {
                results[i] = worker(i);
            } catch (const std::exception& e) {
                failure_message[i] = e.what();
                // keep the lowest failing index for a deterministic report
                std::size_t expected = failed_index.load();
                while (i < expected &&
                       !failed_index.compare_exchange_weak(expected, i)) {
                }
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (std::size_t t = 0; t < pool; ++t) threads.emplace_back(drain);
    for (auto& t : threads) t.join();

    const std::size_t bad = failed_index.load();
    if (bad < n) throw WorkerError(bad, failure_message[bad]);
    return results;
}

}  // namespace advsec
