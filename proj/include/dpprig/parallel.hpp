#ifndef DPPRIG_PARALLEL_HPP
#define DPPRIG_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dpprig {

/// Worker count used by the parallel loops in this library (default 1).
void set_thread_count(unsigned count);
unsigned thread_count();

/// Runs body(block) for block in [0, blocks). Blocks are claimed dynamically,
/// so callers must write results to per-block slots and reduce them in block
/// order afterwards; the result is then independent of the worker count.
template <typename Body>
void parallel_blocks(std::size_t blocks, Body&& body) {
  const unsigned workers = std::min<std::size_t>(thread_count(), blocks);
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) body(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::size_t b = next++; b < blocks; b = next++) body(b);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = blocks;
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace dpprig

#endif  // DPPRIG_PARALLEL_HPP
