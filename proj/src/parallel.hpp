#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace stochmatch {

inline int default_jobs() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// Runs body(block) for block in [0, num_blocks) on up to `jobs` threads.
// Blocks are claimed dynamically, so callers must write results into
// per-block slots and reduce them in block order afterwards.
template <typename Body>
void parallel_blocks(std::size_t num_blocks, int jobs, Body&& body) {
  const std::size_t workers =
      std::min<std::size_t>(num_blocks, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t b = 0; b < num_blocks; ++b) body(b);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      std::size_t b;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= num_blocks || error) return;
        b = next++;
      }
      try {
        body(b);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace stochmatch
