#pragma once

// Work distribution shared by the estimator, sampler and harness. Results
// are written by index, so output never depends on scheduling.

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace tmvn::detail {

template <class Fn>
void parallel_for(std::size_t tasks, unsigned threads, Fn&& fn) {
  if (threads <= 1 || tasks <= 1) {
    for (std::size_t i = 0; i < tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < tasks && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace tmvn::detail
