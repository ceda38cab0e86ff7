#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace vmrd::detail {

// fn(k) for k in [0, n) over up to `threads` workers. The first exception
// thrown by any call is rethrown after every worker has stopped.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mu;
  const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(n));
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) {
        try {
          fn(k);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace vmrd::detail
