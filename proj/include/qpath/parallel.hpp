#pragma once

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <string_view>
#include <thread>
#include <vector>

namespace qpath {

/// Worker count: QPATH_WORKERS if set to a positive integer, otherwise the
/// hardware concurrency.
inline unsigned default_worker_count() {
  if (const char* env = std::getenv("QPATH_WORKERS")) {
    std::string_view text(env);
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc() && ptr == text.data() + text.size() && value > 0)
      return value;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls `body(i)` for i in [0, count) over `workers` threads in contiguous
/// chunks. `body` must only write to slot i of caller-owned storage; any
/// reduction happens afterwards in index order, so results do not depend on
/// the worker count. The first exception (lowest chunk) is rethrown.
template <typename Body>
void parallel_for(std::size_t count, Body&& body, unsigned workers = default_worker_count()) {
  workers = static_cast<unsigned>(std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i)
      body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(count, begin + chunk);
      try {
        for (std::size_t i = begin; i < end; ++i)
          body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& thread : threads)
    thread.join();
  for (auto& error : errors)
    if (error)
      std::rethrow_exception(error);
}

} // namespace qpath
