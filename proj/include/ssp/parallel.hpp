#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace ssp {

inline unsigned resolve_threads(unsigned requested, std::uint64_t work_items) {
  unsigned t = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  if (work_items < t) t = static_cast<unsigned>(std::max<std::uint64_t>(1, work_items));
  return t;
}

/// Runs `count` independent tasks and returns their results in index order.
///
/// `make_task()` is called once per worker and must return a callable
/// `Record(std::uint64_t task_index)`; per-worker scratch lives in it. Each
/// worker owns a contiguous index block, so the output does not depend on
/// the worker count as long as a task is a pure function of its index.
template <class Record, class MakeTask>
std::vector<Record> run_indexed(std::uint64_t count, unsigned threads, MakeTask&& make_task) {
  std::vector<Record> records(count);
  const unsigned workers = resolve_threads(threads, count);
  auto run_block = [&](std::uint64_t begin, std::uint64_t end) {
    auto task = make_task();
    for (std::uint64_t t = begin; t < end; ++t) records[t] = task(t);
  };
  if (workers == 1) {
    run_block(0, count);
    return records;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = count * w / workers;
    const std::uint64_t end = count * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      try {
        run_block(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return records;
}

}  // namespace ssp
