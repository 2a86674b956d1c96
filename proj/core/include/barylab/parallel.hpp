#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace barylab {

// Fixed-size worker pool for independent jobs. Jobs write results into
// caller-owned slots by index, so the outcome never depends on scheduling.
class Executor {
 public:
  explicit Executor(unsigned jobs = 1) : jobs_(std::max(1u, jobs)) {}

  static Executor serial() { return Executor(1); }
  static Executor hardware() {
    return Executor(std::max(1u, std::thread::hardware_concurrency()));
  }

  unsigned jobs() const { return jobs_; }

  template <class F>
  void parallel_for(std::size_t count, F&& body) const {
    if (count == 0) return;
    if (jobs_ == 1 || count == 1) {
      for (std::size_t i = 0; i < count; ++i) body(i);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::size_t first_index = count;
    std::mutex error_mutex;
    auto worker = [&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (i < first_index) {
            first_index = i;
            first_error = std::current_exception();
          }
        }
      }
    };
    unsigned n = static_cast<unsigned>(std::min<std::size_t>(jobs_, count));
    std::vector<std::jthread> threads;
    threads.reserve(n);
    for (unsigned t = 0; t < n; ++t) threads.emplace_back(worker);
    threads.clear();
    if (first_error) std::rethrow_exception(first_error);
  }

 private:
  unsigned jobs_;
};

}  // namespace barylab
