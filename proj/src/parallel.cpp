#include "fdbreak/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace fdbreak {

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FDBREAK_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(int count, const std::function<void(int)>& body, int threads) {
  if (count <= 0) return;
  const int workers = std::min(resolve_thread_count(threads), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }

  struct Failure {
    int index;
    std::exception_ptr error;
  };
  std::vector<Failure> failures(static_cast<std::size_t>(workers), Failure{-1, nullptr});

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      const int lo = static_cast<int>(static_cast<long long>(count) * w / workers);
      const int hi = static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
      for (int i = lo; i < hi; ++i) {
        try {
          body(i);
        } catch (...) {
          failures[static_cast<std::size_t>(w)] = {i, std::current_exception()};
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();

  const Failure* first = nullptr;
  for (const Failure& f : failures)
    if (f.error && (!first || f.index < first->index)) first = &f;
  if (first) std::rethrow_exception(first->error);
}

}  // namespace fdbreak
