#include "expanse/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace expanse {

int thread_budget() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("EXPANSE_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0) return std::min(cap, 256);
    } catch (...) {
      // fall through to auto
    }
  }
  return hw;
}

int parallel_chunks(std::size_t n, std::size_t min_grain,
                    const std::function<void(int, std::size_t, std::size_t)>& fn) {
  if (n == 0) return 0;
  std::size_t workers = static_cast<std::size_t>(thread_budget());
  if (min_grain > 0) workers = std::min(workers, std::max<std::size_t>(1, n / min_grain));
  workers = std::min(workers, n);
  if (workers <= 1) {
    fn(0, 0, n);
    return 1;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t base = n / workers;
  const std::size_t extra = n % workers;
  std::size_t begin = 0;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t len = base + (w < extra ? 1 : 0);
    const std::size_t end = begin + len;
    threads.emplace_back(fn, static_cast<int>(w), begin, end);
    begin = end;
  }
  for (auto& t : threads) t.join();
  return static_cast<int>(workers);
}

}  // namespace expanse
