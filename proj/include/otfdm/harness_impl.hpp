#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace otfdm {

template <typename Result>
std::vector<Result> run_trials(int trials, int threads, std::uint64_t seed, std::uint64_t stream_base,
                               const std::function<Result(int, SeededRng&)>& fn) {
  if (trials < 1) throw InvalidArgument("run_trials: trials must be >= 1");
  std::vector<std::optional<Result>> slots(static_cast<std::size_t>(trials));
  auto one = [&](int t) {
    SeededRng rng(seed, stream_base + static_cast<std::uint64_t>(t));
    slots[static_cast<std::size_t>(t)].emplace(fn(t, rng));
  };
  const int workers = std::clamp(threads, 1, trials);
  if (workers == 1) {
    for (int t = 0; t < trials; ++t) one(t);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int t = next++; t < trials; t = next++) {
          try {
            one(t);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }
  std::vector<Result> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace otfdm
