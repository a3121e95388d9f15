#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <string_view>
#include <thread>
#include <vector>

namespace nscop {

/// Every stochastic routine takes an explicit engine; there is no global RNG.
/// mt19937_64 output is fixed by the C++ standard and the distributions used
/// on top of it come from Boost.Random, so draws are identical across
/// platforms for a given seed.
using Rng = std::mt19937_64;
inline constexpr std::string_view kRngName = "mt19937_64";

/// SplitMix64 finaliser; used to derive independent per-replicate seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for replicate `index` of stream `stream` under a master seed.
constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream,
                                       std::uint64_t index) noexcept {
  return mix_seed(mix_seed(mix_seed(master) ^ stream) + index);
}

/// Uniform in the open interval (0,1), 53-bit resolution.
inline double uniform_open(Rng& rng) {
  for (;;) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

/// Process-wide worker cap for Monte Carlo loops (0 = hardware concurrency).
inline unsigned& thread_cap() {
  static unsigned cap = 0;
  return cap;
}

/// Runs body(i) for i in [0, n). Results must be written to slot i by the
/// caller so output never depends on scheduling.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  unsigned workers = thread_cap() ? thread_cap() : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace nscop
