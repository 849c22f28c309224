#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace unravel {

// splitmix64 finalizer, used for seed mixing only.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Stream seed for trajectory `id` under `master`. Documented so external
// runners can reproduce per-trajectory streams:
//   seed(master, id) = splitmix64(splitmix64(master) ^ splitmix64(id + 1))
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t id) {
  return splitmix64(splitmix64(master) ^ splitmix64(id + 1));
}

// Random stream on top of std::mt19937_64. The engine sequence is pinned by
// the standard, and all variates below are derived with explicit arithmetic
// (no std::*_distribution), so streams reproduce across platforms.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Fair coin; true with probability 1/2.
  bool coin() { return uniform() < 0.5; }

  // Exponential waiting time with mean 1/rate; strictly positive.
  double exponential(double rate) {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return -std::log(u) / rate;
  }

  // Index draw proportional to nonnegative `weights` summing to `total` > 0.
  // Zero-weight indices are never returned.
  int pick(std::span<const double> weights, double total) {
    double x = uniform() * total;
    int chosen = -1;
    for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
      if (weights[i] <= 0.0) continue;
      chosen = i;
      x -= weights[i];
      if (x < 0.0) break;
    }
    return chosen;  // rounding falls through to the last positive weight
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace unravel
