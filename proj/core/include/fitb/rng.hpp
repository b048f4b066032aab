#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace fitb {

// splitmix64 step; used both as a standalone mixer and to derive
// purpose-specific seeds from one root seed.
std::uint64_t mix64(std::uint64_t x);

// Derives a child seed from a root seed and a purpose tag, so that all
// randomness in a run flows from a single seed but distinct purposes
// (data, init, dropout, ...) get decorrelated streams.
std::uint64_t split_seed(std::uint64_t root, std::string_view tag);
std::uint64_t split_seed(std::uint64_t root, std::string_view tag, std::uint64_t index);

// Deterministic generator. All distributions are implemented by hand on
// top of the raw 64-bit stream so that generated datasets are
// bit-reproducible independent of the standard library in use.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1).
  double uniform();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller (one spare cached).
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }
  // Uniform integer in [0, n).
  std::uint64_t randint(std::uint64_t n);
  // Uniform integer in [lo, hi] inclusive.
  std::int64_t randint(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p) { return uniform() < p; }

  // Index drawn from unnormalized nonnegative weights.
  std::size_t categorical(const std::vector<double>& weights);

  // Fisher-Yates; deterministic across platforms.
  template <class T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(randint(i + 1));
      if (i != j) std::swap(v[i], v[j]);
    }
  }

  // k distinct indices from [0, n), in random order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fitb
