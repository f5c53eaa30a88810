#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace geompnn {

/// splitmix64 step; used to derive independent seeds from (seed, label, index).
std::uint64_t splitmix64(std::uint64_t& state);

/// Stateless mix of several 64-bit words into one seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

/// FNV-1a hash of a label, for named sub-streams.
std::uint64_t hash_label(std::string_view label);

/// Deterministic generator with explicit, implementation-independent mappings.
/// std::*_distribution is avoided on purpose: its output is not pinned by the
/// standard, and artifacts must be byte-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Derive a child generator for a named sub-stream.
  Rng stream(std::string_view label, std::uint64_t index = 0) const {
    return Rng(mix_seed(state_, hash_label(label), index));
  }

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n), n >= 1. Rejection sampling, unbiased.
  std::size_t uniform_index(std::size_t n);

  /// Standard normal via Box-Muller.
  double normal();

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  /// k distinct indices drawn from [0, n) without replacement, ascending order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::uint64_t state_;
  bool have_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace geompnn
