#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace lggnet {

/// Seeded pseudo-random source used for initialization, shuffling, dropout
/// masks and noise.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The real-valued transforms are implemented here rather than with
/// std:: distributions, whose algorithms vary between standard libraries, so a
/// seed reproduces the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal sample (Box-Muller, second value cached).
  double normal();

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// Fisher-Yates shuffle driven by below().
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Independent child generator; the child seed depends only on this
  /// generator's seed and the stream id, not on how much has been drawn.
  Rng fork(std::uint64_t stream) const { return Rng(mix_seed(seed_, stream)); }

  static std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lggnet
