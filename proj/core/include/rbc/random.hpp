#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace rbc {

/// Seeded pseudo-random source with platform-independent output.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distributions below are implemented here rather than taken
/// from <random>, because the standard leaves distribution algorithms to the
/// library vendor:
///
///   uniform01()  top 53 bits of one engine draw, scaled by 2^-53, in [0, 1)
///   below(n)     rejection sampling on the engine output, unbiased, in [0, n)
///   normal()     Box-Muller on two uniform01() draws; the second variate is
///                cached and returned by the next call
///   shuffle()    Fisher-Yates from the back, one below() draw per position
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi]; returns lo exactly when lo == hi.
  double uniform(double lo, double hi);

  std::uint64_t below(std::uint64_t bound);

  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t value);

/// Derives an independent stream seed from a base seed and a tuple of tags.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

/// FNV-1a over the bytes of a name; used to tag seeds by attack name.
std::uint64_t name_tag(std::string_view name);

}  // namespace rbc
