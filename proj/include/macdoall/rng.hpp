#pragma once

#include <cstdint>
#include <random>

#include "macdoall/types.hpp"

namespace macdoall {

namespace detail {
__extension__ using u128 = unsigned __int128;
}  // namespace detail

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return mix64(seed ^ mix64(value));
}

/// A probability kept as an exact ratio num/den. Values >= 1 are "always",
/// a zero numerator is "never". Comparison against the PRNG output uses a
/// 64-bit fixed-point threshold so that outcomes are identical on every
/// platform.
struct Probability {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static constexpr Probability always() { return {1, 1}; }
  static constexpr Probability never() { return {0, 1}; }

  /// 1 / coin where coin = num/den; coin <= 1 clamps to 1.
  static constexpr Probability inverse(std::uint64_t coin_num, std::uint64_t coin_den) {
    if (coin_num <= coin_den) return always();
    return {coin_den, coin_num};
  }

  constexpr bool is_always() const { return num >= den; }

  /// Heads iff word < floor(2^64 * num / den).
  constexpr bool heads(std::uint64_t word) const {
    if (num == 0) return false;
    if (is_always()) return true;
    const auto threshold = static_cast<std::uint64_t>(
        (static_cast<detail::u128>(num) << 64) / den);
    return word < threshold;
  }

  double value() const {
    return is_always() ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
  }
};

/// Station coin substream: one word per (master seed, station, round, salt).
/// Independent of crash pattern and of every other station.
constexpr std::uint64_t station_word(std::uint64_t master_seed, StationId station, Round round,
                                     std::uint64_t salt = 0) {
  std::uint64_t h = hash_combine(master_seed, 0x5354415449ULL);  // "STATI"
  h = hash_combine(h, station);
  h = hash_combine(h, static_cast<std::uint64_t>(round));
  return hash_combine(h, salt);
}

/// Strategy and sampling stream. std::mt19937_64 is fully specified by the
/// standard; distributions are not, so draws go through uniform_below.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). Rejection keeps it unbiased and portable.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = 0;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(Probability prob) { return prob.heads(engine_()); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace macdoall
