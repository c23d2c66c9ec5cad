#pragma once

// Deterministic randomness. Every draw goes through mt19937_64 plus the
// bounded-draw helpers below, so streams are identical across standard
// libraries (std::uniform_int_distribution is implementation-defined).

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "propl/error.hpp"

namespace propl {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a parent seed and a purpose tag.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// FNV-1a, used to fold strings (ids, names) into seed streams.
inline std::uint64_t hash_string(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw Error("Rng::below(0)");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return x % bound;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return unit() < p; }

  /// Uniform natural in [0, bound) by rejection on the bound's bit length.
  boost::multiprecision::cpp_int below(const boost::multiprecision::cpp_int& bound) {
    if (bound <= 0) throw Error("Rng::below on a non-positive bound");
    const unsigned bits = static_cast<unsigned>(boost::multiprecision::msb(bound)) + 1;
    const unsigned words = (bits + 63) / 64;
    boost::multiprecision::cpp_int mask = (boost::multiprecision::cpp_int(1) << bits) - 1;
    for (;;) {
      boost::multiprecision::cpp_int v = 0;
      for (unsigned w = 0; w < words; ++w) {
        v <<= 64;
        v |= engine_();
      }
      v &= mask;
      if (v < bound) return v;
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    // Fisher-Yates, descending.
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace propl
