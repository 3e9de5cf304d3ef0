#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace lgp {

// SplitMix64 finalizer; a bijective 64-bit mix.
std::uint64_t mix64(std::uint64_t x);

// FNV-1a over the bytes, then mixed with the seed.
std::uint64_t hash_seeded(std::uint64_t seed, std::string_view bytes);

// Seeded generator whose output sequence is identical on every platform.
// std::mt19937_64 is fully specified by the standard; the distributions on
// top of it are not, so the mapping to indices and reals lives here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1).
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  // Uniform in [0, n); n must be positive.
  std::size_t index(std::size_t n);
  // Box-Muller standard normal.
  double normal();

  // k distinct draws from [0, n) in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lgp
