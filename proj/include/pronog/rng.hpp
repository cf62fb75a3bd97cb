#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "pronog/error.hpp"

namespace pronog {

// splitmix64 finalizer, used for seed derivation.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic child seed for (base, stream, index). Streams keep independent
// consumers (task sampling, augmentation, init, ...) from sharing draws.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  return mix64(mix64(base ^ 0xa076bcf7d4efull) ^ (stream * 0x9e3779b97f4a7c15ULL) ^ mix64(index));
}

// Seeded generator with hand-rolled draws. std::uniform_int_distribution and
// std::shuffle are implementation-defined, which would break the byte-identical
// reproducibility contract across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, n), rejection-sampled to avoid modulo bias.
  std::size_t bounded(std::size_t n) {
    if (n == 0) throw numeric_error("Rng::bounded: empty range");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
  }

  // Uniform real in [lo, hi).
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[bounded(i)]);
    }
  }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[bounded(v.size())];
  }

  // k distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) throw numeric_error("Rng::sample_without_replacement: k > n");
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + bounded(n - i);
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }

  // Random permutation of [0, n).
  std::vector<std::size_t> permutation(std::size_t n) { return sample_without_replacement(n, n); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace pronog
