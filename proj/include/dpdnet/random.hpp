#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace dpdnet {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent child seed for a numbered stream (pipeline stage, round,
/// layer, pixel). Mixing both words keeps nearby (seed, stream) pairs
/// uncorrelated.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Small counter-based engine; cheap enough to instantiate once per pixel so
/// that per-pixel streams do not depend on traversal order.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

using Rng = std::mt19937_64;

/// Uniform integer in [0, bound) without modulo bias.
template <class Engine>
std::size_t uniform_index(Engine& rng, std::size_t bound) {
  std::uniform_int_distribution<std::size_t> dist(0, bound - 1);
  return dist(rng);
}

/// Draws `count` distinct values from [0, n) by partial Fisher-Yates; the
/// result is in draw order.
template <class Engine>
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count, Engine& rng) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  if (count > n) count = n;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + uniform_index(rng, n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace dpdnet
