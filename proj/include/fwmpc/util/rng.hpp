#pragma once

#include <cstdint>
#include <random>

#include "fwmpc/core/types.hpp"

namespace fwmpc {

// Thin wrapper around mt19937_64 so that everything randomized in the stack
// draws from an explicitly seeded stream. Substreams derived with derive()
// decorrelate parallel or per-item use while staying reproducible.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(gen_);
  }
  int uniform_int(int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(gen_);
  }
  Vec3 uniform_vec3(double lo, double hi) {
    // evaluation order of constructor args is unspecified, draw explicitly
    const double a = uniform(lo, hi);
    const double b = uniform(lo, hi);
    const double c = uniform(lo, hi);
    return Vec3(a, b, c);
  }
  Vec3 normal_vec3() {
    const double a = normal();
    const double b = normal();
    const double c = normal();
    return Vec3(a, b, c);
  }
  uint64_t next_u64() { return gen_(); }

  // Independent substream for item k of the stream tagged `salt`.
  static Rng derive(uint64_t seed, uint64_t salt, uint64_t k) {
    uint64_t h = seed ^ (0x9e3779b97f4a7c15ull + salt);
    h ^= h >> 30; h *= 0xbf58476d1ce4e5b9ull;
    h ^= k + 0x94d049bb133111ebull;
    h ^= h >> 27; h *= 0x94d049bb133111ebull;
    h ^= h >> 31;
    return Rng(h);
  }

  std::mt19937_64& raw() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace fwmpc
