#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace fwmpc {

// FNV-1a, used to fingerprint configs and artifacts for provenance checks.
inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

// Accumulating variant for streaming doubles through the hash.
class HashAccumulator {
 public:
  void add(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    h_ = fnv1a64(&bits, sizeof(bits), h_);
  }
  void add(uint64_t v) { h_ = fnv1a64(&v, sizeof(v), h_); }
  template <typename Derived>
  void add_matrix(const Derived& m) {
    for (int c = 0; c < m.cols(); ++c)
      for (int r = 0; r < m.rows(); ++r) add(static_cast<double>(m(r, c)));
  }
  uint64_t value() const { return h_; }

 private:
  uint64_t h_ = 0xcbf29ce484222325ull;
};

std::string hex_string(uint64_t h);

// Hash of a whole file's bytes; throws std::runtime_error if unreadable.
uint64_t hash_file(const std::string& path);

}  // namespace fwmpc
