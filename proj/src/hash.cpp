#include "fwmpc/util/hash.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fwmpc {

std::string hex_string(uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[h & 0xf];
    h >>= 4;
  }
  return s;
}

uint64_t hash_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("hash_file: cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string bytes = ss.str();
  return fnv1a64(bytes.data(), bytes.size());
}

}  // namespace fwmpc
