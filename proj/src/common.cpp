#include "rosa/common.hpp"

#include <cstdlib>
#include <iostream>

namespace rosa {

uint64_t fnv1a64(const void* data, size_t n, uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::mt19937_64 make_rng(uint64_t seed, uint64_t stream) {
  // splitmix64 over (seed, stream) so nearby seeds do not correlate.
  uint64_t x = seed * 0x9e3779b97f4a7c15ull + stream;
  auto mix = [](uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  std::seed_seq seq{mix(x), mix(x + 1), mix(x + 2), mix(x + 3)};
  return std::mt19937_64(seq);
}

int log_level() {
  static int level = [] {
    const char* v = std::getenv("ROSA_LOG");
    if (v == nullptr) return 0;
    try {
      return std::stoi(v);
    } catch (...) {
      return 0;
    }
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[rosa] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[rosa:debug] " << msg << "\n";
}

}  // namespace rosa
