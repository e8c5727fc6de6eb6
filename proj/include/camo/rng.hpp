#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace camo {

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t basis = 0xcbf29ce484222325ull) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Every random decision in the tool derives from one master seed through a
// named sub-stream (e.g. "split", "init/2", "observers"), so a single seed
// reproduces a whole run.
inline std::uint64_t substream_seed(std::uint64_t master, std::string_view name) {
  std::uint64_t h = fnv1a64(name, 0xcbf29ce484222325ull ^ master);
  // splitmix64 finalizer
  h += 0x9e3779b97f4a7c15ull;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
  return h ^ (h >> 31);
}

inline std::mt19937_64 substream(std::uint64_t master, std::string_view name) {
  return std::mt19937_64(substream_seed(master, name));
}

// std::uniform_*_distribution is implementation-defined; these helpers keep
// the byte streams identical across standard libraries.
inline double uniform_unit(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform_real(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(gen);
}

inline std::uint64_t uniform_index(std::mt19937_64& gen, std::uint64_t n) {
  return gen() % n;
}

template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& gen) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_index(gen, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace camo
