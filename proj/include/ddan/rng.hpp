#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ddan {

// splitmix64 finalizer; used to fold tags into stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_tag(std::string_view tag) {
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

// One master seed, independent named streams. Extra integer tags pick
// per-epoch / per-item substreams deterministically.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::string_view stream,
                                std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t s = mix64(seed ^ mix64(hash_tag(stream)));
  s = mix64(s ^ mix64(a + 0x632be59bd9b4e019ull));
  s = mix64(s ^ mix64(b + 0x2545f4914f6cdd1dull));
  return std::mt19937_64(s);
}

}  // namespace ddan
