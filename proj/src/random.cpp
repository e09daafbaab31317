#include "elodec/random.hpp"

namespace elodec {

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stable_hash(std::string_view text, std::uint64_t salt) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(salt);
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

Rng make_stream(std::uint64_t seed, Stream stream, std::uint64_t index) {
  const std::uint64_t a = mix64(seed);
  const std::uint64_t b = mix64(a ^ (static_cast<std::uint64_t>(stream) << 32));
  return Rng(mix64(b ^ index));
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  // Multiply-shift keeps the draw consumption fixed at one word per call.
  const auto wide = static_cast<unsigned __int128>(rng()) * n;
  return static_cast<std::size_t>(wide >> 64);
}

}  // namespace elodec
