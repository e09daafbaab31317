#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace elodec {

using Rng = std::mt19937_64;

// Independent, named random streams derived from one run seed. Each stochastic
// concern of a run (selection, opponents, judge noise, action sampling) pulls
// from its own stream so that cutting a run short never shifts earlier draws.
enum class Stream : std::uint64_t {
  kSelection = 1,
  kOpponent = 2,
  kJudge = 3,
  kSampler = 4,
  kTournament = 5,
  kFinalSelection = 6,
  kBaseline = 7,
};

std::uint64_t mix64(std::uint64_t x);

// Platform-stable 64-bit hash (FNV-1a followed by a finalizer).
std::uint64_t stable_hash(std::string_view text, std::uint64_t salt = 0);

Rng make_stream(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

// Uniform draw in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform index in [0, n); n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

}  // namespace elodec
