#ifndef CONJOINT_RNG_HPP
#define CONJOINT_RNG_HPP

#include <cstdint>
#include <random>

namespace conjoint {

using Rng = std::mt19937_64;

/// Stream tags keep the seeds of different stages disjoint.
enum class Stream : std::uint64_t {
  respondents = 1,
  tasks = 2,
  choices = 3,
  chain = 4,
  market = 5,
  simulation = 6,
  model = 7,
  revenue = 8,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for an independent stream identified by (seed, tag, index, sub).
/// Results depend only on the arguments, never on call order, so work
/// split across threads draws the same numbers as a serial run.
constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream tag,
                                    std::uint64_t index = 0,
                                    std::uint64_t sub = 0) noexcept {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  h = splitmix64(h ^ index);
  return splitmix64(h ^ sub);
}

inline Rng make_rng(std::uint64_t seed, Stream tag, std::uint64_t index = 0,
                    std::uint64_t sub = 0) {
  return Rng(derive_seed(seed, tag, index, sub));
}

}  // namespace conjoint

#endif  // CONJOINT_RNG_HPP
