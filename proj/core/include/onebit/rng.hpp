#pragma once

#include <cstdint>
#include <random>

#include "onebit/types.hpp"

namespace onebit {

// A reproducible random substream. (seed, stream_id) fully determines the
// sequence; distinct stream ids are decorrelated through a SplitMix64 mix of
// both words before seeding the engine. Single-owner: give each thread its own.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  double normal() { return normal_(engine_); }
  // Circularly symmetric CN(0, variance): each rail has variance / 2.
  cdouble complex_normal(double variance);
  // Uniform integer in [0, bound).
  std::uint32_t uniform_below(std::uint32_t bound);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace onebit
