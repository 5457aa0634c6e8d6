#include "onebit/rng.hpp"

#include <cmath>

namespace onebit {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      engine_(splitmix64(splitmix64(seed) ^ splitmix64(~stream_id + 0x632be59bd9b4e019ULL))) {}

cdouble RngStream::complex_normal(double variance) {
  const double sd = std::sqrt(variance / 2.0);
  const double re = normal();
  const double im = normal();
  return {sd * re, sd * im};
}

std::uint32_t RngStream::uniform_below(std::uint32_t bound) {
  std::uniform_int_distribution<std::uint32_t> dist(0, bound - 1);
  return dist(engine_);
}

}  // namespace onebit
