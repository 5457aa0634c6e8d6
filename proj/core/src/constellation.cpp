#include "onebit/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace onebit {
namespace {

bool is_even_power_of_two(int m) {
  if (m < 4 || (m & (m - 1)) != 0) return false;
  int bits = 0;
  while ((1 << bits) < m) ++bits;
  return bits % 2 == 0;
}

}  // namespace

Constellation::Constellation(int order) : order_(order) {
  if (!is_even_power_of_two(order)) {
    throw ConfigError("constellation order must be an even power of two >= 4, got " +
                      std::to_string(order));
  }
  bits_ = 0;
  while ((1 << bits_) < order_) ++bits_;
  side_ = 1 << (bits_ / 2);
  scale_ = std::sqrt(3.0 / (2.0 * (order_ - 1)));
  boundary_ = std::sqrt(3.0 * (side_ - 1.0) * (side_ - 1.0) / (2.0 * (order_ - 1)));

  gray_of_level_.resize(side_);
  std::vector<double> level_of_gray(side_);
  for (int j = 0; j < side_; ++j) {
    const auto g = static_cast<std::uint32_t>(j ^ (j >> 1));
    gray_of_level_[j] = g;
    level_of_gray[g] = (2.0 * j - (side_ - 1)) * scale_;
  }

  const int half = bits_ / 2;
  points_.resize(order_);
  for (std::uint32_t label = 0; label < static_cast<std::uint32_t>(order_); ++label) {
    const std::uint32_t gi = label >> half;
    const std::uint32_t gq = label & ((1u << half) - 1);
    points_[label] = {level_of_gray[gi], level_of_gray[gq]};
  }
}

int Constellation::slice(double a) const {
  auto level = [&](int j) { return (2.0 * j - (side_ - 1)) * scale_; };
  const double t = (a / scale_ + (side_ - 1)) / 2.0;
  const int lo = std::clamp(static_cast<int>(std::floor(t)), 0, side_ - 2);
  const double d0 = std::abs(a - level(lo));
  const double d1 = std::abs(a - level(lo + 1));
  if (d0 < d1) return lo;
  if (d1 < d0) return lo + 1;
  return gray_of_level_[lo] < gray_of_level_[lo + 1] ? lo : lo + 1;
}

DemapResult Constellation::demap(cdouble estimate) const {
  const int half = bits_ / 2;
  const std::uint32_t gi = gray_of_level_[slice(estimate.real())];
  const std::uint32_t gq = gray_of_level_[slice(estimate.imag())];
  const std::uint32_t label = (gi << half) | gq;
  return {label, points_[label]};
}

Constellation make_constellation(int order) { return Constellation(order); }

}  // namespace onebit
