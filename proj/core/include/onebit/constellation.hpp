#pragma once

#include <cstdint>
#include <vector>

#include "onebit/types.hpp"

namespace onebit {

struct DemapResult {
  std::uint32_t label = 0;  // Gray bit label, also the point index
  cdouble symbol;
};

// Square M-QAM with unit average energy. Labels are log2(M)-bit words: the
// upper half of the bits selects the in-phase level and the lower half the
// quadrature level, each Gray coded. points()[label] is the symbol carrying
// that bit pattern, so the label/point map is a bijection by construction.
class Constellation {
 public:
  // Throws ConfigError unless M is an even power of two with M >= 4.
  explicit Constellation(int order);

  int order() const noexcept { return order_; }
  int bits_per_symbol() const noexcept { return bits_; }
  int levels_per_dim() const noexcept { return side_; }
  // Per-dimension box limit M_b (the outermost amplitude).
  double boundary() const noexcept { return boundary_; }
  const std::vector<cdouble>& points() const noexcept { return points_; }

  cdouble map(std::uint32_t label) const { return points_.at(label); }

  // Nearest point in Euclidean distance; ties resolve to the lowest label.
  DemapResult demap(cdouble estimate) const;

 private:
  // Level index (0 = most negative) nearest to a, ties toward lowest Gray code.
  int slice(double a) const;

  int order_;
  int bits_;
  int side_;
  double scale_;
  double boundary_;
  std::vector<cdouble> points_;
  std::vector<std::uint32_t> gray_of_level_;
};

Constellation make_constellation(int order);

}  // namespace onebit
