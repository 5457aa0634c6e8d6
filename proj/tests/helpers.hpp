#pragma once

#include <vector>

#include "onebit/onebit.hpp"

namespace testing_util {

using namespace onebit;

// Single-tap channel with the given N x K matrix on every subcarrier.
inline ChannelRealization flat_channel(const CMatrix& h, int subcarriers) {
  return ChannelRealization({h}, subcarriers);
}

// N x K matrix with mutually orthogonal columns (scaled unit vectors).
inline CMatrix orthogonal_columns(int antennas, int users, RngStream& rng) {
  CMatrix h = CMatrix::Zero(antennas, users);
  for (int k = 0; k < users; ++k) h(k % antennas, k) = rng.complex_normal(1.0) + 0.5;
  return h;
}

inline Grid random_grid(int rows, int cols, RngStream& rng, double variance = 1.0) {
  Grid g(rows, cols);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.complex_normal(variance);
  return g;
}

inline Grid random_symbols(const Constellation& c, int users, int subcarriers, RngStream& rng,
                           std::vector<std::uint32_t>* labels = nullptr) {
  Grid x(users, subcarriers);
  if (labels) labels->resize(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto label = rng.uniform_below(static_cast<std::uint32_t>(c.order()));
    x.data()[i] = c.map(label);
    if (labels) (*labels)[static_cast<std::size_t>(i)] = label;
  }
  return x;
}

inline ThresholdConfig zero_thresholds(int antennas) {
  ThresholdConfig t;
  t.tau = CVector::Zero(antennas);
  return t;
}

}  // namespace testing_util
