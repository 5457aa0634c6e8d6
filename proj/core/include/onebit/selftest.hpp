#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "onebit/channel.hpp"
#include "onebit/frontend.hpp"

namespace onebit {

// A small random link for oracle checks: exponential-profile channel, random
// QPSK-box symbols, PRQ-style thresholds and a noisy one-bit frame.
struct RandomInstance {
  ChannelRealization channel;
  QuantizedFrame frame;
  Grid symbols;        // transmitted grid
  Grid probe;          // a random interior evaluation point
  double noise_variance;
};
RandomInstance make_random_instance(int antennas, int users, int subcarriers, int taps,
                                    std::uint64_t seed, double noise_variance = 0.5,
                                    double threshold_variance = 0.3);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Runs the built-in oracle/invariant checks (probit functions, DFT,
// circulant factorization, gradient and Hessian against finite differences,
// the quasi-Newton approximation chain, threshold design arithmetic).
std::vector<CheckResult> run_selftest();
// Prints one line per check; true when all pass.
bool report_selftest(std::ostream& out);

}  // namespace onebit
