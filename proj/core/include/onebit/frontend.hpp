#pragma once

#include <string>

#include "onebit/rng.hpp"
#include "onebit/types.hpp"

namespace onebit {

enum class Quantization {
  ztq,  // zero thresholds
  prq,  // pseudo-random Gaussian thresholds
};

std::string to_string(Quantization mode);
Quantization parse_quantization(const std::string& text);

struct ThresholdConfig {
  Quantization mode = Quantization::ztq;
  double variance = 0.0;  // sigma_tau^2, total complex variance
  CVector tau;            // one complex threshold per antenna, time-invariant
};

// r[m] for m = 0..V-1 as an N x V grid with entries in {+-1 +- j}, together
// with the thresholds that produced it.
struct QuantizedFrame {
  Grid signs;
  ThresholdConfig thresholds;

  int antennas() const noexcept { return static_cast<int>(signs.rows()); }
  int samples() const noexcept { return static_cast<int>(signs.cols()); }
};

// SNR above which dithering is switched on, in dB:
// 0.15 K^2 + L_s - 2.5 log2(N) + 14.
double threshold_snr_db(int users, int antennas, int strong_taps);

// max{0, 1/rho_t - N0} with rho_t converted from dB to linear.
double threshold_variance(double threshold_snr_db, double noise_variance);

// tau ~ CN(0, variance I_N).
CVector gen_thresholds(double variance, int antennas, RngStream& rng);

// Threshold design for one frame: ZTQ gives zeros; PRQ evaluates the
// threshold-SNR ramp and draws tau.
ThresholdConfig design_thresholds(Quantization mode, int users, int antennas, int strong_taps,
                                  double noise_variance, RngStream& rng);

// r = sign(Re{y - tau}) + j sign(Im{y - tau}) with sign(0) = +1, tau applied
// to every column.
QuantizedFrame quantize(const Grid& received, const ThresholdConfig& thresholds);

}  // namespace onebit
