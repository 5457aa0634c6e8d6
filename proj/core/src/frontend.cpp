#include "onebit/frontend.hpp"

#include <algorithm>
#include <cmath>

namespace onebit {

std::string to_string(Quantization mode) { return mode == Quantization::ztq ? "ztq" : "prq"; }

Quantization parse_quantization(const std::string& text) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "ztq") return Quantization::ztq;
  if (lower == "prq") return Quantization::prq;
  throw ConfigError("unknown quantization mode '" + text + "' (expected ztq or prq)");
}

double threshold_snr_db(int users, int antennas, int strong_taps) {
  if (users < 1 || antennas < 1 || strong_taps < 1) {
    throw ConfigError("threshold SNR needs K, N, L_s >= 1");
  }
  const double k = users;
  return 0.15 * k * k + strong_taps - 2.50 * std::log2(static_cast<double>(antennas)) + 14.0;
}

double threshold_variance(double threshold_snr_db, double noise_variance) {
  if (!(noise_variance > 0.0)) throw ConfigError("noise variance must be positive");
  const double rho_t = std::pow(10.0, threshold_snr_db / 10.0);
  return std::max(0.0, 1.0 / rho_t - noise_variance);
}

CVector gen_thresholds(double variance, int antennas, RngStream& rng) {
  if (variance < 0.0) throw ConfigError("threshold variance must be non-negative");
  CVector tau = CVector::Zero(antennas);
  if (variance == 0.0) return tau;
  for (int n = 0; n < antennas; ++n) tau[n] = rng.complex_normal(variance);
  return tau;
}

ThresholdConfig design_thresholds(Quantization mode, int users, int antennas, int strong_taps,
                                  double noise_variance, RngStream& rng) {
  ThresholdConfig cfg;
  cfg.mode = mode;
  if (mode == Quantization::ztq) {
    cfg.tau = CVector::Zero(antennas);
    return cfg;
  }
  cfg.variance =
      threshold_variance(threshold_snr_db(users, antennas, strong_taps), noise_variance);
  cfg.tau = gen_thresholds(cfg.variance, antennas, rng);
  return cfg;
}

QuantizedFrame quantize(const Grid& received, const ThresholdConfig& thresholds) {
  if (thresholds.tau.size() != received.rows()) {
    throw ContractError("threshold vector length must equal the antenna count");
  }
  auto sign = [](double a) { return a >= 0.0 ? 1.0 : -1.0; };
  QuantizedFrame frame;
  frame.thresholds = thresholds;
  frame.signs.resize(received.rows(), received.cols());
  for (Eigen::Index m = 0; m < received.cols(); ++m) {
    for (Eigen::Index n = 0; n < received.rows(); ++n) {
      const cdouble shifted = received(n, m) - thresholds.tau[n];
      frame.signs(n, m) = {sign(shifted.real()), sign(shifted.imag())};
    }
  }
  return frame;
}

}  // namespace onebit
