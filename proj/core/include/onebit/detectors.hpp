#pragma once

#include <optional>
#include <string>
#include <vector>

#include "onebit/channel.hpp"
#include "onebit/constellation.hpp"
#include "onebit/frontend.hpp"
#include "onebit/likelihood.hpp"

namespace onebit {

enum class DetectorKind {
  mrc,      // Bussgang-scaled MRC, one shot
  zf,       // Bussgang-scaled ZF, one shot
  pqnd,     // projected quasi-Newton, MRC-form step
  pqnd_zf,  // projected quasi-Newton, per-subcarrier ZF-form step
  obox,     // projected gradient ascent (1BOX)
  nm,       // projected exact Newton (dense oracle)
  ml,       // exhaustive maximum likelihood (oracle)
};

std::string to_string(DetectorKind kind);
DetectorKind parse_detector(const std::string& text);

struct DetectorParams {
  double step = 0.7;                       // alpha
  int iterations = 6;                      // T
  std::optional<double> damping_snr_db;    // rho_d; empty disables damping
  bool final_norm_projection = true;       // P_norm at t = T, else P_box
  bool record_trace = true;
};

// zeta = max{1, rho / rho_d}, both converted to linear power.
double damping_factor(double snr_db, std::optional<double> damping_snr_db);
// rho_d = 20 - 150 K / N dB.
double default_damping_snr_db(int users, int antennas);
// Per-detector defaults: step, T = 6 and damping (1BOX uses 15 dB).
DetectorParams default_params(DetectorKind kind, int users, int antennas);

struct DetectionProblem {
  const ChannelRealization& channel;
  const QuantizedFrame& frame;
  const Constellation& constellation;
  double noise_variance;         // the true N0
  const Grid* truth = nullptr;   // transmitted symbols, for BER traces
};

struct DetectorEstimate {
  Grid xhat;                          // K x V soft estimates
  std::vector<double> trace_negll;    // -L at the true N0, index 0 = MRC init
  std::vector<double> trace_ber;      // raw-iterate BER, when truth is given
  bool flagged = false;
  std::string flag_reason;
};

DetectorEstimate mrc_detect(const DetectionProblem& problem);
DetectorEstimate zf_detect(const DetectionProblem& problem);

// MRC init, N0 <- zeta N0, then T rounds of u, step and projection
// (box for t < T, norm at t = T). A non-finite step keeps the previous
// iterate and flags the estimate.
DetectorEstimate pqnd_detect(const DetectionProblem& problem, const DetectorParams& params);
DetectorEstimate pqnd_zf_detect(const DetectionProblem& problem, const DetectorParams& params);
// x <- P(x + alpha grad L(x)) from the same start and schedule.
DetectorEstimate obox_detect(const DetectionProblem& problem, const DetectorParams& params);
// x <- P(x - alpha H^-1 grad L) on the dense lifted system; 2KV <= 2048.
DetectorEstimate newton_exact_detect(const DetectionProblem& problem,
                                     const DetectorParams& params);

// The alphabet grid maximizing L at the true N0. Candidates are enumerated
// with user/subcarrier position 0 varying fastest; ties keep the first.
// Throws OracleScopeError when M^(KV) > 1e6.
Grid ml_exhaustive(const DetectionProblem& problem);
DetectorEstimate ml_detect(const DetectionProblem& problem);

DetectorEstimate detect(DetectorKind kind, const DetectionProblem& problem,
                        const DetectorParams& params);

// Hard decisions: Gray labels of the nearest points, column order.
std::vector<std::uint32_t> hard_decisions(const Grid& estimate, const Constellation& constellation);

struct ErrorCount {
  long long bit_errors = 0;
  long long bits = 0;
  long long symbol_errors = 0;
  long long symbols = 0;
};
ErrorCount count_errors(const std::vector<std::uint32_t>& detected,
                        const std::vector<std::uint32_t>& sent, int bits_per_symbol);

}  // namespace onebit
