#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "onebit/channel.hpp"
#include "onebit/detectors.hpp"
#include "onebit/frontend.hpp"

namespace onebit {

// One simulation scenario. Every field has a config-file key (and a CLI flag
// of the same name); see apply_setting() for the key list.
struct SystemConfig {
  int antennas = 128;                 // N
  int users = 10;                     // K
  int subcarriers = 256;              // V
  int order = 16;                     // M
  std::vector<double> snr_db{10.0};   // rho = Es / N0 with Es = 1
  std::string pdp = "sds";            // sds | lds | path to a profile file
  Quantization quant = Quantization::ztq;
  DetectorKind detector = DetectorKind::pqnd;
  std::vector<DetectorKind> detectors{DetectorKind::nm, DetectorKind::pqnd_zf,
                                      DetectorKind::pqnd, DetectorKind::obox};
  // Overrides of default_params(); unset means the per-detector default.
  std::optional<double> step;
  // Per-detector step, applied after `step` (config key alpha_for = obox:0.009,nm:1).
  std::map<DetectorKind, double> detector_step;
  std::optional<int> iterations;
  std::optional<double> damping_snr_db;
  bool damping = true;
  bool final_norm_projection = true;
  // PRQ: fixed sigma_tau^2 instead of the threshold-SNR ramp.
  std::optional<double> threshold_variance;
  // Draw one threshold vector per SNR point instead of one per frame.
  bool freeze_thresholds = false;
  int frames = 10;
  std::uint64_t seed = 1;
  std::optional<int> cp_length;       // echoed only; the channel is circular
  int workers = 0;                    // 0: $ONEBIT_WORKERS or all cores
};

// key=value text, '#' comments, blank lines ignored. Unknown keys and
// malformed values throw ConfigError (ParseError for syntax, with line).
SystemConfig parse_config(std::istream& in, SystemConfig base = {});
SystemConfig load_config(const std::string& path, SystemConfig base = {});
// Applies one key/value pair. Keys: antennas|N, users|K, subcarriers|V,
// order|M, snr (comma list), pdp, quant, detector, detectors (comma list),
// alpha, alpha_for (detector:step list), iterations, damping_snr (dB or
// "none"), final_norm, sigma_tau_sq,
// freeze_thresholds, frames, seed, cp_length, workers.
void apply_setting(SystemConfig& config, const std::string& key, const std::string& value);

// Resolved scenario: config plus the loaded delay profile. Validation runs
// every guard (V >= L, oracle scopes, ...) before any trial is drawn.
struct Scenario {
  SystemConfig config;
  PowerDelayProfile profile;
  Constellation constellation;
};
Scenario prepare(const SystemConfig& config);
// Throws ConfigError / OracleScopeError for an invalid detector selection.
void validate_detector(const Scenario& scenario, DetectorKind kind);

DetectorParams resolve_params(const SystemConfig& config, DetectorKind kind);

struct TrialRecord {
  long long bit_errors = 0;
  long long bits = 0;
  long long symbol_errors = 0;
  long long symbols = 0;
  std::vector<double> negll_trace;
  std::vector<double> ber_trace;
  double wall_time = 0.0;        // seconds spent in the detector
  double threshold_variance = 0.0;
  bool flagged = false;
};

// One Monte-Carlo frame at SNR point `point`: bits, channel, noise and then
// thresholds drawn in that order from substream (point << 32 | frame).
struct FrameDraw {
  Grid symbols;
  std::vector<std::uint32_t> labels;
  ChannelRealization channel;
  QuantizedFrame frame;
  double noise_variance;
};
FrameDraw draw_frame(const Scenario& scenario, int point, int frame);

TrialRecord run_trial(const Scenario& scenario, int point, int frame, DetectorKind kind,
                      bool with_traces = false);

struct BerRow {
  double snr_db = 0.0;
  std::string detector;
  std::string quant;
  std::string pdp;
  int antennas = 0;
  int users = 0;
  int subcarriers = 0;
  int order = 0;
  int frames = 0;
  long long bits = 0;
  long long bit_errors = 0;
  double ber = 0.0;
  double ser = 0.0;
  int flagged = 0;
  std::uint64_t seed = 0;
};

struct ConvergenceRow {
  int iteration = 0;
  std::string detector;
  double mean_negll = 0.0;
  double mean_ber = 0.0;
};

int resolve_workers(int requested);

// Monte-Carlo BER at every SNR of the grid with config.detector.
std::vector<BerRow> run_ber(const SystemConfig& config);
// Mean -L and raw-iterate BER per iteration for config.detectors, all run on
// the same frames. Uses config.snr_db.front().
std::vector<ConvergenceRow> run_convergence(const SystemConfig& config);

enum class SweepAxis { users, antennas };
// run_ber repeated with K (or N) replaced by each value; thresholds and
// damping follow the new dimensions.
std::vector<BerRow> run_sweep(const SystemConfig& config, SweepAxis axis,
                              const std::vector<int>& values);

void write_ber_csv(std::ostream& out, const std::vector<BerRow>& rows);
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);

// Half-width of the 95% normal-approximation binomial interval.
double binomial_ci95(long long errors, long long trials);

}  // namespace onebit
