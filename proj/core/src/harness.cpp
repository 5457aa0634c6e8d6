#include "onebit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace onebit {
namespace {

constexpr std::uint64_t kFrozenThresholdStream = 0xffffffffULL;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double d = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(d)) throw std::invalid_argument(value);
    return d;
  } catch (const std::logic_error&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  }
}

long long to_integer(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return i;
  } catch (const std::logic_error&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
  }
}

int to_int(const std::string& key, const std::string& value) {
  const long long i = to_integer(key, value);
  if (i < -(1LL << 31) || i > (1LL << 31) - 1) throw ConfigError("key '" + key + "' out of range");
  return static_cast<int>(i);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + value + "'");
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

template <class Fn>
void parallel_for(int count, int workers, Fn&& fn) {
  workers = std::clamp(workers, 1, std::max(1, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t stream_id(int point, int frame) {
  return (static_cast<std::uint64_t>(point) << 32) | static_cast<std::uint32_t>(frame);
}

bool is_iterative(DetectorKind kind) {
  return kind == DetectorKind::pqnd || kind == DetectorKind::pqnd_zf ||
         kind == DetectorKind::obox || kind == DetectorKind::nm;
}

}  // namespace

void apply_setting(SystemConfig& config, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "antennas" || key == "N") {
    config.antennas = to_int(key, value);
  } else if (key == "users" || key == "K") {
    config.users = to_int(key, value);
  } else if (key == "subcarriers" || key == "V") {
    config.subcarriers = to_int(key, value);
  } else if (key == "order" || key == "M") {
    config.order = to_int(key, value);
  } else if (key == "snr") {
    config.snr_db.clear();
    for (const auto& item : split_list(value)) config.snr_db.push_back(to_double(key, item));
  } else if (key == "pdp") {
    config.pdp = value;
  } else if (key == "quant") {
    config.quant = parse_quantization(value);
  } else if (key == "detector") {
    config.detector = parse_detector(value);
  } else if (key == "detectors") {
    config.detectors.clear();
    for (const auto& item : split_list(value)) config.detectors.push_back(parse_detector(item));
  } else if (key == "alpha") {
    config.step = to_double(key, value);
  } else if (key == "alpha_for") {
    config.detector_step.clear();
    for (const auto& item : split_list(value)) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) {
        throw ConfigError("key 'alpha_for': expected detector:step, got '" + item + "'");
      }
      config.detector_step[parse_detector(trim(item.substr(0, colon)))] =
          to_double(key, trim(item.substr(colon + 1)));
    }
  } else if (key == "iterations") {
    config.iterations = to_int(key, value);
  } else if (key == "damping_snr") {
    if (value == "none") {
      config.damping = false;
      config.damping_snr_db.reset();
    } else {
      config.damping = true;
      config.damping_snr_db = to_double(key, value);
    }
  } else if (key == "final_norm") {
    config.final_norm_projection = to_bool(key, value);
  } else if (key == "sigma_tau_sq") {
    config.threshold_variance = to_double(key, value);
  } else if (key == "freeze_thresholds") {
    config.freeze_thresholds = to_bool(key, value);
  } else if (key == "frames") {
    config.frames = to_int(key, value);
  } else if (key == "seed") {
    const long long seed = to_integer(key, value);
    if (seed < 0) throw ConfigError("seed must be non-negative");
    config.seed = static_cast<std::uint64_t>(seed);
  } else if (key == "cp_length") {
    config.cp_length = to_int(key, value);
  } else if (key == "workers") {
    config.workers = to_int(key, value);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

SystemConfig parse_config(std::istream& in, SystemConfig base) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected key=value",
                       line_no);
    }
    try {
      apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

SystemConfig load_config(const std::string& path, SystemConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in, std::move(base));
}

Scenario prepare(const SystemConfig& config) {
  if (config.antennas < 1 || config.users < 1) throw ConfigError("N and K must be >= 1");
  if (config.subcarriers < 1) throw ConfigError("V must be >= 1");
  if (config.frames < 1) throw ConfigError("frames must be >= 1");
  if (config.snr_db.empty()) throw ConfigError("SNR grid is empty");
  if (config.iterations && *config.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (config.step && *config.step < 0.0) throw ConfigError("alpha must be non-negative");
  for (const auto& [kind, step] : config.detector_step) {
    if (step < 0.0) throw ConfigError("alpha for " + to_string(kind) + " must be non-negative");
  }
  if (config.threshold_variance && *config.threshold_variance < 0.0) {
    throw ConfigError("sigma_tau_sq must be non-negative");
  }
  Scenario scenario{config, resolve_profile(config.pdp), Constellation(config.order)};
  if (config.subcarriers < scenario.profile.length()) {
    throw ConfigError("V=" + std::to_string(config.subcarriers) + " is shorter than the '" +
                      config.pdp + "' profile (L=" + std::to_string(scenario.profile.length()) +
                      ")");
  }
  if (config.cp_length && *config.cp_length < scenario.profile.length() - 1) {
    throw ConfigError("cp_length must be at least L - 1");
  }
  return scenario;
}

void validate_detector(const Scenario& scenario, DetectorKind kind) {
  const auto& c = scenario.config;
  const double positions = static_cast<double>(c.users) * c.subcarriers;
  if (kind == DetectorKind::ml && std::pow(static_cast<double>(c.order), positions) > 1e6) {
    throw OracleScopeError("ml: M^(KV) = " + std::to_string(c.order) + "^" +
                           std::to_string(static_cast<long long>(positions)) +
                           " candidates exceeds the 1e6 guard");
  }
  if (kind == DetectorKind::nm && 2.0 * positions > 2048.0) {
    throw OracleScopeError("nm: lifted dimension 2KV = " +
                           std::to_string(static_cast<long long>(2 * positions)) +
                           " exceeds the 2048 guard");
  }
}

DetectorParams resolve_params(const SystemConfig& config, DetectorKind kind) {
  DetectorParams params = default_params(kind, config.users, config.antennas);
  if (config.step) params.step = *config.step;
  if (const auto it = config.detector_step.find(kind); it != config.detector_step.end()) {
    params.step = it->second;
  }
  if (config.iterations) params.iterations = *config.iterations;
  if (!config.damping) {
    params.damping_snr_db.reset();
  } else if (config.damping_snr_db) {
    params.damping_snr_db = *config.damping_snr_db;
  }
  params.final_norm_projection = config.final_norm_projection;
  return params;
}

FrameDraw draw_frame(const Scenario& scenario, int point, int frame) {
  const auto& c = scenario.config;
  RngStream rng(c.seed, stream_id(point, frame));
  const double n0 = std::pow(10.0, -c.snr_db.at(static_cast<std::size_t>(point)) / 10.0);

  std::vector<std::uint32_t> labels(static_cast<std::size_t>(c.users) * c.subcarriers);
  Grid symbols(c.users, c.subcarriers);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = rng.uniform_below(static_cast<std::uint32_t>(c.order));
    symbols.data()[i] = scenario.constellation.map(labels[i]);
  }
  ChannelRealization channel =
      draw_channel(scenario.profile, c.antennas, c.users, c.subcarriers, rng);
  const Grid received = apply_link(symbols, channel, n0, rng);

  ThresholdConfig thresholds;
  thresholds.mode = c.quant;
  if (c.quant == Quantization::prq) {
    thresholds.variance =
        c.threshold_variance.value_or(threshold_variance(
            threshold_snr_db(c.users, c.antennas, scenario.profile.strong_taps), n0));
    if (c.freeze_thresholds) {
      RngStream frozen(c.seed, stream_id(point, 0) | kFrozenThresholdStream);
      thresholds.tau = gen_thresholds(thresholds.variance, c.antennas, frozen);
    } else {
      thresholds.tau = gen_thresholds(thresholds.variance, c.antennas, rng);
    }
  } else {
    thresholds.tau = CVector::Zero(c.antennas);
  }
  QuantizedFrame quantized = quantize(received, thresholds);
  return FrameDraw{std::move(symbols), std::move(labels), std::move(channel),
                   std::move(quantized), n0};
}

TrialRecord run_trial(const Scenario& scenario, int point, int frame, DetectorKind kind,
                      bool with_traces) {
  const FrameDraw draw = draw_frame(scenario, point, frame);
  DetectorParams params = resolve_params(scenario.config, kind);
  params.record_trace = with_traces;
  const DetectionProblem problem{draw.channel, draw.frame, scenario.constellation,
                                 draw.noise_variance, with_traces ? &draw.symbols : nullptr};

  const auto start = std::chrono::steady_clock::now();
  const DetectorEstimate estimate = detect(kind, problem, params);
  const auto stop = std::chrono::steady_clock::now();

  const auto counts = count_errors(hard_decisions(estimate.xhat, scenario.constellation),
                                   draw.labels, scenario.constellation.bits_per_symbol());
  TrialRecord record;
  record.bit_errors = counts.bit_errors;
  record.bits = counts.bits;
  record.symbol_errors = counts.symbol_errors;
  record.symbols = counts.symbols;
  record.negll_trace = estimate.trace_negll;
  record.ber_trace = estimate.trace_ber;
  record.wall_time = std::chrono::duration<double>(stop - start).count();
  record.threshold_variance = draw.frame.thresholds.variance;
  record.flagged = estimate.flagged;
  return record;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ONEBIT_WORKERS"); env != nullptr && *env != '\0') {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<BerRow> run_ber(const SystemConfig& config) {
  const Scenario scenario = prepare(config);
  validate_detector(scenario, config.detector);
  const int workers = resolve_workers(config.workers);

  std::vector<BerRow> rows;
  for (std::size_t p = 0; p < config.snr_db.size(); ++p) {
    std::vector<TrialRecord> trials(static_cast<std::size_t>(config.frames));
    parallel_for(config.frames, workers, [&](int f) {
      trials[static_cast<std::size_t>(f)] =
          run_trial(scenario, static_cast<int>(p), f, config.detector);
    });

    BerRow row;
    row.snr_db = config.snr_db[p];
    row.detector = to_string(config.detector);
    row.quant = to_string(config.quant);
    row.pdp = scenario.profile.label;
    row.antennas = config.antennas;
    row.users = config.users;
    row.subcarriers = config.subcarriers;
    row.order = config.order;
    row.frames = config.frames;
    row.seed = config.seed;
    long long symbol_errors = 0;
    long long symbols = 0;
    for (const auto& t : trials) {
      row.bits += t.bits;
      row.bit_errors += t.bit_errors;
      symbol_errors += t.symbol_errors;
      symbols += t.symbols;
      row.flagged += t.flagged ? 1 : 0;
    }
    row.ber = static_cast<double>(row.bit_errors) / static_cast<double>(row.bits);
    row.ser = static_cast<double>(symbol_errors) / static_cast<double>(symbols);
    rows.push_back(row);
  }
  return rows;
}

std::vector<ConvergenceRow> run_convergence(const SystemConfig& config) {
  const Scenario scenario = prepare(config);
  if (config.detectors.empty()) throw ConfigError("no detectors selected for convergence");
  for (auto kind : config.detectors) validate_detector(scenario, kind);
  const int workers = resolve_workers(config.workers);
  const std::size_t detector_count = config.detectors.size();

  // Per frame, per detector: the (negll, ber) trace over iterations 0..T.
  struct FrameTraces {
    std::vector<std::vector<double>> negll;
    std::vector<std::vector<double>> ber;
  };
  std::vector<FrameTraces> traces(static_cast<std::size_t>(config.frames));

  parallel_for(config.frames, workers, [&](int f) {
    const FrameDraw draw = draw_frame(scenario, 0, f);
    const DetectionProblem problem{draw.channel, draw.frame, scenario.constellation,
                                   draw.noise_variance, &draw.symbols};
    FrameTraces& out = traces[static_cast<std::size_t>(f)];
    for (auto kind : config.detectors) {
      DetectorParams params = resolve_params(config, kind);
      params.record_trace = true;
      DetectorEstimate estimate = detect(kind, problem, params);
      if (!is_iterative(kind)) {
        // Flat reference line: iteration 0 is the shared MRC start, every
        // later row the one-shot estimate.
        const DetectorEstimate start = mrc_detect(problem);
        std::vector<double> negll(static_cast<std::size_t>(params.iterations) + 1,
                                  estimate.trace_negll.front());
        std::vector<double> ber(negll.size(), estimate.trace_ber.front());
        negll.front() = start.trace_negll.front();
        ber.front() = start.trace_ber.front();
        estimate.trace_negll = std::move(negll);
        estimate.trace_ber = std::move(ber);
      }
      out.negll.push_back(std::move(estimate.trace_negll));
      out.ber.push_back(std::move(estimate.trace_ber));
    }
  });

  std::vector<ConvergenceRow> rows;
  for (std::size_t d = 0; d < detector_count; ++d) {
    const std::size_t length = traces.front().negll[d].size();
    for (std::size_t it = 0; it < length; ++it) {
      double negll = 0.0;
      double ber = 0.0;
      for (const auto& frame : traces) {
        negll += frame.negll[d][it];
        ber += frame.ber[d][it];
      }
      rows.push_back({static_cast<int>(it), to_string(config.detectors[d]),
                      negll / config.frames, ber / config.frames});
    }
  }
  return rows;
}

std::vector<BerRow> run_sweep(const SystemConfig& config, SweepAxis axis,
                              const std::vector<int>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  for (int value : values) {
    if (value < 1) throw ConfigError("sweep values must be >= 1");
  }
  std::vector<BerRow> rows;
  for (int value : values) {
    SystemConfig point = config;
    (axis == SweepAxis::users ? point.users : point.antennas) = value;
    for (auto& row : run_ber(point)) rows.push_back(std::move(row));
  }
  return rows;
}

void write_ber_csv(std::ostream& out, const std::vector<BerRow>& rows) {
  out << "snr_db,detector,quant,pdp,N,K,V,M,frames,bits,bit_errors,ber,ser,flagged,seed\n";
  for (const auto& r : rows) {
    out << format_number(r.snr_db) << ',' << r.detector << ',' << r.quant << ',' << r.pdp << ','
        << r.antennas << ',' << r.users << ',' << r.subcarriers << ',' << r.order << ','
        << r.frames << ',' << r.bits << ',' << r.bit_errors << ',' << format_number(r.ber) << ','
        << format_number(r.ser) << ',' << r.flagged << ',' << r.seed << '\n';
  }
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "iteration,detector,mean_negll,mean_ber\n";
  for (const auto& r : rows) {
    out << r.iteration << ',' << r.detector << ',' << format_number(r.mean_negll) << ','
        << format_number(r.mean_ber) << '\n';
  }
}

double binomial_ci95(long long errors, long long trials) {
  if (trials <= 0) return 0.0;
  const double p = static_cast<double>(errors) / static_cast<double>(trials);
  return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

}  // namespace onebit
