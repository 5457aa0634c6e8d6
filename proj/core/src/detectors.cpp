#include "onebit/detectors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "onebit/probit.hpp"

namespace onebit {
namespace {

constexpr std::size_t kMaxNewtonDimension = 2048;
constexpr double kMaxMlCandidates = 1e6;

void validate(const DetectionProblem& problem) {
  LikelihoodModel{problem.channel, problem.frame, problem.noise_variance}.validate();
  if (problem.truth != nullptr && (problem.truth->rows() != problem.channel.users() ||
                                   problem.truth->cols() != problem.channel.subcarriers())) {
    throw ContractError("truth grid must be K x V");
  }
}

void validate(const DetectorParams& params) {
  if (!(params.step >= 0.0) || !std::isfinite(params.step)) {
    throw ConfigError("step size must be finite and non-negative");
  }
  if (params.iterations < 1) throw ConfigError("iteration count must be >= 1");
}

double initial_scale_variance(const DetectionProblem& problem) {
  return received_variance(problem.channel.users(), problem.noise_variance,
                           problem.frame.thresholds.variance);
}

class TraceRecorder {
 public:
  TraceRecorder(const DetectionProblem& problem, bool enabled)
      : problem_(problem),
        enabled_(enabled),
        reference_{problem.channel, problem.frame, problem.noise_variance} {
    if (enabled_ && problem.truth != nullptr) {
      sent_ = hard_decisions(*problem.truth, problem.constellation);
    }
  }

  void record(const Grid& x, DetectorEstimate& out) const {
    if (!enabled_) return;
    out.trace_negll.push_back(-log_likelihood(x, reference_));
    if (problem_.truth != nullptr) {
      const auto counts = count_errors(hard_decisions(x, problem_.constellation), sent_,
                                       problem_.constellation.bits_per_symbol());
      out.trace_ber.push_back(static_cast<double>(counts.bit_errors) /
                              static_cast<double>(counts.bits));
    }
  }

 private:
  const DetectionProblem& problem_;
  bool enabled_;
  LikelihoodModel reference_;
  std::vector<std::uint32_t> sent_;
};

void flag(DetectorEstimate& out, const std::string& reason) {
  if (!out.flagged) out.flag_reason = reason;
  out.flagged = true;
}

// Shared projected iteration. `update(x, working_model)` returns the additive
// change to x before projection.
template <class Update>
DetectorEstimate run_projected(const DetectionProblem& problem, const DetectorParams& params,
                               Update&& update) {
  validate(problem);
  validate(params);
  DetectorEstimate out;
  const TraceRecorder trace(problem, params.record_trace);

  Grid x = mrc_init(problem.frame, problem.channel, initial_scale_variance(problem));
  const double snr_db = -10.0 * std::log10(problem.noise_variance);
  const LikelihoodModel working{
      problem.channel, problem.frame,
      damping_factor(snr_db, params.damping_snr_db) * problem.noise_variance};
  trace.record(x, out);

  const double boundary = problem.constellation.boundary();
  for (int t = 1; t <= params.iterations; ++t) {
    Grid candidate;
    try {
      candidate = x + update(x, working);
    } catch (const TrialFailure& failure) {
      flag(out, failure.what());
      candidate = x;
    }
    if (!candidate.allFinite()) {
      flag(out, "non-finite step at iteration " + std::to_string(t));
      candidate = x;
    }
    x = std::move(candidate);
    if (t < params.iterations || !params.final_norm_projection) {
      project_box(x, boundary);
    } else if (!project_norm(x)) {
      flag(out, "vanishing estimate at the norm projection");
    }
    trace.record(x, out);
  }
  out.xhat = std::move(x);
  return out;
}

DetectorEstimate one_shot(const DetectionProblem& problem, Grid estimate) {
  DetectorEstimate out;
  out.xhat = std::move(estimate);
  TraceRecorder(problem, true).record(out.xhat, out);
  return out;
}

}  // namespace

std::string to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::mrc: return "mrc";
    case DetectorKind::zf: return "zf";
    case DetectorKind::pqnd: return "pqnd";
    case DetectorKind::pqnd_zf: return "pqnd_zf";
    case DetectorKind::obox: return "obox";
    case DetectorKind::nm: return "nm";
    case DetectorKind::ml: return "ml";
  }
  return "unknown";
}

DetectorKind parse_detector(const std::string& text) {
  for (auto kind : {DetectorKind::mrc, DetectorKind::zf, DetectorKind::pqnd,
                    DetectorKind::pqnd_zf, DetectorKind::obox, DetectorKind::nm,
                    DetectorKind::ml}) {
    if (text == to_string(kind)) return kind;
  }
  throw ConfigError("unknown detector '" + text + "' (expected mrc, zf, pqnd, pqnd_zf, obox, nm or ml)");
}

double damping_factor(double snr_db, std::optional<double> damping_snr_db) {
  if (!damping_snr_db) return 1.0;
  const double rho = std::pow(10.0, snr_db / 10.0);
  const double rho_d = std::pow(10.0, *damping_snr_db / 10.0);
  return std::max(1.0, rho / rho_d);
}

double default_damping_snr_db(int users, int antennas) {
  return 20.0 - 150.0 * static_cast<double>(users) / static_cast<double>(antennas);
}

DetectorParams default_params(DetectorKind kind, int users, int antennas) {
  DetectorParams params;
  params.damping_snr_db = default_damping_snr_db(users, antennas);
  switch (kind) {
    case DetectorKind::pqnd: params.step = 0.7; break;
    case DetectorKind::pqnd_zf: params.step = 0.8; break;
    case DetectorKind::nm: params.step = 1.0; break;
    case DetectorKind::obox:
      params.step = 0.007;
      params.damping_snr_db = 15.0;
      break;
    default: break;
  }
  return params;
}

DetectorEstimate mrc_detect(const DetectionProblem& problem) {
  validate(problem);
  return one_shot(problem,
                  mrc_init(problem.frame, problem.channel, initial_scale_variance(problem)));
}

DetectorEstimate zf_detect(const DetectionProblem& problem) {
  validate(problem);
  const double scale = std::sqrt(std::numbers::pi * initial_scale_variance(problem) / 4.0);
  try {
    return one_shot(problem, zf_equalize(problem.channel, problem.frame.signs, scale));
  } catch (const TrialFailure& failure) {
    DetectorEstimate out = mrc_detect(problem);
    flag(out, failure.what());
    return out;
  }
}

DetectorEstimate pqnd_detect(const DetectionProblem& problem, const DetectorParams& params) {
  return run_projected(problem, params, [&](const Grid& x, const LikelihoodModel& model) {
    const BranchTerms terms = branch_terms(compute_u(x, model), model.frame);
    return Grid(-params.step * pqnd_step_mrc(terms, model));
  });
}

DetectorEstimate pqnd_zf_detect(const DetectionProblem& problem, const DetectorParams& params) {
  return run_projected(problem, params, [&](const Grid& x, const LikelihoodModel& model) {
    const BranchTerms terms = branch_terms(compute_u(x, model), model.frame);
    return Grid(-params.step * pqnd_step_zf(terms, model));
  });
}

DetectorEstimate obox_detect(const DetectionProblem& problem, const DetectorParams& params) {
  return run_projected(problem, params, [&](const Grid& x, const LikelihoodModel& model) {
    return Grid(params.step * gradient(x, model));
  });
}

DetectorEstimate newton_exact_detect(const DetectionProblem& problem,
                                     const DetectorParams& params) {
  validate(problem);
  const double snr_db = -10.0 * std::log10(problem.noise_variance);
  const LikelihoodModel working{
      problem.channel, problem.frame,
      damping_factor(snr_db, params.damping_snr_db) * problem.noise_variance};
  const DenseLikelihood dense(working, kMaxNewtonDimension);
  return run_projected(problem, params, [&](const Grid& x, const LikelihoodModel&) {
    const RVector step = dense.newton_step(lift(x));
    return Grid(-params.step * unlift(step, x.rows(), x.cols()));
  });
}

Grid ml_exhaustive(const DetectionProblem& problem) {
  validate(problem);
  const int k = problem.channel.users();
  const int v_count = problem.channel.subcarriers();
  const int positions = k * v_count;
  const int order = problem.constellation.order();
  if (std::pow(static_cast<double>(order), positions) > kMaxMlCandidates) {
    throw OracleScopeError("exhaustive search over " + std::to_string(order) + "^" +
                           std::to_string(positions) + " candidates exceeds 1e6");
  }

  const LikelihoodModel model{problem.channel, problem.frame, problem.noise_variance};
  const CMatrix g = effective_channel_matrix(problem.channel);
  const CVector tau = problem.frame.thresholds.tau.replicate(v_count, 1);
  const CVector r = problem.frame.signs.reshaped();
  const double c = model.margin_scale();
  const auto& points = problem.constellation.points();

  std::vector<int> digits(positions, 0);
  CVector x = CVector::Constant(positions, points[0]);
  CVector z = g * x;
  auto score = [&]() {
    double total = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const cdouble s = z[i] - tau[i];
      total += log_normal_cdf(c * r[i].real() * s.real()) +
               log_normal_cdf(c * r[i].imag() * s.imag());
    }
    return total;
  };

  double best = score();
  CVector best_x = x;
  while (true) {
    int pos = 0;
    while (pos < positions && digits[pos] == order - 1) {
      z += g.col(pos) * (points[0] - x[pos]);
      x[pos] = points[0];
      digits[pos] = 0;
      ++pos;
    }
    if (pos == positions) break;
    ++digits[pos];
    z += g.col(pos) * (points[digits[pos]] - x[pos]);
    x[pos] = points[digits[pos]];
    const double value = score();
    if (value > best) {
      best = value;
      best_x = x;
    }
  }
  return best_x.reshaped(k, v_count);
}

DetectorEstimate ml_detect(const DetectionProblem& problem) {
  return one_shot(problem, ml_exhaustive(problem));
}

DetectorEstimate detect(DetectorKind kind, const DetectionProblem& problem,
                        const DetectorParams& params) {
  switch (kind) {
    case DetectorKind::mrc: return mrc_detect(problem);
    case DetectorKind::zf: return zf_detect(problem);
    case DetectorKind::pqnd: return pqnd_detect(problem, params);
    case DetectorKind::pqnd_zf: return pqnd_zf_detect(problem, params);
    case DetectorKind::obox: return obox_detect(problem, params);
    case DetectorKind::nm: return newton_exact_detect(problem, params);
    case DetectorKind::ml: return ml_detect(problem);
  }
  throw ConfigError("unknown detector");
}

std::vector<std::uint32_t> hard_decisions(const Grid& estimate,
                                          const Constellation& constellation) {
  std::vector<std::uint32_t> labels(static_cast<std::size_t>(estimate.size()));
  for (Eigen::Index i = 0; i < estimate.size(); ++i) {
    labels[static_cast<std::size_t>(i)] = constellation.demap(estimate.data()[i]).label;
  }
  return labels;
}

ErrorCount count_errors(const std::vector<std::uint32_t>& detected,
                        const std::vector<std::uint32_t>& sent, int bits_per_symbol) {
  if (detected.size() != sent.size()) throw ContractError("label vectors differ in length");
  ErrorCount counts;
  counts.symbols = static_cast<long long>(sent.size());
  counts.bits = counts.symbols * bits_per_symbol;
  for (std::size_t i = 0; i < sent.size(); ++i) {
    const std::uint32_t diff = detected[i] ^ sent[i];
    counts.bit_errors += std::popcount(diff);
    counts.symbol_errors += diff != 0 ? 1 : 0;
  }
  return counts;
}

}  // namespace onebit
