#include "onebit/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "onebit/dft.hpp"
#include "onebit/probit.hpp"

namespace onebit {
namespace {

constexpr double kMinRcond = 1e-13;

// Lambda[v]^+ b via the K x K Gram matrix.
CVector pseudo_inverse_apply(const CMatrix& response, const CVector& b, int v) {
  const CMatrix gram = response.adjoint() * response;
  Eigen::LLT<CMatrix> llt(gram);
  if (llt.info() != Eigen::Success || llt.rcond() < kMinRcond) {
    throw TrialFailure("rank-deficient channel on subcarrier " + std::to_string(v));
  }
  return llt.solve(response.adjoint() * b);
}

Grid broadcast_tau(const QuantizedFrame& frame) {
  return frame.thresholds.tau.replicate(1, frame.samples());
}

}  // namespace

void LikelihoodModel::validate() const {
  if (!(noise_variance > 0.0)) throw ConfigError("noise variance must be positive");
  if (frame.antennas() != channel.antennas() || frame.samples() != channel.subcarriers()) {
    throw ContractError("frame must be N x V for the given channel");
  }
  if (frame.thresholds.tau.size() != channel.antennas()) {
    throw ContractError("threshold vector must have N entries");
  }
}

double LikelihoodModel::margin_scale() const { return std::sqrt(2.0 / noise_variance); }

Grid compute_u(const Grid& symbols, const LikelihoodModel& model) {
  model.validate();
  Grid z = propagate(model.channel, symbols);
  const double c = model.margin_scale();
  const Grid& r = model.frame.signs;
  const CVector& tau = model.frame.thresholds.tau;
  for (Eigen::Index m = 0; m < z.cols(); ++m) {
    for (Eigen::Index n = 0; n < z.rows(); ++n) {
      const cdouble s = z(n, m) - tau[n];
      z(n, m) = {c * r(n, m).real() * s.real(), c * r(n, m).imag() * s.imag()};
    }
  }
  return z;
}

double log_likelihood_from_u(const Grid& u) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    total += log_normal_cdf(u.data()[i].real()) + log_normal_cdf(u.data()[i].imag());
  }
  return total;
}

double log_likelihood(const Grid& symbols, const LikelihoodModel& model) {
  return log_likelihood_from_u(compute_u(symbols, model));
}

Grid branch_scores(const Grid& u, const QuantizedFrame& frame) {
  Grid e(u.rows(), u.cols());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const cdouble r = frame.signs.data()[i];
    const cdouble a = u.data()[i];
    e.data()[i] = {r.real() * varphi(a.real()), r.imag() * varphi(a.imag())};
  }
  return e;
}

Grid gradient(const Grid& symbols, const LikelihoodModel& model) {
  const Grid u = compute_u(symbols, model);
  Grid scores = branch_scores(u, model.frame);
  unitary_dft_rows(scores, Direction::forward);
  return model.margin_scale() * apply_response_adjoint(model.channel, scores);
}

double curvature_mean(const Grid& u) {
  if (u.size() == 0) throw ContractError("curvature_mean of an empty grid");
  // Mean of deviations from the first branch: exact when all branches agree.
  const double first = psi(u.data()[0].real());
  double deviation = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    deviation += (psi(u.data()[i].real()) - first) + (psi(u.data()[i].imag()) - first);
  }
  return first + deviation / (2.0 * static_cast<double>(u.size()));
}

BranchTerms branch_terms(const Grid& u, const QuantizedFrame& frame) {
  if (u.size() == 0) throw ContractError("branch_terms of an empty grid");
  BranchTerms out{Grid(u.rows(), u.cols()), 0.0};
  const double first = psi(u.data()[0].real());
  double deviation = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const cdouble r = frame.signs.data()[i];
    const cdouble a = u.data()[i];
    const double vr = varphi(a.real());
    const double vi = varphi(a.imag());
    out.scores.data()[i] = {r.real() * vr, r.imag() * vi};
    deviation += (psi_from_varphi(a.real(), vr) - first) + (psi_from_varphi(a.imag(), vi) - first);
  }
  out.gamma = first + deviation / (2.0 * static_cast<double>(u.size()));
  return out;
}

Grid pqnd_step_zf(const BranchTerms& terms, const LikelihoodModel& model) {
  Grid scores = unitary_dft_rows(terms.scores, Direction::forward);
  const double factor = 1.0 / (terms.gamma * model.margin_scale());
  Grid step(model.channel.users(), model.channel.subcarriers());
  for (int v = 0; v < model.channel.subcarriers(); ++v) {
    step.col(v) = factor * pseudo_inverse_apply(model.channel.response(v), scores.col(v), v);
  }
  return step;
}

Grid pqnd_step_mrc(const BranchTerms& terms, const LikelihoodModel& model) {
  Grid scores = unitary_dft_rows(terms.scores, Direction::forward);
  const double factor = 1.0 / (terms.gamma * model.margin_scale());
  Grid step(model.channel.users(), model.channel.subcarriers());
  for (int v = 0; v < model.channel.subcarriers(); ++v) {
    const CMatrix& response = model.channel.response(v);
    step.col(v).noalias() = response.adjoint() * scores.col(v);
    step.col(v).array() *= factor * model.channel.mrc_scale(v).array();
  }
  return step;
}

Grid pqnd_step_zf(const Grid& u, double gamma, const LikelihoodModel& model) {
  return pqnd_step_zf(BranchTerms{branch_scores(u, model.frame), gamma}, model);
}

Grid pqnd_step_mrc(const Grid& u, double gamma, const LikelihoodModel& model) {
  return pqnd_step_mrc(BranchTerms{branch_scores(u, model.frame), gamma}, model);
}

double received_variance(int users, double noise_variance, double threshold_variance) {
  return users + noise_variance + threshold_variance;
}

Grid mrc_equalize(const ChannelRealization& channel, const Grid& observations, double scale) {
  Grid fd = unitary_dft_rows(observations, Direction::forward);
  Grid out = apply_response_adjoint(channel, fd);
  for (int v = 0; v < channel.subcarriers(); ++v) {
    out.col(v).array() *= scale * channel.mrc_scale(v).array();
  }
  return out;
}

Grid zf_equalize(const ChannelRealization& channel, const Grid& observations, double scale) {
  if (observations.rows() != channel.antennas() || observations.cols() != channel.subcarriers()) {
    throw ContractError("observation grid must be N x V");
  }
  Grid fd = unitary_dft_rows(observations, Direction::forward);
  Grid out(channel.users(), channel.subcarriers());
  for (int v = 0; v < channel.subcarriers(); ++v) {
    out.col(v) = scale * pseudo_inverse_apply(channel.response(v), fd.col(v), v);
  }
  return out;
}

Grid mrc_init(const QuantizedFrame& frame, const ChannelRealization& channel,
              double sigma_y2) {
  return mrc_equalize(channel, frame.signs, std::sqrt(std::numbers::pi * sigma_y2 / 4.0));
}

void project_box(Grid& symbols, double boundary) {
  for (Eigen::Index i = 0; i < symbols.size(); ++i) {
    const cdouble s = symbols.data()[i];
    symbols.data()[i] = {std::clamp(s.real(), -boundary, boundary),
                         std::clamp(s.imag(), -boundary, boundary)};
  }
}

bool project_norm(Grid& symbols) {
  const double norm = symbols.norm();
  if (!(norm >= 1e-12)) return false;
  symbols *= std::sqrt(static_cast<double>(symbols.size())) / norm;
  return true;
}

RVector lift(const Grid& grid) {
  const Eigen::Index n = grid.size();
  RVector out(2 * n);
  out.head(n) = grid.reshaped().real();
  out.tail(n) = grid.reshaped().imag();
  return out;
}

Grid unlift(const RVector& stacked, Eigen::Index rows, Eigen::Index cols) {
  const Eigen::Index n = rows * cols;
  if (stacked.size() != 2 * n) throw ContractError("stacked vector has the wrong length");
  Grid out(rows, cols);
  for (Eigen::Index i = 0; i < n; ++i) out.data()[i] = {stacked[i], stacked[n + i]};
  return out;
}

RMatrix lift_matrix(const CMatrix& a) {
  const Eigen::Index r = a.rows();
  const Eigen::Index c = a.cols();
  RMatrix out(2 * r, 2 * c);
  out.topLeftCorner(r, c) = a.real();
  out.topRightCorner(r, c) = -a.imag();
  out.bottomLeftCorner(r, c) = a.imag();
  out.bottomRightCorner(r, c) = a.real();
  return out;
}

CMatrix effective_channel_matrix(const ChannelRealization& channel) {
  const int n = channel.antennas();
  const int k = channel.users();
  const int v_count = channel.subcarriers();
  const double norm = 1.0 / std::sqrt(static_cast<double>(v_count));
  CMatrix g(static_cast<Eigen::Index>(n) * v_count, static_cast<Eigen::Index>(k) * v_count);
  for (int m = 0; m < v_count; ++m) {
    for (int v = 0; v < v_count; ++v) {
      const auto phase_index = static_cast<long long>(m) * v % v_count;
      const cdouble w =
          std::polar(norm, 2.0 * std::numbers::pi * static_cast<double>(phase_index) / v_count);
      g.block(static_cast<Eigen::Index>(m) * n, static_cast<Eigen::Index>(v) * k, n, k) =
          w * channel.response(v);
    }
  }
  return g;
}

DenseLikelihood::DenseLikelihood(const LikelihoodModel& model, std::size_t max_dimension) {
  model.validate();
  const auto dim = 2 * static_cast<std::size_t>(model.channel.users()) *
                   static_cast<std::size_t>(model.channel.subcarriers());
  if (dim > max_dimension) {
    throw OracleScopeError("dense likelihood of dimension " + std::to_string(dim) +
                           " exceeds the limit " + std::to_string(max_dimension));
  }
  g_ = lift_matrix(effective_channel_matrix(model.channel));
  signs_ = lift(model.frame.signs);
  tau_ = lift(broadcast_tau(model.frame));
  scale_ = model.margin_scale();
}

RVector DenseLikelihood::margins(const RVector& x) const {
  return scale_ * signs_.cwiseProduct(g_ * x - tau_);
}

double DenseLikelihood::log_likelihood(const RVector& x) const {
  const RVector u = margins(x);
  double total = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) total += log_normal_cdf(u[i]);
  return total;
}

RVector DenseLikelihood::gradient(const RVector& x) const {
  const RVector u = margins(x);
  RVector weighted(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) weighted[i] = signs_[i] * varphi(u[i]);
  return scale_ * (g_.transpose() * weighted);
}

RMatrix DenseLikelihood::hessian(const RVector& x) const {
  const RVector u = margins(x);
  RVector root(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) root[i] = std::sqrt(-psi(u[i]));
  const RMatrix weighted = root.asDiagonal() * g_;
  const Eigen::Index d = g_.cols();
  RMatrix h = RMatrix::Zero(d, d);
  h.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose(), -scale_ * scale_);
  return h.selfadjointView<Eigen::Lower>();
}

RVector DenseLikelihood::newton_step(const RVector& x) const {
  const RMatrix negated = -hessian(x);
  Eigen::LLT<RMatrix> llt(negated);
  if (llt.info() != Eigen::Success || llt.rcond() < kMinRcond) {
    throw TrialFailure("Hessian is not numerically negative definite");
  }
  return -llt.solve(gradient(x));
}

RVector DenseLikelihood::quasi_newton_step(const RVector& x) const {
  const RVector u = margins(x);
  double gamma = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) gamma += psi(u[i]);
  gamma /= static_cast<double>(u.size());
  const RMatrix gram = g_.transpose() * g_;
  Eigen::LLT<RMatrix> llt(gram);
  if (llt.info() != Eigen::Success || llt.rcond() < kMinRcond) {
    throw TrialFailure("effective channel is rank deficient");
  }
  return llt.solve(gradient(x)) / (scale_ * scale_ * gamma);
}

RMatrix hessian_exact(const Grid& symbols, const LikelihoodModel& model) {
  constexpr std::size_t kMaxDimension = 128;  // KV <= 64
  DenseLikelihood dense(model, kMaxDimension);
  return dense.hessian(lift(symbols));
}

}  // namespace onebit
