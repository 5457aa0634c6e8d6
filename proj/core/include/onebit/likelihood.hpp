#pragma once

#include <cstddef>

#include "onebit/channel.hpp"
#include "onebit/frontend.hpp"
#include "onebit/types.hpp"

namespace onebit {

// Probit log-likelihood of a one-bit frame,
//   L(x) = sum over all 2NV real branches of log Phi(u),
//   u = sqrt(2/N0) r (.) (G x - tau),
// evaluated through the subcarrier factorization G = Q_N^H Lambda_b.
// Symbol grids are K x V (column v = x[v]); time-domain grids are N x V.
struct LikelihoodModel {
  const ChannelRealization& channel;
  const QuantizedFrame& frame;
  double noise_variance;  // the N0 used inside u; damping scales it

  // Throws ConfigError for N0 <= 0 and ContractError on shape mismatch.
  void validate() const;
  double margin_scale() const;  // sqrt(2 / N0)
};

// u[m] = sqrt(2/N0) r[m] (.)bar (IDFT{Lambda[v] x[v]} - tau). The real and
// imaginary parts hold the margins of the in-phase and quadrature branches.
Grid compute_u(const Grid& symbols, const LikelihoodModel& model);

double log_likelihood(const Grid& symbols, const LikelihoodModel& model);
double log_likelihood_from_u(const Grid& u);

// r (.)bar varphibar(u): the per-branch score driving the gradient.
Grid branch_scores(const Grid& u, const QuantizedFrame& frame);

// Gradient of L in complex form: real part = d/dRe x, imaginary part =
// d/dIm x. lift() of the result is the gradient in the stacked real space.
//   grad[v] = sqrt(2/N0) Lambda[v]^H DFT_v{ r (.)bar varphibar(u) }
Grid gradient(const Grid& symbols, const LikelihoodModel& model);

// gamma = mean of psi over all 2NV real branch margins. Always negative.
double curvature_mean(const Grid& u);

// Scores and gamma from a single probit evaluation per branch; gamma equals
// curvature_mean(u) bit for bit.
struct BranchTerms {
  Grid scores;
  double gamma;
};
BranchTerms branch_terms(const Grid& u, const QuantizedFrame& frame);

// One-stage quasi-Newton step, per subcarrier zero-forcing form:
//   dx[v] = (1/gamma) sqrt(N0/2) Lambda[v]^+ DFT_v{ r (.)bar varphibar(u) }.
// Throws TrialFailure when a subcarrier's Gram matrix is singular.
Grid pqnd_step_zf(const Grid& u, double gamma, const LikelihoodModel& model);

// Two-stage step with the Gram inverse replaced by its diagonal:
//   dx[v] = (1/gamma) sqrt(N0/2) lambda[v] (.) Lambda[v]^H DFT_v{...}.
Grid pqnd_step_mrc(const Grid& u, double gamma, const LikelihoodModel& model);

// The same steps from precomputed branch terms.
Grid pqnd_step_zf(const BranchTerms& terms, const LikelihoodModel& model);
Grid pqnd_step_mrc(const BranchTerms& terms, const LikelihoodModel& model);

// sigma_y^2 = K + N0 + sigma_tau^2.
double received_variance(int users, double noise_variance, double threshold_variance);

// Bussgang-scaled linear front ends applied to a time-domain N x V grid:
//   mrc: scale * lambda[v] (.) Lambda[v]^H DFT_v{obs}
//   zf:  scale * Lambda[v]^+ DFT_v{obs}   (TrialFailure if rank deficient)
Grid mrc_equalize(const ChannelRealization& channel, const Grid& observations, double scale);
Grid zf_equalize(const ChannelRealization& channel, const Grid& observations, double scale);

// Initial point sqrt(pi sigma_y^2 / 4) lambda (.) Lambda^H DFT{r}.
Grid mrc_init(const QuantizedFrame& frame, const ChannelRealization& channel,
              double sigma_y2);

// Per-rail clamp to [-M_b, M_b]. Idempotent.
void project_box(Grid& symbols, double boundary);
// Rescales the whole frame to norm sqrt(KV). Returns false (input untouched)
// when the norm is below 1e-12.
bool project_norm(Grid& symbols);

// Stacked real representation [Re vec(g); Im vec(g)], vec in column order, so
// entry v*K + k is user k on subcarrier v.
RVector lift(const Grid& grid);
Grid unlift(const RVector& stacked, Eigen::Index rows, Eigen::Index cols);
// Real 2a x 2b form [[Re A, -Im A], [Im A, Re A]] of a complex a x b matrix.
RMatrix lift_matrix(const CMatrix& a);

// Complex effective channel G = Q_N^H Lambda_b (NV x KV), assembled block by
// block: block (m, v) = exp(j 2 pi m v / V) / sqrt(V) Lambda[v].
CMatrix effective_channel_matrix(const ChannelRealization& channel);

// The same likelihood on the explicitly lifted 2NV x 2KV real system. Used by
// the exact Newton detector, the exhaustive ML search and the calculus oracles.
class DenseLikelihood {
 public:
  // Throws OracleScopeError when 2KV exceeds max_dimension.
  DenseLikelihood(const LikelihoodModel& model, std::size_t max_dimension);

  Eigen::Index dimension() const noexcept { return g_.cols(); }
  const RMatrix& matrix() const noexcept { return g_; }
  double margin_scale() const noexcept { return scale_; }

  RVector margins(const RVector& x) const;
  double log_likelihood(const RVector& x) const;
  RVector gradient(const RVector& x) const;
  // (2/N0) G^T diag(psi(u)) G. Symmetric negative definite when G has full
  // column rank.
  RMatrix hessian(const RVector& x) const;
  // Exact step (Hessian)^-1 gradient; TrialFailure if the Hessian is not
  // numerically negative definite.
  RVector newton_step(const RVector& x) const;
  // The same step with diag(psi(u)) replaced by gamma I.
  RVector quasi_newton_step(const RVector& x) const;

 private:
  RMatrix g_;
  RVector signs_;
  RVector tau_;
  double scale_;
};

// Exact Hessian at x, dense. Guarded to KV <= 64.
RMatrix hessian_exact(const Grid& symbols, const LikelihoodModel& model);

}  // namespace onebit
