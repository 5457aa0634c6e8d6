#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "onebit/rng.hpp"
#include "onebit/types.hpp"

namespace onebit {

// Average linear power per symbol-spaced tap, normalized to unit sum.
struct PowerDelayProfile {
  std::string label;
  std::vector<double> powers;
  int strong_taps = 1;           // L_s, enters the PRQ threshold-SNR formula
  std::optional<double> decay;   // mu, exponential profiles only

  int length() const noexcept { return static_cast<int>(powers.size()); }
};

// Taps whose power exceeds that of a uniform profile of the same length,
// i.e. p[l] > 1/L.
int count_strong_taps(std::span<const double> powers);

// p[l] = exp(-mu l) / sum_m exp(-mu m), strong taps by count_strong_taps.
PowerDelayProfile exponential_pdp(int length, double decay);

// Text format: one "tap_index linear_power" pair per line, '#' starts a
// comment. A comment of the form "# strong_taps <n>" declares L_s and takes
// precedence over the counting rule. Powers are renormalized to unit sum and
// L is the largest index + 1 (absent taps have zero power).
PowerDelayProfile parse_pdp(std::istream& in, const std::string& label);
PowerDelayProfile load_pdp(const std::filesystem::path& path);

// Small-delay-spread preset: exponential, L = 8, mu = 1, with L_s = 3 as
// used for the threshold-SNR fit.
PowerDelayProfile sds_profile();
// Large-delay-spread preset: the shipped TDL-A table (L = 23).
PowerDelayProfile lds_profile();
// "sds", "lds", or a path to a profile file.
PowerDelayProfile resolve_profile(const std::string& selector);

// Directory holding the shipped profile tables. $ONEBIT_DATA_DIR overrides the
// compiled-in location.
std::filesystem::path data_directory();

// One frequency-selective MIMO channel draw. Immutable after construction.
class ChannelRealization {
 public:
  // taps[l] is the N x K matrix H[l]; all taps must share a shape and
  // subcarriers >= taps.size().
  ChannelRealization(std::vector<CMatrix> taps, int subcarriers);

  int antennas() const noexcept { return antennas_; }
  int users() const noexcept { return users_; }
  int subcarriers() const noexcept { return subcarriers_; }
  int tap_count() const noexcept { return static_cast<int>(taps_.size()); }

  const std::vector<CMatrix>& taps() const noexcept { return taps_; }
  // Lambda[v] = sum_l H[l] exp(-j 2 pi v l / V), N x K.
  const CMatrix& response(int v) const { return response_[v]; }
  const std::vector<CMatrix>& responses() const noexcept { return response_; }
  // lambda_k[v] = 1 / sum_n |Lambda[v]_(n,k)|^2.
  const RVector& mrc_scale(int v) const { return mrc_scale_[v]; }

 private:
  int antennas_;
  int users_;
  int subcarriers_;
  std::vector<CMatrix> taps_;
  std::vector<CMatrix> response_;
  std::vector<RVector> mrc_scale_;
};

// h_{n,k}[l] ~ CN(0, p[l]), independent over n, k, l.
ChannelRealization draw_channel(const PowerDelayProfile& pdp, int antennas, int users,
                                int subcarriers, RngStream& rng);

// Per-subcarrier products: out[:, v] = Lambda[v] x[:, v] (K x V -> N x V).
Grid apply_response(const ChannelRealization& channel, const Grid& symbols);
// Matched filter: out[:, v] = Lambda[v]^H y[:, v] (N x V -> K x V).
Grid apply_response_adjoint(const ChannelRealization& channel, const Grid& observations);

// Noise-free time-domain received block, unitary IDFT over v of Lambda[v] x[v].
Grid propagate(const ChannelRealization& channel, const Grid& symbols);

// propagate() plus i.i.d. CN(0, N0) noise on every antenna and sample. The
// cyclic prefix is implicit in the circular model.
Grid apply_link(const Grid& symbols, const ChannelRealization& channel, double noise_variance,
                RngStream& rng);

// Explicit NV x KV block-circulant time-domain matrix with block (m, m') =
// H[(m - m') mod V]. Oracle use only.
CMatrix block_circulant_matrix(const ChannelRealization& channel);
// Q_i = F kron I_i.
CMatrix kron_dft(int subcarriers, int block);
// Block-diagonal Lambda_b (NV x KV).
CMatrix block_diagonal_response(const ChannelRealization& channel);

}  // namespace onebit
