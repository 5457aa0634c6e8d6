#include "onebit/channel.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "onebit/dft.hpp"

#ifndef ONEBIT_DATA_DIR
#define ONEBIT_DATA_DIR "data"
#endif

namespace onebit {
namespace {

void normalize(std::vector<double>& powers) {
  const double total = std::accumulate(powers.begin(), powers.end(), 0.0);
  for (double& p : powers) p /= total;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

int count_strong_taps(std::span<const double> powers) {
  const double uniform = 1.0 / static_cast<double>(powers.size());
  int count = 0;
  for (double p : powers) count += p > uniform ? 1 : 0;
  return count;
}

PowerDelayProfile exponential_pdp(int length, double decay) {
  if (length < 1) throw ConfigError("exponential PDP needs at least one tap");
  if (!(decay > 0.0)) throw ConfigError("exponential PDP decay must be positive");
  PowerDelayProfile pdp;
  pdp.label = "exp(L=" + std::to_string(length) + ")";
  pdp.decay = decay;
  pdp.powers.resize(length);
  for (int l = 0; l < length; ++l) pdp.powers[l] = std::exp(-decay * l);
  normalize(pdp.powers);
  pdp.strong_taps = count_strong_taps(pdp.powers);
  return pdp;
}

PowerDelayProfile parse_pdp(std::istream& in, const std::string& label) {
  std::map<int, double> taps;
  std::optional<int> declared_strong;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      std::istringstream comment(line.substr(hash + 1));
      std::string key;
      int value = 0;
      if (comment >> key && key == "strong_taps") {
        if (!(comment >> value) || value < 1) {
          throw ParseError("line " + std::to_string(line_no) + ": bad strong_taps directive",
                           line_no);
        }
        declared_strong = value;
      }
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    std::istringstream fields(line);
    long long index = -1;
    double power = 0.0;
    std::string extra;
    if (!(fields >> index >> power) || (fields >> extra)) {
      throw ParseError("line " + std::to_string(line_no) + ": expected '<tap_index> <power>'",
                       line_no);
    }
    if (index < 0 || index > 1 << 20) {
      throw ParseError("line " + std::to_string(line_no) + ": tap index out of range", line_no);
    }
    if (!std::isfinite(power) || power < 0.0) {
      throw ParseError("line " + std::to_string(line_no) + ": negative or non-finite power",
                       line_no);
    }
    if (!taps.emplace(static_cast<int>(index), power).second) {
      throw ParseError("line " + std::to_string(line_no) + ": duplicate tap index", line_no);
    }
  }
  if (taps.empty()) throw ParseError("profile has no taps", line_no);

  PowerDelayProfile pdp;
  pdp.label = label;
  pdp.powers.assign(taps.rbegin()->first + 1, 0.0);
  for (const auto& [index, power] : taps) pdp.powers[index] = power;
  if (std::accumulate(pdp.powers.begin(), pdp.powers.end(), 0.0) <= 0.0) {
    throw ParseError("profile has zero total power", line_no);
  }
  normalize(pdp.powers);
  pdp.strong_taps = declared_strong.value_or(count_strong_taps(pdp.powers));
  if (pdp.strong_taps > pdp.length()) {
    throw ParseError("declared strong_taps exceeds the tap count", line_no);
  }
  return pdp;
}

PowerDelayProfile load_pdp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profile file: " + path.string());
  return parse_pdp(in, path.stem().string());
}

std::filesystem::path data_directory() {
  if (const char* env = std::getenv("ONEBIT_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return ONEBIT_DATA_DIR;
}

PowerDelayProfile sds_profile() {
  PowerDelayProfile pdp = exponential_pdp(8, 1.0);
  pdp.label = "sds";
  // The counting rule gives 2 here; the threshold-SNR fit was made with 3.
  pdp.strong_taps = 3;
  return pdp;
}

PowerDelayProfile lds_profile() {
  PowerDelayProfile pdp = load_pdp(data_directory() / "tdl_a.pdp");
  pdp.label = "lds";
  return pdp;
}

PowerDelayProfile resolve_profile(const std::string& selector) {
  if (selector == "sds") return sds_profile();
  if (selector == "lds") return lds_profile();
  return load_pdp(selector);
}

ChannelRealization::ChannelRealization(std::vector<CMatrix> taps, int subcarriers)
    : subcarriers_(subcarriers), taps_(std::move(taps)) {
  if (taps_.empty()) throw ConfigError("channel needs at least one tap");
  if (subcarriers_ < tap_count()) {
    throw ConfigError("subcarrier count V=" + std::to_string(subcarriers_) +
                      " is shorter than the channel (L=" + std::to_string(tap_count()) + ")");
  }
  antennas_ = static_cast<int>(taps_.front().rows());
  users_ = static_cast<int>(taps_.front().cols());
  if (antennas_ < 1 || users_ < 1) throw ConfigError("channel needs N, K >= 1");
  for (const auto& h : taps_) {
    if (h.rows() != antennas_ || h.cols() != users_) {
      throw ContractError("channel taps must share one N x K shape");
    }
  }

  // Row (n + k N) of the work grid holds the tap sequence of link (n, k),
  // zero padded to V. Its unnormalized DFT is sqrt(V) times the unitary one.
  const int links = antennas_ * users_;
  Grid work = Grid::Zero(links, subcarriers_);
  for (int l = 0; l < tap_count(); ++l) {
    work.col(l) = taps_[l].reshaped();
  }
  unitary_dft_rows(work, Direction::forward);
  work *= std::sqrt(static_cast<double>(subcarriers_));

  response_.resize(subcarriers_);
  mrc_scale_.resize(subcarriers_);
  for (int v = 0; v < subcarriers_; ++v) {
    response_[v] = work.col(v).reshaped(antennas_, users_);
    mrc_scale_[v] = response_[v].colwise().squaredNorm().cwiseInverse().transpose();
  }
}

ChannelRealization draw_channel(const PowerDelayProfile& pdp, int antennas, int users,
                                int subcarriers, RngStream& rng) {
  if (antennas < 1 || users < 1) throw ConfigError("channel needs N, K >= 1");
  if (subcarriers < pdp.length()) {
    throw ConfigError("V=" + std::to_string(subcarriers) + " is shorter than the profile (L=" +
                      std::to_string(pdp.length()) + ")");
  }
  std::vector<CMatrix> taps;
  taps.reserve(pdp.powers.size());
  for (double power : pdp.powers) {
    CMatrix h(antennas, users);
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = rng.complex_normal(power);
    taps.push_back(std::move(h));
  }
  return ChannelRealization(std::move(taps), subcarriers);
}

Grid apply_response(const ChannelRealization& channel, const Grid& symbols) {
  if (symbols.rows() != channel.users() || symbols.cols() != channel.subcarriers()) {
    throw ContractError("symbol grid must be K x V");
  }
  Grid out(channel.antennas(), channel.subcarriers());
  for (int v = 0; v < channel.subcarriers(); ++v) {
    out.col(v).noalias() = channel.response(v) * symbols.col(v);
  }
  return out;
}

Grid apply_response_adjoint(const ChannelRealization& channel, const Grid& observations) {
  if (observations.rows() != channel.antennas() || observations.cols() != channel.subcarriers()) {
    throw ContractError("observation grid must be N x V");
  }
  Grid out(channel.users(), channel.subcarriers());
  for (int v = 0; v < channel.subcarriers(); ++v) {
    out.col(v).noalias() = channel.response(v).adjoint() * observations.col(v);
  }
  return out;
}

Grid propagate(const ChannelRealization& channel, const Grid& symbols) {
  Grid y = apply_response(channel, symbols);
  unitary_dft_rows(y, Direction::inverse);
  return y;
}

Grid apply_link(const Grid& symbols, const ChannelRealization& channel, double noise_variance,
                RngStream& rng) {
  if (noise_variance < 0.0) throw ConfigError("noise variance must be non-negative");
  Grid y = propagate(channel, symbols);
  if (noise_variance > 0.0) {
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] += rng.complex_normal(noise_variance);
  }
  return y;
}

CMatrix block_circulant_matrix(const ChannelRealization& channel) {
  const int n = channel.antennas();
  const int k = channel.users();
  const int v_count = channel.subcarriers();
  CMatrix hb = CMatrix::Zero(static_cast<Eigen::Index>(n) * v_count,
                             static_cast<Eigen::Index>(k) * v_count);
  for (int m = 0; m < v_count; ++m) {
    for (int mp = 0; mp < v_count; ++mp) {
      const int l = ((m - mp) % v_count + v_count) % v_count;
      if (l < channel.tap_count()) {
        hb.block(static_cast<Eigen::Index>(m) * n, static_cast<Eigen::Index>(mp) * k, n, k) =
            channel.taps()[l];
      }
    }
  }
  return hb;
}

CMatrix kron_dft(int subcarriers, int block) {
  const CMatrix f = dft_matrix(subcarriers);
  CMatrix q = CMatrix::Zero(static_cast<Eigen::Index>(subcarriers) * block,
                            static_cast<Eigen::Index>(subcarriers) * block);
  for (int a = 0; a < subcarriers; ++a) {
    for (int b = 0; b < subcarriers; ++b) {
      q.block(static_cast<Eigen::Index>(a) * block, static_cast<Eigen::Index>(b) * block, block,
              block)
          .diagonal()
          .setConstant(f(a, b));
    }
  }
  return q;
}

CMatrix block_diagonal_response(const ChannelRealization& channel) {
  const int n = channel.antennas();
  const int k = channel.users();
  CMatrix lb = CMatrix::Zero(static_cast<Eigen::Index>(n) * channel.subcarriers(),
                             static_cast<Eigen::Index>(k) * channel.subcarriers());
  for (int v = 0; v < channel.subcarriers(); ++v) {
    lb.block(static_cast<Eigen::Index>(v) * n, static_cast<Eigen::Index>(v) * k, n, k) =
        channel.response(v);
  }
  return lb;
}

}  // namespace onebit
