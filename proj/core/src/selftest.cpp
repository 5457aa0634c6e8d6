#include "onebit/selftest.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "onebit/constellation.hpp"
#include "onebit/dft.hpp"
#include "onebit/likelihood.hpp"
#include "onebit/probit.hpp"

namespace onebit {
namespace {

std::string describe(double value) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << value;
  return s.str();
}

CheckResult check(std::string name, bool passed, std::string detail) {
  return {std::move(name), passed, std::move(detail)};
}

double relative(const RVector& a, const RVector& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

double relative(const RMatrix& a, const RMatrix& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

RVector finite_difference_gradient(const Grid& x, const LikelihoodModel& model, double h) {
  const RVector base = lift(x);
  RVector out(base.size());
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    RVector plus = base;
    RVector minus = base;
    plus[i] += h;
    minus[i] -= h;
    out[i] = (log_likelihood(unlift(plus, x.rows(), x.cols()), model) -
              log_likelihood(unlift(minus, x.rows(), x.cols()), model)) /
             (2.0 * h);
  }
  return out;
}

RMatrix finite_difference_hessian(const Grid& x, const LikelihoodModel& model, double h) {
  const RVector base = lift(x);
  RMatrix out(base.size(), base.size());
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    RVector plus = base;
    RVector minus = base;
    plus[i] += h;
    minus[i] -= h;
    out.col(i) = (lift(gradient(unlift(plus, x.rows(), x.cols()), model)) -
                  lift(gradient(unlift(minus, x.rows(), x.cols()), model))) /
                 (2.0 * h);
  }
  return out;
}

CheckResult check_probit() {
  bool ok = std::abs(varphi(0.0) - std::sqrt(2.0 / std::numbers::pi)) < 1e-15 &&
            std::abs(psi(0.0) + 2.0 / std::numbers::pi) < 1e-15;
  double worst_varphi = 1.0;
  double worst_psi = -1.0;
  for (int i = -400; i <= 400; ++i) {
    const double a = i / 10.0;
    worst_varphi = std::min(worst_varphi, varphi(a));
    worst_psi = std::max(worst_psi, psi(a));
  }
  ok = ok && worst_varphi > 0.0 && worst_psi < 0.0 && std::isfinite(log_normal_cdf(-37.0));
  return check("probit functions", ok,
               "min varphi " + describe(worst_varphi) + ", max psi " + describe(worst_psi));
}

CheckResult check_dft() {
  RngStream rng(7, 1);
  CVector x(32);
  for (auto& e : x) e = rng.complex_normal(1.0);
  const CVector fx = unitary_dft(x, Direction::forward);
  const double explicit_err = (fx - dft_matrix(32) * x).norm();
  const double round_trip = (unitary_dft(fx, Direction::inverse) - x).norm();
  const double parseval = std::abs(fx.norm() - x.norm());
  const double worst = std::max({explicit_err, round_trip, parseval});
  return check("unitary DFT", worst < 1e-10, "max error " + describe(worst));
}

CheckResult check_factorization() {
  double worst = 0.0;
  const int shapes[][4] = {{4, 2, 4, 2}, {2, 2, 8, 3}};
  for (const auto& s : shapes) {
    const auto inst = make_random_instance(s[0], s[1], s[2], s[3], 11);
    const CMatrix hb = block_circulant_matrix(inst.channel);
    const CMatrix factored = kron_dft(s[2], s[0]).adjoint() *
                             block_diagonal_response(inst.channel) * kron_dft(s[2], s[1]);
    worst = std::max(worst, (hb - factored).cwiseAbs().maxCoeff());
  }
  return check("block-circulant factorization", worst < 1e-9, "max error " + describe(worst));
}

CheckResult check_calculus() {
  double worst_grad = 0.0;
  double worst_dense = 0.0;
  double worst_hess = 0.0;
  double max_eig = -1e300;
  const int shapes[][3] = {{4, 2, 4}, {8, 2, 4}, {4, 4, 8}};
  for (int trial = 0; trial < 21; ++trial) {
    const auto& s = shapes[trial % 3];
    const auto inst = make_random_instance(s[0], s[1], s[2], 2, 100 + trial);
    const LikelihoodModel model{inst.channel, inst.frame, inst.noise_variance};
    const RVector g = lift(gradient(inst.probe, model));
    worst_grad = std::max(worst_grad, relative(finite_difference_gradient(inst.probe, model, 1e-5), g));
    const DenseLikelihood dense(model, 128);
    worst_dense = std::max(worst_dense, relative(dense.gradient(lift(inst.probe)), g));
    const RMatrix h = hessian_exact(inst.probe, model);
    worst_hess = std::max(worst_hess, relative(finite_difference_hessian(inst.probe, model, 1e-4), h));
    max_eig = std::max(max_eig, Eigen::SelfAdjointEigenSolver<RMatrix>(h).eigenvalues().maxCoeff());
  }
  const bool ok = worst_grad < 1e-5 && worst_dense < 1e-9 && worst_hess < 1e-4 && max_eig <= 1e-8;
  return check("gradient/Hessian oracles", ok,
               "grad fd " + describe(worst_grad) + ", grad dense " + describe(worst_dense) +
                   ", hess fd " + describe(worst_hess) + ", max eig " + describe(max_eig));
}

CheckResult check_approximation_chain() {
  double worst_zf = 0.0;
  double worst_k1 = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    const auto inst = make_random_instance(4, 2, 4, 2, 300 + trial);
    const LikelihoodModel model{inst.channel, inst.frame, inst.noise_variance};
    const Grid u = compute_u(inst.probe, model);
    const Grid fd_step = pqnd_step_zf(u, curvature_mean(u), model);
    const DenseLikelihood dense(model, 128);
    worst_zf = std::max(worst_zf, (lift(fd_step) - dense.quasi_newton_step(lift(inst.probe))).norm() /
                                      lift(fd_step).norm());

    const auto single = make_random_instance(6, 1, 8, 3, 400 + trial);
    const LikelihoodModel m1{single.channel, single.frame, single.noise_variance};
    const Grid u1 = compute_u(single.probe, m1);
    const double g1 = curvature_mean(u1);
    worst_k1 = std::max(worst_k1, (pqnd_step_zf(u1, g1, m1) - pqnd_step_mrc(u1, g1, m1)).norm());
  }
  const Grid zero_u = Grid::Zero(4, 4);
  const bool gamma_exact = curvature_mean(zero_u) == -2.0 / std::numbers::pi;
  const bool ok = worst_zf < 1e-9 && worst_k1 < 1e-12 && gamma_exact;
  return check("quasi-Newton approximation chain", ok,
               "zf vs dense " + describe(worst_zf) + ", K=1 zf vs mrc " + describe(worst_k1) +
                   (gamma_exact ? ", gamma(0) exact" : ", gamma(0) inexact"));
}

CheckResult check_threshold_design() {
  const double a = threshold_snr_db(10, 128, 3);
  const double b = threshold_snr_db(2, 128, 3);
  const double c = threshold_snr_db(1, 1024, 7);
  const double v = threshold_variance(10.0, 0.001);
  const bool ok = std::abs(a - 14.5) < 1e-12 && std::abs(b - 0.1) < 1e-12 &&
                  std::abs(c + 3.85) < 1e-12 && std::abs(v - 0.099) < 1e-12;
  return check("threshold design arithmetic", ok,
               "rho_t = " + std::to_string(a) + ", " + std::to_string(b) + ", " +
                   std::to_string(c) + " dB; sigma_tau^2 = " + std::to_string(v));
}

CheckResult check_constellations() {
  bool ok = true;
  double worst = 0.0;
  for (int order : {4, 16, 64, 256, 1024}) {
    const Constellation c(order);
    double energy = 0.0;
    for (std::uint32_t label = 0; label < static_cast<std::uint32_t>(order); ++label) {
      const cdouble p = c.map(label);
      energy += std::norm(p);
      ok = ok && std::abs(p.real()) <= c.boundary() + 1e-15 &&
           std::abs(p.imag()) <= c.boundary() + 1e-15 && c.demap(p).label == label;
    }
    worst = std::max(worst, std::abs(energy / order - 1.0));
  }
  return check("constellations", ok && worst < 1e-12, "energy error " + describe(worst));
}

}  // namespace

RandomInstance make_random_instance(int antennas, int users, int subcarriers, int taps,
                                    std::uint64_t seed, double noise_variance,
                                    double threshold_variance) {
  RngStream rng(seed, 0);
  const PowerDelayProfile pdp = exponential_pdp(taps, 0.5);
  ChannelRealization channel = draw_channel(pdp, antennas, users, subcarriers, rng);
  Grid symbols(users, subcarriers);
  Grid probe(users, subcarriers);
  const double edge = std::sqrt(0.5);
  for (Eigen::Index i = 0; i < symbols.size(); ++i) {
    symbols.data()[i] = {rng.normal() < 0 ? -edge : edge, rng.normal() < 0 ? -edge : edge};
    probe.data()[i] = rng.complex_normal(0.5);
  }
  const Grid received = apply_link(symbols, channel, noise_variance, rng);
  ThresholdConfig thresholds;
  thresholds.mode = threshold_variance > 0.0 ? Quantization::prq : Quantization::ztq;
  thresholds.variance = threshold_variance;
  thresholds.tau = gen_thresholds(threshold_variance, antennas, rng);
  QuantizedFrame frame = quantize(received, thresholds);
  return RandomInstance{std::move(channel), std::move(frame), std::move(symbols),
                        std::move(probe), noise_variance};
}

std::vector<CheckResult> run_selftest() {
  return {check_probit(),          check_dft(),
          check_factorization(),   check_calculus(),
          check_approximation_chain(), check_threshold_design(),
          check_constellations()};
}

bool report_selftest(std::ostream& out) {
  bool all = true;
  for (const auto& r : run_selftest()) {
    out << (r.passed ? "PASS  " : "FAIL  ") << r.name << "  (" << r.detail << ")\n";
    all = all && r.passed;
  }
  return all;
}

}  // namespace onebit
