#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"

using namespace onebit;
using testing_util::flat_channel;

namespace {

QuantizedFrame frame_from(const Grid& signs, const CVector& tau, double variance = 0.0) {
  QuantizedFrame f;
  f.signs = signs;
  f.thresholds.mode = variance > 0.0 ? Quantization::prq : Quantization::ztq;
  f.thresholds.variance = variance;
  f.thresholds.tau = tau;
  return f;
}

RVector fd_gradient(const Grid& x, const LikelihoodModel& model, double h) {
  const RVector base = lift(x);
  RVector out(base.size());
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    RVector p = base;
    RVector m = base;
    p[i] += h;
    m[i] -= h;
    out[i] = (log_likelihood(unlift(p, x.rows(), x.cols()), model) -
              log_likelihood(unlift(m, x.rows(), x.cols()), model)) /
             (2.0 * h);
  }
  return out;
}

}  // namespace

TEST_SUITE("likelihood") {

TEST_CASE("scalar margin and likelihood by hand") {
  // N = K = V = 1, Lambda = 1, x = 1, tau = 0, r = 1 + j, N0 = 2.
  const auto ch = flat_channel(CMatrix::Ones(1, 1), 1);
  const auto frame = frame_from(Grid::Constant(1, 1, {1.0, 1.0}), CVector::Zero(1));
  const LikelihoodModel model{ch, frame, 2.0};
  const Grid x = Grid::Constant(1, 1, {1.0, 0.0});
  const Grid u = compute_u(x, model);
  CHECK(std::abs(u(0, 0) - cdouble(1.0, 0.0)) < 1e-15);
  // Real branch at u = 1 plus imaginary branch at u = 0.
  CHECK(log_likelihood(x, model) == doctest::Approx(-0.17275377902344989 + std::log(0.5)));
}

TEST_CASE("all-zero margins give 2NV log(1/2)") {
  RngStream rng(5, 0);
  const auto ch = draw_channel(exponential_pdp(2, 1.0), 3, 2, 4, rng);
  const auto frame = quantize(testing_util::random_grid(3, 4, rng), testing_util::zero_thresholds(3));
  const LikelihoodModel model{ch, frame, 0.7};
  const Grid zero = Grid::Zero(2, 4);
  CHECK(compute_u(zero, model).isZero(0.0));
  CHECK(log_likelihood(zero, model) == doctest::Approx(2 * 3 * 4 * std::log(0.5)));
  CHECK(curvature_mean(compute_u(zero, model)) == -2.0 / std::numbers::pi);
}

TEST_CASE("noise-free frames give non-negative margins; likelihood tends to zero") {
  RngStream rng(6, 0);
  const Constellation qpsk(4);
  const auto ch = draw_channel(exponential_pdp(3, 0.5), 6, 2, 8, rng);
  const Grid x = testing_util::random_symbols(qpsk, 2, 8, rng);
  ThresholdConfig t;
  t.tau = gen_thresholds(0.4, 6, rng);
  const auto frame = quantize(apply_link(x, ch, 0.0, rng), t);
  const LikelihoodModel model{ch, frame, 1.0};
  const Grid u = compute_u(x, model);
  CHECK(u.real().minCoeff() >= 0.0);
  CHECK(u.imag().minCoeff() >= 0.0);

  // Shrinking N0 pushes every margin to +infinity.
  const LikelihoodModel sharp{ch, frame, 1e-12};
  const double ll = log_likelihood(x, sharp);
  CHECK(ll <= 0.0);
  CHECK(ll > -1e-3);
  CHECK(lift(gradient(x, sharp)).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("likelihood is finite and non-positive for far-off candidates") {
  RngStream rng(7, 0);
  const auto ch = draw_channel(exponential_pdp(2, 1.0), 4, 2, 4, rng);
  const auto frame = quantize(testing_util::random_grid(4, 4, rng), testing_util::zero_thresholds(4));
  const LikelihoodModel model{ch, frame, 1e-4};
  const Grid far = 50.0 * testing_util::random_grid(2, 4, rng);
  const double ll = log_likelihood(far, model);
  CHECK(std::isfinite(ll));
  CHECK(ll < 0.0);
  CHECK(lift(gradient(far, model)).allFinite());
}

TEST_CASE("invalid noise variance and shape mismatches") {
  const auto ch = flat_channel(CMatrix::Ones(2, 1), 2);
  const auto frame = frame_from(Grid::Constant(2, 2, {1.0, 1.0}), CVector::Zero(2));
  CHECK_THROWS_AS(log_likelihood(Grid::Zero(1, 2), LikelihoodModel{ch, frame, 0.0}), ConfigError);
  const auto short_frame = frame_from(Grid::Constant(2, 3, {1.0, 1.0}), CVector::Zero(2));
  CHECK_THROWS_AS(log_likelihood(Grid::Zero(1, 2), LikelihoodModel{ch, short_frame, 1.0}),
                  ContractError);
}

TEST_CASE("gradient matches finite differences and the dense lifted model") {
  for (int trial = 0; trial < 20; ++trial) {
    const int shapes[][3] = {{4, 2, 4}, {8, 2, 4}, {4, 4, 8}};
    const auto& s = shapes[trial % 3];
    const auto inst = make_random_instance(s[0], s[1], s[2], 2, 900 + trial);
    const LikelihoodModel model{inst.channel, inst.frame, inst.noise_variance};
    const RVector g = lift(gradient(inst.probe, model));
    const RVector fd = fd_gradient(inst.probe, model, 1e-5);
    CHECK((fd - g).norm() / g.norm() < 1e-5);
    const DenseLikelihood dense(model, 128);
    CHECK((dense.gradient(lift(inst.probe)) - g).norm() / g.norm() < 1e-9);
    CHECK(dense.log_likelihood(lift(inst.probe)) ==
          doctest::Approx(log_likelihood(inst.probe, model)).epsilon(1e-12));
  }
}

TEST_CASE("Hessian is negative semidefinite and matches gradient differences") {
  for (int trial = 0; trial < 6; ++trial) {
    const auto inst = make_random_instance(4, 2, 4, 2, 950 + trial);
    const LikelihoodModel model{inst.channel, inst.frame, inst.noise_variance};
    const RMatrix h = hessian_exact(inst.probe, model);
    CHECK((h - h.transpose()).norm() < 1e-12 * h.norm());
    CHECK(Eigen::SelfAdjointEigenSolver<RMatrix>(h).eigenvalues().maxCoeff() <= 1e-8);

    const RVector base = lift(inst.probe);
    RMatrix fd(base.size(), base.size());
    for (Eigen::Index i = 0; i < base.size(); ++i) {
      RVector p = base;
      RVector m = base;
      p[i] += 1e-4;
      m[i] -= 1e-4;
      fd.col(i) = (lift(gradient(unlift(p, 2, 4), model)) - lift(gradient(unlift(m, 2, 4), model))) / 2e-4;
    }
    CHECK((fd - h).norm() / h.norm() < 1e-4);
  }
}

TEST_CASE("scalar Hessian by hand") {
  const double g = 1.3;
  const double n0 = 0.8;
  const auto ch = flat_channel(CMatrix::Constant(1, 1, g), 1);
  const auto frame = frame_from(Grid::Constant(1, 1, {1.0, -1.0}), CVector::Constant(1, {0.2, 0.1}));
  const LikelihoodModel model{ch, frame, n0};
  const Grid x = Grid::Constant(1, 1, {0.4, -0.3});
  const Grid u = compute_u(x, model);
  const RMatrix h = hessian_exact(x, model);
  CHECK(std::abs(h(0, 0) - 2.0 / n0 * g * g * psi(u(0, 0).real())) < 1e-10);
  CHECK(std::abs(h(1, 1) - 2.0 / n0 * g * g * psi(u(0, 0).imag())) < 1e-10);
  CHECK(std::abs(h(0, 1)) < 1e-12);
}

TEST_CASE("exact Hessian refuses large instances") {
  const auto inst = make_random_instance(2, 5, 16, 2, 1);
  const LikelihoodModel model{inst.channel, inst.frame, inst.noise_variance};
  CHECK_THROWS_AS(hessian_exact(inst.probe, model), OracleScopeError);
  CHECK_THROWS_AS(DenseLikelihood(model, 64), OracleScopeError);
}

TEST_CASE("per-subcarrier ZF step equals the dense gamma-I step") {
  for (int trial = 0; trial < 8; ++trial) {
    const auto inst = make_random_instance(4, 2, 4, 2, 700 + trial);
    const LikelihoodModel model{inst.channel, inst.frame, inst.noise_variance};
    const Grid u = compute_u(inst.probe, model);
    const double gamma = curvature_mean(u);
    CHECK(gamma < 0.0);
    const RVector fd_step = lift(pqnd_step_zf(u, gamma, model));
    const RVector dense_step = DenseLikelihood(model, 128).quasi_newton_step(lift(inst.probe));
    CHECK((fd_step - dense_step).norm() / dense_step.norm() < 1e-9);
  }
}

TEST_CASE("fused branch terms match the separate evaluations exactly") {
  for (int trial = 0; trial < 4; ++trial) {
    const auto inst = make_random_instance(8, 2, 8, 3, 750 + trial);
    const LikelihoodModel model{inst.channel, inst.frame, inst.noise_variance};
    const Grid u = compute_u(inst.probe, model);
    const BranchTerms terms = branch_terms(u, model.frame);
    CHECK(terms.gamma == curvature_mean(u));
    CHECK(terms.scores == branch_scores(u, model.frame));
    CHECK(pqnd_step_mrc(terms, model) == pqnd_step_mrc(u, terms.gamma, model));
  }
  const Grid zero = Grid::Zero(4, 4);
  CHECK(branch_terms(zero, frame_from(Grid::Constant(4, 4, {1.0, 1.0}), CVector::Zero(4))).gamma ==
        -2.0 / std::numbers::pi);
}

TEST_CASE("MRC-form step equals ZF-form step for one user") {
  for (int trial = 0; trial < 8; ++trial) {
    const auto inst = make_random_instance(6, 1, 8, 3, 800 + trial);
    const LikelihoodModel model{inst.channel, inst.frame, inst.noise_variance};
    const Grid u = compute_u(inst.probe, model);
    const double gamma = curvature_mean(u);
    CHECK((pqnd_step_zf(u, gamma, model) - pqnd_step_mrc(u, gamma, model)).norm() < 1e-12);
  }
}

TEST_CASE("orthogonal columns: MRC-form, ZF-form and Newton steps coincide at u = 0") {
  RngStream rng(44, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const CMatrix h = testing_util::orthogonal_columns(5, 3, rng);
    const auto ch = flat_channel(h, 4);
    const auto frame = quantize(testing_util::random_grid(5, 4, rng), testing_util::zero_thresholds(5));
    const LikelihoodModel model{ch, frame, 0.9};

    // Interior point: the Gram matrix is diagonal so the MRC scaling is the inverse.
    const Grid x = testing_util::random_grid(3, 4, rng, 0.5);
    const Grid u = compute_u(x, model);
    const double gamma = curvature_mean(u);
    CHECK((pqnd_step_zf(u, gamma, model) - pqnd_step_mrc(u, gamma, model)).norm() < 1e-10);

    // At x = 0 with tau = 0 every psi(u) equals gamma, so Newton is exact quasi-Newton.
    const Grid zero = Grid::Zero(3, 4);
    const Grid u0 = compute_u(zero, model);
    const RVector newton = DenseLikelihood(model, 128).newton_step(lift(zero));
    const RVector quasi = lift(pqnd_step_mrc(u0, curvature_mean(u0), model));
    CHECK((newton - quasi).norm() < 1e-9 * std::max(1.0, newton.norm()));
  }
}

TEST_CASE("rank-deficient subcarrier fails the ZF-form step") {
  CMatrix h = CMatrix::Zero(3, 2);
  h.col(0).setOnes();
  h.col(1).setOnes();
  const auto ch = flat_channel(h, 2);
  const auto frame = frame_from(Grid::Constant(3, 2, {1.0, 1.0}), CVector::Zero(3));
  const LikelihoodModel model{ch, frame, 1.0};
  const Grid u = compute_u(Grid::Zero(2, 2), model);
  CHECK_THROWS_AS(pqnd_step_zf(u, -0.5, model), TrialFailure);
  CHECK_NOTHROW(pqnd_step_mrc(u, -0.5, model));
}

TEST_CASE("MRC initialization scale") {
  CHECK(received_variance(2, 1.0, 0.0) == 3.0);
  RngStream rng(2, 0);
  const auto ch = draw_channel(exponential_pdp(2, 1.0), 4, 2, 4, rng);
  const auto frame = quantize(testing_util::random_grid(4, 4, rng), testing_util::zero_thresholds(4));
  const Grid init = mrc_init(frame, ch, received_variance(2, 1.0, 0.0));
  const Grid unit = mrc_equalize(ch, frame.signs, 1.0);
  CHECK((init - std::sqrt(3.0 * std::numbers::pi / 4.0) * unit).norm() < 1e-12);
  CHECK(init.allFinite());
}

TEST_CASE("MRC initialization points toward the transmitted symbols") {
  const Constellation qpsk(4);
  const auto pdp = sds_profile();
  int positive = 0;
  for (int trial = 0; trial < 100; ++trial) {
    RngStream rng(500, trial);
    const auto ch = draw_channel(pdp, 256, 1, 16, rng);
    const Grid x = testing_util::random_symbols(qpsk, 1, 16, rng);
    const double n0 = 1e-3;
    const auto frame = quantize(apply_link(x, ch, n0, rng), testing_util::zero_thresholds(256));
    const Grid init = mrc_init(frame, ch, received_variance(1, n0, 0.0));
    double sum = 0.0;
    int count = 0;
    for (int v = 0; v < 16; ++v) {
      if (x(0, v).real() > 0.0) {
        sum += init(0, v).real();
        ++count;
      }
    }
    positive += count == 0 || sum > 0.0;
  }
  CHECK(positive >= 99);
}

TEST_CASE("box projection") {
  Grid x(1, 2);
  x << cdouble(3.0, 0.1), cdouble(-0.2, -7.0);
  project_box(x, 0.9487);
  CHECK(x(0, 0) == cdouble(0.9487, 0.1));
  CHECK(x(0, 1) == cdouble(-0.2, -0.9487));
  const Grid once = x;
  project_box(x, 0.9487);
  CHECK(x == once);
}

TEST_CASE("norm projection") {
  RngStream rng(3, 0);
  Grid x = testing_util::random_grid(3, 5, rng);
  CHECK(project_norm(x));
  CHECK(std::abs(x.norm() - std::sqrt(15.0)) < 1e-9);
  const Grid again = x;
  CHECK(project_norm(x));
  CHECK((x - again).norm() < 1e-12);

  Grid scalar = Grid::Constant(1, 1, {3.0, 4.0});
  CHECK(project_norm(scalar));
  CHECK(std::abs(scalar(0, 0) - cdouble(0.6, 0.8)) < 1e-15);

  Grid tiny = Grid::Constant(2, 2, {1e-14, 0.0});
  const Grid before = tiny;
  CHECK_FALSE(project_norm(tiny));
  CHECK(tiny == before);
}

TEST_CASE("lifting round trip and matrix lift") {
  RngStream rng(8, 0);
  const Grid g = testing_util::random_grid(3, 4, rng);
  CHECK(unlift(lift(g), 3, 4) == g);
  const CMatrix a = testing_util::random_grid(5, 3, rng);
  const CVector v = testing_util::random_grid(3, 1, rng);
  const CVector av = a * v;
  CHECK((lift_matrix(a) * lift(v) - lift(av)).norm() < 1e-12);
  CHECK_THROWS_AS(unlift(RVector::Zero(5), 1, 2), ContractError);
}

}  // TEST_SUITE
