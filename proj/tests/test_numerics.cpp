#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"

using namespace onebit;
using testing_util::random_grid;

TEST_SUITE("numerics") {

// Reference values from a 40-digit evaluation of phi/Phi.
TEST_CASE("probit functions against high-precision references") {
  CHECK(varphi(0.0) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-15));
  CHECK(psi(0.0) == -2.0 / std::numbers::pi);

  CHECK(varphi(-40.0) >= 39.9);
  CHECK(varphi(-40.0) <= 40.1);
  CHECK(varphi(-40.0) == doctest::Approx(40.02496884720726).epsilon(1e-13));
  CHECK(psi(-40.0) == doctest::Approx(-1.0).epsilon(0.01));
  CHECK(psi(-40.0) == doctest::Approx(-0.9993773316214086).epsilon(1e-10));
  CHECK(varphi(40.0) <= 1e-300);
  CHECK(varphi(40.0) > 0.0);

  struct Ref {
    double a, log_cdf, ratio, curvature;
  };
  const Ref refs[] = {
      {1.0, -0.17275377902344989, 0.28759997093917836, -0.37031371422339460},
      {-5.0, -15.064998393988726, 5.1865039671258421, -0.96730356538288777},
      {-10.0, -53.231285150512471, 10.098093233962512, -0.99055462217434374},
      {-20.0, -203.91715537109726, 20.049753068527851, -0.99753673838494784},
      {-30.0, -454.32124395634320, 30.033259667433677, -0.99889622848810991},
      {-31.0, -484.85396362717929, 31.032191276777725, -0.99896585841004661},
      {-37.0, -689.03058557689059, 37.026987686126990, -0.99927272190112249},
      {5.0, -2.8665161296376359e-7, 1.4867199409049057e-6, -7.4336019148607112e-6},
      {10.0, -7.6198530241605261e-24, 7.6945986267064193e-23, -7.6945986267064193e-22},
  };
  for (const auto& r : refs) {
    CAPTURE(r.a);
    CHECK(log_normal_cdf(r.a) == doctest::Approx(r.log_cdf).epsilon(1e-12));
    CHECK(varphi(r.a) == doctest::Approx(r.ratio).epsilon(1e-12));
    CHECK(psi(r.a) == doctest::Approx(r.curvature).epsilon(1e-9));
  }
}

TEST_CASE("psi is strictly negative and varphi strictly positive on a fine grid") {
  for (int i = -300; i <= 300; ++i) {
    const double a = i / 10.0;
    CAPTURE(a);
    CHECK(psi(a) < 0.0);
    CHECK(varphi(a) > 0.0);
  }
  for (int i = -400; i <= 400; ++i) {
    const double a = i / 10.0;
    CHECK(std::isfinite(log_normal_cdf(a)));
    CHECK(log_normal_cdf(a) <= 0.0);
  }
}

TEST_CASE("varphi is decreasing and continuous across the series switch") {
  double previous = varphi(-45.0);
  for (int i = -4499; i <= 380; ++i) {
    const double a = i / 100.0;
    const double v = varphi(a);
    if (v > 1e-300) CHECK(v < previous);
    previous = v;
  }
  const double below = varphi(std::nextafter(-30.0, -31.0));
  const double above = varphi(-30.0);
  CHECK(below == doctest::Approx(above).epsilon(1e-12));
  CHECK(log_normal_cdf(std::nextafter(-30.0, -31.0)) ==
        doctest::Approx(log_normal_cdf(-30.0)).epsilon(1e-12));
}

TEST_CASE("special functions reject non-finite input") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(varphi(nan), NumericError);
  CHECK_THROWS_AS(psi(inf), NumericError);
  CHECK_THROWS_AS(log_normal_cdf(-inf), NumericError);
}

TEST_CASE("DFT of length one is the identity") {
  CVector x(1);
  x[0] = {0.3, -1.7};
  CHECK(unitary_dft(x, Direction::forward)[0] == x[0]);
  CHECK(unitary_dft(x, Direction::inverse)[0] == x[0]);
}

TEST_CASE("DFT is unitary and matches the explicit matrix") {
  RngStream rng(5, 0);
  for (int size : {2, 7, 32, 48, 256}) {
    CAPTURE(size);
    CVector x(size);
    for (auto& e : x) e = rng.complex_normal(1.0);
    const CVector fx = unitary_dft(x, Direction::forward);
    CHECK((unitary_dft(fx, Direction::inverse) - x).norm() < 1e-10);
    CHECK(std::abs(fx.norm() - x.norm()) < 1e-10);
    CHECK((fx - dft_matrix(size) * x).norm() < 1e-10);
    CHECK((unitary_dft(x, Direction::inverse) - dft_matrix(size).adjoint() * x).norm() < 1e-10);
  }
}

TEST_CASE("row-wise DFT of an antenna grid applies F kron I_N") {
  RngStream rng(6, 0);
  const int n = 2;
  const int v = 4;
  const Grid y = random_grid(n, v, rng);
  const Grid fy = unitary_dft_rows(y, Direction::forward);
  // Column-major vec of an N x V grid stacks the per-sample N-vectors.
  const CVector stacked = y.reshaped();
  const CVector expected = kron_dft(v, n) * stacked;
  CHECK((fy.reshaped() - expected).norm() < 1e-10);

  Grid in_place = y;
  unitary_dft_rows(in_place, Direction::forward);
  unitary_dft_rows(in_place, Direction::inverse);
  CHECK((in_place - y).norm() < 1e-12);
}

TEST_CASE("constellation geometry") {
  const Constellation qpsk(4);
  CHECK(qpsk.boundary() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  for (const auto& p : qpsk.points()) {
    CHECK(std::abs(std::abs(p.real()) - 0.7071067811865476) < 1e-12);
    CHECK(std::abs(std::abs(p.imag()) - 0.7071067811865476) < 1e-12);
  }
  CHECK(Constellation(16).boundary() == doctest::Approx(std::sqrt(27.0 / 30.0)).epsilon(1e-15));

  for (int order : {4, 16, 64, 256, 1024}) {
    const Constellation c(order);
    double energy = 0.0;
    for (const auto& p : c.points()) energy += std::norm(p);
    CHECK(std::abs(energy / order - 1.0) < 1e-12);
    CHECK(c.bits_per_symbol() == static_cast<int>(std::log2(order)));
  }
  for (int bad : {0, 2, 8, 32, 12, 128, -4}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(Constellation{bad}, ConfigError);
  }
}

TEST_CASE("Gray labelling: neighbours differ in one bit") {
  for (int order : {4, 16, 64, 256}) {
    const Constellation c(order);
    const double spacing = 2.0 * c.boundary() / (c.levels_per_dim() - 1);
    for (std::uint32_t a = 0; a < static_cast<std::uint32_t>(order); ++a) {
      for (std::uint32_t b = a + 1; b < static_cast<std::uint32_t>(order); ++b) {
        if (std::abs(std::abs(c.map(a) - c.map(b)) - spacing) < 1e-9) {
          CHECK(std::popcount(a ^ b) == 1);
        }
      }
    }
  }
}

TEST_CASE("demapper picks the nearest point") {
  const Constellation qpsk(4);
  const auto r = qpsk.demap({0.9, 0.9});
  CHECK(std::abs(r.symbol - cdouble(0.7071067811865476, 0.7071067811865476)) < 1e-12);

  RngStream rng(9, 0);
  for (int order : {4, 16, 64}) {
    const Constellation c(order);
    for (std::uint32_t label = 0; label < static_cast<std::uint32_t>(order); ++label) {
      CHECK(c.demap(c.map(label)).label == label);
    }
    for (int trial = 0; trial < 500; ++trial) {
      const cdouble y = rng.complex_normal(2.0);
      std::uint32_t best = 0;
      for (std::uint32_t label = 1; label < static_cast<std::uint32_t>(order); ++label) {
        if (std::abs(y - c.map(label)) < std::abs(y - c.map(best))) best = label;
      }
      CHECK(c.demap(y).label == best);
    }
  }
}

TEST_CASE("random streams are reproducible and distinct") {
  RngStream a(42, 3);
  RngStream b(42, 3);
  RngStream c(42, 4);
  RngStream d(43, 3);
  int same_c = 0;
  int same_d = 0;
  for (int i = 0; i < 64; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    same_c += x == c.normal();
    same_d += x == d.normal();
  }
  CHECK(same_c == 0);
  CHECK(same_d == 0);

  RngStream u(1, 1);
  for (int i = 0; i < 1000; ++i) CHECK(u.uniform_below(7) < 7u);
}

TEST_CASE("complex normal draws have the requested variance per rail") {
  RngStream rng(77, 0);
  const int count = 200000;
  double re2 = 0.0;
  double im2 = 0.0;
  for (int i = 0; i < count; ++i) {
    const cdouble z = rng.complex_normal(2.0);
    re2 += z.real() * z.real();
    im2 += z.imag() * z.imag();
  }
  CHECK(re2 / count == doctest::Approx(1.0).epsilon(0.02));
  CHECK(im2 / count == doctest::Approx(1.0).epsilon(0.02));
}

}  // TEST_SUITE
