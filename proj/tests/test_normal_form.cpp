#include <doctest.h>

#include <cmath>

#include "spslab/normal_form.hpp"
#include "test_helpers.hpp"

using namespace spslab;

namespace {

constexpr double kPi = 3.14159265358979323846;

Mat2r anderson_t0(double energy) { return {-energy, -1.0, 1.0, 0.0}; }

CriticalFamily two_point_anderson(double energy) {
  CriticalFamily fam;
  for (double v : {-1.0, 1.0}) {
    Realization r;
    r.weight = 0.5;
    r.T0 = anderson_t0(energy);
    r.T1 = Mat2r{v, 0.0, 0.0, 0.0};
    r.T2 = Mat2r::zero();
    fam.realizations.push_back(r);
  }
  return fam;
}

}  // namespace

TEST_CASE("verify_critical on the Anderson family at E = -1") {
  const auto d = verify_critical(two_point_anderson(-1.0));
  CHECK(d.pass);
  CHECK(d.max_commutator < 1e-15);
  CHECK(d.max_abs_trace == doctest::Approx(1.0));
  // k = pi/3: e^{2ijk} hits 1 exactly at j = 3 and nowhere else in 1..4
  CHECK_FALSE(d.resonant[0]);
  CHECK_FALSE(d.resonant[1]);
  CHECK(d.resonant[2]);
  CHECK_FALSE(d.resonant[3]);
  CHECK(std::abs(d.eta_moments[0] - std::polar(1.0, 2.0 * kPi / 3.0)) < 1e-12);
}

TEST_CASE("verify_critical flags the band-center at E = 0") {
  const auto d = verify_critical(two_point_anderson(0.0));
  CHECK(d.pass);  // commuting and elliptic; the anomaly is only a moment flag
  CHECK(d.resonant[1]);  // e^{4i eta} = 1 at k = pi/2
  CHECK(d.resonant[3]);
}

TEST_CASE("verify_critical fails on trace and commutator violations") {
  CriticalFamily fam;
  Realization a, b;
  a.weight = b.weight = 0.5;
  a.T0 = rotation(0.3);
  b.T0 = Mat2r{2.0, 0.0, 0.0, 0.5};
  fam.realizations = {a, b};
  const auto d = verify_critical(fam);
  CHECK_FALSE(d.pass);
  CHECK(d.bad_trace_index == 1);
  CHECK(d.max_abs_trace == doctest::Approx(2.5));

  // non-commuting pair named
  const Mat2r g = {1.0, 0.7, 0.0, 1.0};
  b.T0 = g * rotation(0.4) * g.inverse();
  fam.realizations = {a, b};
  const auto d2 = verify_critical(fam);
  CHECK_FALSE(d2.pass);
  CHECK(d2.bad_pair_first == 0);
  CHECK(d2.bad_pair_second == 1);
}

TEST_CASE("elliptic_conjugator canonical forms") {
  SUBCASE("a rotation maps to the identity") {
    const Mat2r m = elliptic_conjugator(rotation(0.4));
    CHECK((m - Mat2r::identity()).max_abs() < 1e-12);
  }
  SUBCASE("Anderson conjugator matches the closed form") {
    const double k = kPi / 3.0;  // E = -1
    const Mat2r m = elliptic_conjugator(anderson_t0(-1.0));
    const double rsk = std::sqrt(std::sin(k));
    const Mat2r closed = {rsk, 0.0, -std::cos(k) / rsk, 1.0 / rsk};
    CHECK((m - closed).max_abs() < 1e-12);
    CHECK((m * anderson_t0(-1.0) * m.inverse() - rotation(k)).max_abs() <
          1e-10);
  }
  SUBCASE("trace-zero elliptic lands on a quarter rotation") {
    const Mat2r t0 = {0.0, -2.0, 0.5, 0.0};
    const Mat2r m = elliptic_conjugator(t0);
    CHECK(std::abs(m.det() - 1.0) < 1e-12);
    CHECK((m * t0 * m.inverse() - rotation(kPi / 2.0)).max_abs() < 1e-10);
    // canonical representative: lower triangular, positive diagonal
    CHECK(std::abs(m.b) < 1e-12);
    CHECK(m.a > 0.0);
    CHECK(m.d > 0.0);
  }
  SUBCASE("clockwise elliptic keeps its sense") {
    const Mat2r t0 = {0.0, 2.0, -0.5, 0.0};
    const Mat2r m = elliptic_conjugator(t0);
    CHECK((m * t0 * m.inverse() - rotation(-kPi / 2.0)).max_abs() < 1e-10);
  }
  SUBCASE("non-elliptic input rejected") {
    CHECK_THROWS_AS(elliptic_conjugator(Mat2r{2.0, 0.0, 0.0, 0.5}),
                    std::domain_error);
  }
}

TEST_CASE("rotation_angle_sign PSL representative") {
  const auto [eta_p, sign_p] = rotation_angle_sign(rotation(2.0));
  CHECK(eta_p == doctest::Approx(2.0));
  CHECK(sign_p == 1);
  const auto [eta_m, sign_m] = rotation_angle_sign(rotation(-1.0));
  CHECK(eta_m == doctest::Approx(kPi - 1.0));
  CHECK(sign_m == -1);
  Mat2r scaled = rotation(0.8);
  scaled.a += 0.1;
  CHECK_THROWS_AS(rotation_angle_sign(scaled), std::domain_error);
}

TEST_CASE("extract_normal_form reproduces the Anderson closed form") {
  const auto nf = extract_normal_form(two_point_anderson(-1.0));
  const double k = kPi / 3.0, sk = std::sin(k);
  REQUIRE(nf.entries.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const double v = i == 0 ? -1.0 : 1.0;
    const auto& e = nf.entries[i];
    CHECK(e.eta == doctest::Approx(k).epsilon(1e-12));
    CHECK(e.sign == 1);
    CHECK((e.P - Mat2r{0.0, 0.0, -v / sk, 0.0}).max_abs() < 1e-12);
    CHECK(e.Q.max_abs() < 1e-12);
    CHECK(std::abs(e.beta - cplx(0.0, v / (2.0 * sk))) < 1e-12);
  }
}

TEST_CASE("synthetic round trip: T = R exp(lambda P) returns (eta, P, 0)") {
  const double eta = 0.7;
  const Mat2r p = {0.3, 0.2, -0.1, -0.3};
  CriticalFamily fam;
  Realization r;
  r.weight = 1.0;
  r.T0 = rotation(eta);
  r.T1 = rotation(eta) * p;
  r.T2 = rotation(eta) * (p * p);  // Q = 0
  fam.realizations.push_back(r);

  const auto nf = extract_normal_form(fam);
  CHECK((nf.M - Mat2r::identity()).max_abs() < 1e-12);
  CHECK(nf.entries[0].eta == doctest::Approx(eta));
  CHECK((nf.entries[0].P - p).max_abs() < 1e-12);
  CHECK(nf.entries[0].Q.max_abs() < 1e-12);
}

TEST_CASE("pure second-order family: P = 0, Q = b1, beta = 0") {
  const Mat2r b1 = {1.0, 0.0, 0.0, -1.0};
  CriticalFamily fam;
  Realization r;
  r.weight = 1.0;
  r.T0 = rotation(0.5);
  r.T1 = Mat2r::zero();
  r.T2 = rotation(0.5) * (2.0 * b1);
  fam.realizations.push_back(r);

  const auto nf = extract_normal_form(fam);
  CHECK(nf.entries[0].P.max_abs() < 1e-12);
  CHECK((nf.entries[0].Q - b1).max_abs() < 1e-12);
  CHECK(std::abs(nf.entries[0].beta) < 1e-12);
}

TEST_CASE("finite-difference extraction and third-order residual scaling") {
  const double eta = 0.6;
  const Mat2r p = {0.2, -0.4, 0.3, -0.2};
  const Mat2r q = {0.0, 0.5, 0.5, 0.0};
  const Mat2r c = {1.0, 0.4, 0.4, -1.0};  // genuine O(lambda^3) content
  CriticalFamily fam;
  Realization r;
  r.weight = 1.0;
  r.T0 = rotation(eta);
  r.evaluator = [=](double lam) {
    return rotation(eta) *
           exp_sl2(lam * p + lam * lam * q + lam * lam * lam * c, 1e-6);
  };
  fam.realizations.push_back(r);

  const auto nf = extract_normal_form(fam);
  CHECK((nf.entries[0].P - p).max_abs() < 1e-8);
  CHECK((nf.entries[0].Q - q).max_abs() < 1e-6);
  CHECK(std::abs(nf.entries[0].P.trace()) < 1e-10);
  CHECK(std::abs(nf.entries[0].Q.trace()) < 1e-10);

  auto residual = [&](double lam) {
    const Mat2r exact = r.evaluator(lam);
    return (exact - conjugated_step(nf.entries[0], lam)).max_abs();
  };
  const double r1 = residual(0.04);
  const double r2 = residual(0.02);
  CHECK(r1 / r2 >= 7.0);  // third-order scaling: factor ~8 per halving
}

TEST_CASE("coupling beta identities for random traceless P") {
  std::mt19937_64 g(3);
  for (int i = 0; i < 1000; ++i) {
    const Mat2r p = testing::random_traceless(g);
    const cplx beta = coupling_beta(p);
    // beta is unchanged under transposition
    CHECK(std::abs(beta - coupling_beta(p.transpose())) < 1e-12);
    // |beta|^2 = (1/4) tr(P^T P + P^2)
    const double tr = ((p.transpose() * p + p * p).trace()) / 4.0;
    CHECK(std::norm(beta) == doctest::Approx(tr).epsilon(1e-12));
  }
}

TEST_CASE("one conjugator serves a whole commuting family") {
  const Mat2r g = {1.2, 0.3, 0.4, (1.0 + 0.3 * 0.4) / 1.2};  // det 1
  CriticalFamily fam;
  for (double eta : {0.4, 1.1, -0.8}) {
    Realization r;
    r.weight = 1.0 / 3.0;
    r.T0 = g * rotation(eta) * g.inverse();
    r.T1 = Mat2r::zero();
    fam.realizations.push_back(r);
  }
  const auto nf = extract_normal_form(fam);
  const Mat2r minv = nf.M.inverse();
  for (std::size_t i = 0; i < 3; ++i) {
    const Mat2r c = nf.M * fam.realizations[i].T0 * minv;
    Mat2r rep = rotation(nf.entries[i].eta);
    if (nf.entries[i].sign < 0) rep = -rep;
    CHECK((c - rep).max_abs() < 1e-8);
  }
  // the clockwise member is stored with the PSL sign
  CHECK(nf.entries[2].sign == -1);
}

TEST_CASE("family validation errors") {
  CriticalFamily fam;
  Realization r;
  r.weight = 0.9;
  r.T0 = rotation(0.3);
  fam.realizations.push_back(r);
  CHECK_THROWS_WITH_AS(validate_family(fam),
                       doctest::Contains("weights sum"),
                       std::invalid_argument);
  fam.realizations[0].weight = 1.0;
  fam.realizations[0].T0 = Mat2r{2.0, 0.0, 0.0, 2.0};
  CHECK_THROWS_WITH_AS(validate_family(fam), doctest::Contains("SL(2,R)"),
                       std::invalid_argument);
}
