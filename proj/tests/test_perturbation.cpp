#include <doctest.h>

#include <cmath>

#include "spslab/models.hpp"
#include "spslab/perturbation.hpp"
#include "test_helpers.hpp"

using namespace spslab;

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Traceless P with a prescribed coupling beta: ((Re b, -Im b), (-Im b, -Re b)).
Mat2r p_from_beta(cplx b) {
  return {b.real(), -b.imag(), -b.imag(), -b.real()};
}

NormalForm anderson_nf() {
  AndersonSpec spec;
  spec.energy = -1.0;
  return extract_normal_form(anderson_family(spec).family);
}

/// eta in {pi/4, 3pi/4} equiprobable, beta = 0.3 (1 - e^{2i eta}):
/// vanishing case (ii) of the positivity classification.
NormalForm case_ii_nf() {
  SyntheticSpec spec;
  for (double eta : {kPi / 4.0, 3.0 * kPi / 4.0}) {
    const cplx b = 0.3 * (1.0 - std::polar(1.0, 2.0 * eta));
    spec.entries.push_back({0.5, eta, p_from_beta(b), Mat2r::zero()});
  }
  return extract_normal_form(synthetic_family(spec));
}

/// Two realizations at eta = +-pi/6 with E e^{2i eta} = 0.5,
/// E(conj(beta) e^{2i eta}) = 0.2, E(beta) = 0.1.
NormalForm non_centered_nf() {
  SyntheticSpec spec;
  const double eta = kPi / 6.0;
  spec.entries.push_back(
      {0.5, eta, p_from_beta(0.2 * std::polar(1.0, kPi / 3.0)), Mat2r::zero()});
  spec.entries.push_back(
      {0.5, -eta, p_from_beta(0.2 * std::polar(1.0, -kPi / 3.0)),
       Mat2r::zero()});
  return extract_normal_form(synthetic_family(spec));
}

}  // namespace

TEST_CASE("coefficient_D for the Anderson two-point model is 1/6") {
  const auto nf = anderson_nf();
  CHECK(coefficient_D(nf) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(std::abs(mean_beta(nf)) < 1e-14);  // centered disorder
}

TEST_CASE("D vanishes for deterministic families (case i)") {
  SyntheticSpec spec;
  spec.entries.push_back({1.0, 0.9, p_from_beta(cplx(0.4, 0.1)), Mat2r::zero()});
  const auto nf = extract_normal_form(synthetic_family(spec));
  CHECK(std::abs(coefficient_D(nf)) < 1e-12);
  CHECK(classify_vanishing(nf) == VanishingCase::case_i);
}

TEST_CASE("D vanishes for the affine case (ii) family") {
  const auto nf = case_ii_nf();
  CHECK(std::abs(moment_e2ij(nf, 1)) < 1e-14);
  CHECK(std::abs(coefficient_D(nf)) < 1e-12);
  CHECK(classify_vanishing(nf) == VanishingCase::case_ii);
}

TEST_CASE("classification is positive for the Anderson model") {
  CHECK(classify_vanishing(anderson_nf()) == VanishingCase::positive);
}

TEST_CASE("D respects the phase-correlation term") {
  // E beta = 0.1, E(conj(beta) e^{2i eta}) = 0.2, E e^{2i eta} = 0.5:
  // D = 0.5 E|beta|^2 + Re(0.1 * 0.2 / 0.5) = 0.02 + 0.04
  const auto nf = non_centered_nf();
  CHECK(std::abs(mean_beta(nf) - cplx(0.1)) < 1e-12);
  CHECK(std::abs(mean_beta_conj_e2i(nf) - cplx(0.2)) < 1e-12);
  CHECK(std::abs(moment_e2ij(nf, 1) - cplx(0.5)) < 1e-12);
  CHECK(coefficient_D(nf) == doctest::Approx(0.06).epsilon(1e-12));
  // strictly above the random-phase value 0.5 E|beta|^2
  CHECK(coefficient_D(nf) > 0.5 * mean_abs2_beta(nf) + 0.01);
}

TEST_CASE("resonant families are rejected by the guard") {
  // band center E = 0: k = pi/2, so e^{4ik} = 1 trips the j = 2 gate of D
  AndersonSpec spec;
  spec.energy = 0.0;
  const auto nf = extract_normal_form(anderson_family(spec).family);
  CHECK_THROWS_WITH_AS(coefficient_D(nf), doctest::Contains("resonant"),
                       std::domain_error);
  CHECK_THROWS_AS(predict_phase_moment(nf, 0.1, 2), std::domain_error);
}

TEST_CASE("quadratic form certificate") {
  SUBCASE("orthogonal pair: singular with kernel (1,-1)") {
    const auto q = quadratic_form_matrix({1.0, 0.0}, {0.0, 1.0});
    CHECK(std::abs(q.det) < 1e-14);
    CHECK(std::abs(q.min_eigenvalue) < 1e-12);
    const cplx k0 = q.q[0] * 1.0 + q.q[1] * (-1.0);
    const cplx k1 = q.q[2] * 1.0 + q.q[3] * (-1.0);
    CHECK(std::abs(k0) < 1e-12);
    CHECK(std::abs(k1) < 1e-12);
  }
  SUBCASE("overlap 1/2 gives det 2") {
    const auto q = quadratic_form_matrix(
        {1.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0});
    CHECK(q.det == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("random pairs in dimensions 2..8 are PSD") {
    std::mt19937_64 g(5);
    for (int i = 0; i < 400; ++i) {
      const std::size_t dim = 2 + (g() % 7);
      auto p1 = testing::random_unit_cvec(g, dim);
      auto p2 = testing::random_unit_cvec(g, dim);
      cplx w = 0.0;
      for (std::size_t k = 0; k < dim; ++k) w += std::conj(p1[k]) * p2[k];
      if (std::abs(w) >= 1.0 - 1e-6) continue;
      const auto q = quadratic_form_matrix(p1, p2);
      CHECK(q.min_eigenvalue >= -1e-12);
      CHECK((q.q[0] + q.q[3]).real() > 0.0);
      const double det_formula =
          2.0 * std::norm(w) / std::norm(1.0 - w);
      CHECK(q.det == doctest::Approx(det_formula).epsilon(1e-10));
      // hermitian off-diagonal
      CHECK(std::abs(q.q[1] - std::conj(q.q[2])) < 1e-12);
    }
  }
  SUBCASE("parallel vectors rejected") {
    CHECK_THROWS_AS(quadratic_form_matrix({1.0, 0.0}, {1.0, 0.0}),
                    std::invalid_argument);
  }
}

TEST_CASE("predict_exponents") {
  const auto nf = anderson_nf();
  const auto p0 = predict_exponents(nf, 0.0);
  CHECK(p0.gamma == 0.0);
  CHECK(p0.sigma == 0.0);
  CHECK(p0.landauer == 0.0);

  const auto p = predict_exponents(nf, 0.1);
  CHECK(p.gamma == doctest::Approx(1.0 / 600.0).epsilon(1e-12));
  CHECK(p.sigma == doctest::Approx(1.0 / 600.0).epsilon(1e-12));
  CHECK(p.landauer == doctest::Approx(1.0 / 300.0).epsilon(1e-12));
  CHECK(p.sigma_valid);

  const auto pz = predict_exponents(case_ii_nf(), 0.2);
  CHECK(std::abs(pz.gamma) < 1e-12);
  CHECK_FALSE(pz.sigma_valid);
}

TEST_CASE("mu3 expansion ties to D") {
  const auto nf = anderson_nf();
  CHECK(mu3_expansion(nf, 0.0) == 1.0);
  CHECK(mu3_expansion(nf, 0.1) ==
        doctest::Approx(1.0 + 2.0 * 0.01 / 3.0).epsilon(1e-12));

  // deterministic family: D = 0, so mu3 = 1 + 4 D lambda^2 = 1
  SyntheticSpec det_spec;
  det_spec.entries.push_back(
      {1.0, 0.9, p_from_beta(cplx(0.4, 0.1)), Mat2r::zero()});
  const auto det_nf = extract_normal_form(synthetic_family(det_spec));
  CHECK(mu3_expansion(det_nf, 0.3) == doctest::Approx(1.0).epsilon(1e-12));

  // identity mu3 - 1 = 4 D lambda^2 across random families
  std::mt19937_64 g(17);
  for (int i = 0; i < 200; ++i) {
    NormalForm rnf;
    rnf.M = Mat2r::identity();
    const int n = 2 + int(g() % 3);
    double wsum = 0.0;
    for (int k = 0; k < n; ++k) {
      NormalFormEntry e;
      e.weight = 0.1 + testing::uniform(g, 0.0, 1.0);
      wsum += e.weight;
      e.eta = testing::uniform(g, 0.15, kPi - 0.15);
      e.sign = 1;
      e.P = testing::random_traceless(g);
      e.Q = Mat2r::zero();
      e.beta = coupling_beta(e.P);
      rnf.entries.push_back(e);
    }
    for (auto& e : rnf.entries) e.weight /= wsum;
    if (std::abs(moment_e2ij(rnf, 1) - 1.0) < 0.05) continue;
    if (std::abs(moment_e2ij(rnf, 2) - 1.0) < 0.05) continue;
    const double lambda = testing::uniform(g, 0.0, 0.5);
    const double d = coefficient_D(rnf);
    CHECK(d >= -1e-12);  // positivity
    CHECK(std::abs(mu3_expansion(rnf, lambda) - 1.0 -
                   4.0 * d * lambda * lambda) < 1e-12);
  }
}

TEST_CASE("phase moment predictions") {
  const auto nf = anderson_nf();
  SUBCASE("Anderson lambda^2 refinement, j = 1") {
    const auto p = predict_phase_moment(nf, 0.1, 1);
    CHECK(p.error_order == 3);
    const cplx expected =
        0.01 * (1.0 / 3.0) / (1.0 - std::polar(1.0, -2.0 * kPi / 3.0));
    CHECK(std::abs(p.value - expected) < 1e-12);
    CHECK(std::abs(p.value) == doctest::Approx(1.9245e-3).epsilon(1e-4));
  }
  SUBCASE("lambda = 0 gives zero") {
    CHECK(std::abs(predict_phase_moment(nf, 0.0, 1).value) == 0.0);
  }
  SUBCASE("linear law for non-centered families") {
    const auto p = predict_phase_moment(non_centered_nf(), 0.1, 1);
    CHECK(p.error_order == 2);
    CHECK(std::abs(p.value - cplx(0.04)) < 1e-12);
  }
}

TEST_CASE("correlation sum predictions") {
  SUBCASE("J1 with vanishing combined phase") {
    const auto nf = non_centered_nf();  // E e^{2i eta} = 0.5
    const auto p = predict_correlation_sum(nf, 0.0, 0.0);
    CHECK(std::abs(p.j1 - cplx(2.0)) < 1e-12);
  }
  SUBCASE("gamma-sum slope arithmetic") {
    // E beta = 0.1i, E e^{2i eta} = 0.3, theta0 + eta1 = pi/4 -> -1/7
    SyntheticSpec spec;
    const double eta = 0.5 * std::acos(0.3);
    spec.entries.push_back(
        {0.5, eta, p_from_beta(cplx(0.0, 0.1)), Mat2r::zero()});
    spec.entries.push_back(
        {0.5, -eta, p_from_beta(cplx(0.0, 0.1)), Mat2r::zero()});
    const auto nf = extract_normal_form(synthetic_family(spec));
    const auto p = predict_correlation_sum(nf, kPi / 8.0, kPi / 8.0);
    CHECK(p.gamma_sum_slope == doctest::Approx(-1.0 / 7.0).epsilon(1e-12));
  }
  SUBCASE("centered disorder kills the slope") {
    const auto p = predict_correlation_sum(anderson_nf(), 0.3, kPi / 3.0);
    CHECK(std::abs(p.gamma_sum_slope) < 1e-14);
    CHECK(p.resonant_modes[2]);  // informational j = 3 flag at E = -1
  }
  SUBCASE("D <= 0 rejected") {
    CHECK_THROWS_AS(predict_correlation_sum(case_ii_nf(), 0.0, 0.0),
                    std::domain_error);
  }
}

TEST_CASE("anderson_orders fourth-order coefficients") {
  const double k = kPi / 3.0;
  SUBCASE("two-point disorder at E = -1") {
    const auto o = anderson_orders(k, 1.0, 1.0, 0.1);
    CHECK(o.gamma2 == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(o.gamma4_coeff == doctest::Approx(1.0 / 18.0).epsilon(1e-12));
    CHECK(o.sigma4_coeff == doctest::Approx(1.0 / 36.0).epsilon(1e-12));
    CHECK(o.gamma_minus_sigma ==
          doctest::Approx(1e-4 / 36.0).epsilon(1e-10));
  }
  SUBCASE("lambda = 0") {
    const auto o = anderson_orders(k, 1.0, 1.0, 0.0);
    CHECK(o.gamma == 0.0);
    CHECK(o.sigma == 0.0);
  }
  SUBCASE("uniform disorder moments") {
    // E|b|^2 = (1/3)/(4 sin^2 k) = 1/9, E|b|^4 = (1/5)/(16 sin^4 k) = 1/45,
    // so gamma4 = 3/4/81 - 1/4/45 = 1/270 and sigma4 = 1/540
    const auto o = anderson_orders(k, 1.0 / 3.0, 1.0 / 5.0, 0.1);
    CHECK(o.gamma4_coeff == doctest::Approx(1.0 / 270.0).epsilon(1e-12));
    CHECK(o.sigma4_coeff == doctest::Approx(1.0 / 540.0).epsilon(1e-12));
  }
  SUBCASE("constant |v| makes gamma4 exactly twice sigma4") {
    for (double m2 : {0.3, 1.0, 2.5}) {
      const auto o = anderson_orders(0.9, m2, m2 * m2, 0.2);
      CHECK(o.gamma4_coeff == doctest::Approx(2.0 * o.sigma4_coeff));
      // gamma4 = 1/2 (E|b|^2)^2 = 2 gamma2^2
      CHECK(o.gamma4_coeff ==
            doctest::Approx(2.0 * o.gamma2 * o.gamma2).epsilon(1e-12));
    }
  }
  SUBCASE("no universal sigma = f(gamma): implied quadratic term differs") {
    // f2 = (sigma4 - gamma4) / gamma2^2 depends on the disorder kurtosis
    const auto a = anderson_orders(k, 1.0, 1.0, 0.1);
    const auto b = anderson_orders(k, 1.0 / 3.0, 1.0 / 5.0, 0.1);
    const double f2_a =
        (a.sigma4_coeff - a.gamma4_coeff) / (a.gamma2 * a.gamma2);
    const double f2_b =
        (b.sigma4_coeff - b.gamma4_coeff) / (b.gamma2 * b.gamma2);
    CHECK(f2_a == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(f2_a - f2_b) > 0.1);
  }
  SUBCASE("Kappus-Wegner guard") {
    CHECK_THROWS_AS(anderson_orders(kPi / 2.0, 1.0, 1.0, 0.1),
                    std::domain_error);  // e^{4ik} = 1
    CHECK_THROWS_AS(anderson_orders(kPi / 4.0, 1.0, 1.0, 0.1),
                    std::domain_error);  // e^{8ik} = 1
  }
}

TEST_CASE("perturbation report bundles the lambda^2 theory") {
  const auto rep = perturbation_report(anderson_nf());
  CHECK(rep.D == doctest::Approx(1.0 / 6.0));
  CHECK(rep.gamma2 == rep.D);
  CHECK(rep.sigma2 == rep.D);
  CHECK(rep.landauer2 == doctest::Approx(2.0 * rep.D));
  CHECK(rep.mu3_coeff == doctest::Approx(4.0 * rep.D));
  CHECK(rep.vanishing == VanishingCase::positive);
}
