#include <doctest.h>

#include <cmath>

#include "spslab/models.hpp"
#include "spslab/perturbation.hpp"

using namespace spslab;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("anderson_family two-point at E = -1") {
  AndersonSpec spec;
  spec.energy = -1.0;
  const auto model = anderson_family(spec);
  CHECK(model.k == doctest::Approx(kPi / 3.0).epsilon(1e-14));
  CHECK(model.m2 == 1.0);
  CHECK(model.m4 == 1.0);
  REQUIRE(model.family.realizations.size() == 2);
  // beta = +- i / sqrt(3) at k = pi/3
  CHECK(std::abs(model.expected.entries[1].beta -
                 cplx(0.0, 1.0 / std::sqrt(3.0))) < 1e-14);
}

TEST_CASE("anderson cross-validation against extraction") {
  AndersonSpec spec;
  spec.energy = -1.0;
  const auto model = anderson_family(spec);
  const auto nf = extract_normal_form(model.family);
  REQUIRE(nf.entries.size() == model.expected.entries.size());
  // conjugation-invariant data agree, and the canonical conjugator lands
  // on the closed-form M itself
  CHECK((nf.M - model.closed_form_M).max_abs() < 1e-10);
  for (std::size_t i = 0; i < nf.entries.size(); ++i) {
    const auto& got = nf.entries[i];
    const auto& want = model.expected.entries[i];
    CHECK(std::abs(got.eta - want.eta) < 1e-9);
    CHECK(std::abs(std::abs(got.beta) - std::abs(want.beta)) < 1e-9);
    CHECK(std::abs((got.P * got.P).trace() - (want.P * want.P).trace()) <
          1e-9);
    CHECK((got.P - want.P).max_abs() < 1e-9);
  }
  CHECK(std::abs(mean_beta(nf)) < 1e-14);  // centered disorder
}

TEST_CASE("anderson uniform disorder discretizations") {
  AndersonSpec spec;
  spec.energy = -1.0;
  spec.disorder = AndersonSpec::Disorder::uniform;
  spec.a = 1.0;
  SUBCASE("gauss-legendre nodes integrate v^2 exactly") {
    const auto model = anderson_family(spec);
    double q2 = 0.0;
    for (const auto& r : model.family.realizations) {
      const Mat2r t1 = *r.T1;
      q2 += r.weight * t1.a * t1.a;
    }
    CHECK(q2 == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  }
  SUBCASE("21 equal-weight midpoints land within 2% of 1/3") {
    spec.discretization = AndersonSpec::Discretization::midpoint;
    const auto model = anderson_family(spec);
    double q2 = 0.0;
    for (const auto& r : model.family.realizations) {
      const Mat2r t1 = *r.T1;
      q2 += r.weight * t1.a * t1.a;
    }
    CHECK(std::abs(q2 - 1.0 / 3.0) < 0.02 / 3.0);
    CHECK(model.m2 == doctest::Approx(1.0 / 3.0));  // true moment kept exact
  }
}

TEST_CASE("anderson spec validation") {
  AndersonSpec spec;
  spec.energy = -2.5;
  CHECK_THROWS_AS(anderson_family(spec), std::invalid_argument);
  spec.energy = -1.0;
  spec.disorder = AndersonSpec::Disorder::values;
  spec.values = {{1.0, 0.5}, {-0.5, 0.5}};  // E v != 0
  CHECK_THROWS_WITH_AS(anderson_family(spec), doctest::Contains("centered"),
                       std::invalid_argument);
}

TEST_CASE("gauss_legendre nodes") {
  std::vector<double> x, w;
  gauss_legendre(5, x, w);
  double wsum = 0.0, q4 = 0.0;
  for (int i = 0; i < 5; ++i) {
    wsum += w[i];
    q4 += w[i] * std::pow(x[i], 4);
  }
  CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(q4 == doctest::Approx(2.0 / 5.0).epsilon(1e-13));  // int x^4 on [-1,1]
}

TEST_CASE("synthetic family derivatives are exact") {
  SyntheticSpec spec;
  const Mat2r p = {0.1, 0.4, -0.2, -0.1};
  const Mat2r q = {0.0, -0.3, -0.3, 0.0};
  spec.entries.push_back({1.0, 0.8, p, q});
  const auto fam = synthetic_family(spec);
  const auto nf = extract_normal_form(fam);
  CHECK((nf.entries[0].P - p).max_abs() < 1e-12);
  CHECK((nf.entries[0].Q - q).max_abs() < 1e-12);

  // the attached evaluator agrees with the stored derivatives
  const double h = 1e-5;
  const Mat2r fd =
      (0.5 / h) * (fam.realizations[0].evaluator(h) -
                   fam.realizations[0].evaluator(-h));
  CHECK((fd - *fam.realizations[0].T1).max_abs() < 1e-9);
}

TEST_CASE("synthetic family validation") {
  SyntheticSpec spec;
  spec.entries.push_back({1.0, 0.8, Mat2r{1, 0, 0, 0}, Mat2r::zero()});
  CHECK_THROWS_WITH_AS(synthetic_family(spec), doctest::Contains("traceless"),
                       std::invalid_argument);
}

TEST_CASE("config parsing applies defaults") {
  const auto cfg = parse_config(R"({
    "model": {"type": "anderson", "energy": -1.0,
              "disorder": {"type": "two_point", "a": 1.0}}
  })");
  CHECK(cfg.run.steps == 1000000);
  CHECK(cfg.run.ensemble == 64);
  CHECK(cfg.run.seed == 0);
  CHECK(std::holds_alternative<AndersonSpec>(cfg.model));
  CHECK(cfg.sweep.lambdas.size() == 6);
}

TEST_CASE("config rejects malformed input with located errors") {
  SUBCASE("bad weight sum names the field") {
    CHECK_THROWS_WITH_AS(parse_config(R"({
      "model": {"type": "anderson", "energy": -1.0,
                "disorder": {"type": "values",
                             "values": [{"v": 1.0, "weight": 0.5},
                                        {"v": -1.0, "weight": 0.4}]}}
    })"),
                         doctest::Contains("/model/disorder/values"),
                         std::runtime_error);
  }
  SUBCASE("non-traceless synthetic P rejected") {
    CHECK_THROWS_WITH_AS(parse_config(R"({
      "model": {"type": "synthetic",
                "realizations": [{"weight": 1.0, "eta": 0.5,
                                  "P": [[1.0, 0.0], [0.0, 0.0]]}]}
    })"),
                         doctest::Contains("traceless"), std::runtime_error);
  }
  SUBCASE("unknown keys rejected with location") {
    CHECK_THROWS_WITH_AS(parse_config(R"({
      "model": {"type": "anderson", "energy": -1.0,
                "disorder": {"type": "two_point", "a": 1.0}},
      "run": {"steps": 1000, "bogus": 3}
    })"),
                         doctest::Contains("/run/bogus"), std::runtime_error);
  }
  SUBCASE("sweep range expansion") {
    const auto cfg = parse_config(R"({
      "model": {"type": "anderson", "energy": -1.0,
                "disorder": {"type": "two_point", "a": 1.0}},
      "sweep": {"min": 0.1, "max": 0.3, "count": 3}
    })");
    REQUIRE(cfg.sweep.lambdas.size() == 3);
    CHECK(cfg.sweep.lambdas[1] == doctest::Approx(0.2));
  }
}
