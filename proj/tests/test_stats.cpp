#include <doctest.h>

#include <random>

#include "spslab/stats.hpp"

using namespace spslab;

TEST_CASE("normal cdf reference values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-9));
  CHECK(normal_cdf(-3.0) == doctest::Approx(0.0013498980316301).epsilon(1e-6));
}

TEST_CASE("kolmogorov tail") {
  // Q(1.2238...) ~ 0.10, Q(1.6276) ~ 0.01 (classical critical points)
  CHECK(kolmogorov_q(1.2238) == doctest::Approx(0.10).epsilon(0.01));
  CHECK(kolmogorov_q(1.6276) == doctest::Approx(0.01).epsilon(0.02));
  CHECK(kolmogorov_q(0.0) == 1.0);
}

TEST_CASE("chi2 survival function") {
  // chi2 with 1 dof at x = 3.841 -> p = 0.05
  CHECK(chi2_sf(3.841458820694124, 1.0) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(chi2_sf(0.0, 5.0) == doctest::Approx(1.0));
}

TEST_CASE("KS accepts gaussian samples and rejects uniform ones") {
  std::mt19937_64 g(11);
  std::normal_distribution<double> nd(3.0, 2.0);
  std::vector<double> gauss(2000);
  for (auto& x : gauss) x = nd(g);
  CHECK(ks_normality(gauss).p_value > 0.01);

  std::vector<double> flat(2000);
  for (auto& x : flat) x = double(g() >> 11) * 0x1.0p-53;
  CHECK(ks_normality(flat).p_value < 1e-6);
}

TEST_CASE("weighted power fit recovers planted coefficients") {
  std::vector<double> xs, ys, se;
  for (double x : {0.05, 0.1, 0.15, 0.2, 0.25, 0.3}) {
    xs.push_back(x);
    ys.push_back(0.2 * x * x + 1.5 * x * x * x * x);
    se.push_back(1e-6);
  }
  const auto fit = fit_powers(xs, ys, se, {2, 4});
  CHECK(fit.coeffs[0] == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(fit.coeffs[1] == doctest::Approx(1.5).epsilon(1e-5));
  CHECK(fit.chi2 < 1e-6);
}

TEST_CASE("chi2 flatness p-value is sane") {
  std::vector<long long> counts(64, 1000);
  CHECK(chi2_flat_pvalue(counts) == doctest::Approx(1.0));
  counts[0] = 2000;
  CHECK(chi2_flat_pvalue(counts) < 1e-10);
}
