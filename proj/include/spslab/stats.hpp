#pragma once

// Small statistics toolbox: normal/KS/chi-square tails and weighted
// least-squares fits of exponent curves on a lambda grid.

#include <cstddef>
#include <vector>

namespace spslab {

/// Standard normal CDF.
double normal_cdf(double x);

/// Kolmogorov distribution tail Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_q(double x);

/// Regularized upper incomplete gamma Q(a, x); chi2_sf(x, k) = Q(k/2, x/2).
double gamma_q(double a, double x);
double chi2_sf(double x, double dof);

struct KsResult {
  double statistic = 0.0;  // sup |F_n - Phi|
  double p_value = 0.0;
  std::size_t n = 0;
};

/// One-sample Kolmogorov-Smirnov test of the standardized sample against
/// the standard normal law (sample mean/sd estimated, which makes the
/// reported p conservative for rejection purposes).
KsResult ks_normality(std::vector<double> sample);

struct FitResult {
  std::vector<double> coeffs;     // one per power
  std::vector<double> stderrs;    // sqrt of diagonal of (X^T W X)^{-1}
  double chi2 = 0.0;              // weighted residual sum of squares
  std::size_t n_points = 0;
};

/// Weighted least squares of y ~ sum_j c_j x^{powers[j]} with weights
/// 1/se^2. Points with se <= 0 are skipped.
FitResult fit_powers(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& se,
                     const std::vector<int>& powers);

/// Pearson chi-square statistic of observed counts against a flat
/// multinomial; returns the p-value.
double chi2_flat_pvalue(const std::vector<long long>& counts);

}  // namespace spslab
