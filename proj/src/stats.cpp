#include "spslab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace spslab {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double kolmogorov_q(double x) {
  if (x <= 0.0) return 1.0;
  if (x > 8.0) return 0.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Series / continued-fraction evaluation of the regularized incomplete
// gamma functions, standard Lentz scheme.
static double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

static double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad args");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi2_sf(double x, double dof) { return gamma_q(0.5 * dof, 0.5 * x); }

KsResult ks_normality(std::vector<double> sample) {
  KsResult r;
  r.n = sample.size();
  if (r.n < 8) throw std::invalid_argument("ks_normality: sample too small");
  const double mean =
      std::accumulate(sample.begin(), sample.end(), 0.0) / double(r.n);
  double ss = 0.0;
  for (double v : sample) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / double(r.n - 1));
  if (sd <= 0.0) throw std::invalid_argument("ks_normality: zero variance");
  for (double& v : sample) v = (v - mean) / sd;
  std::sort(sample.begin(), sample.end());

  double d = 0.0;
  for (std::size_t i = 0; i < r.n; ++i) {
    const double f = normal_cdf(sample[i]);
    const double lo = double(i) / double(r.n);
    const double hi = double(i + 1) / double(r.n);
    d = std::max(d, std::max(std::abs(f - lo), std::abs(hi - f)));
  }
  r.statistic = d;
  const double rn = std::sqrt(double(r.n));
  r.p_value = kolmogorov_q((rn + 0.12 + 0.11 / rn) * d);
  return r;
}

// Gaussian elimination with partial pivoting, sized for the <=4 unknowns
// used by the exponent fits.
static std::vector<double> solve_dense(std::vector<std::vector<double>> m,
                                       std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    std::swap(m[col], m[piv]);
    std::swap(rhs[col], rhs[piv]);
    if (m[col][col] == 0.0)
      throw std::runtime_error("fit: singular normal equations");
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (std::size_t k = col; k < n; ++k) m[r][k] -= f * m[col][k];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rhs[i] / m[i][i];
  return out;
}

FitResult fit_powers(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& se,
                     const std::vector<int>& powers) {
  if (x.size() != y.size() || x.size() != se.size())
    throw std::invalid_argument("fit_powers: size mismatch");
  const std::size_t k = powers.size();
  std::vector<std::vector<double>> xtx(k, std::vector<double>(k, 0.0));
  std::vector<double> xty(k, 0.0);
  std::size_t used = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(se[i] > 0.0)) continue;
    const double w = 1.0 / (se[i] * se[i]);
    std::vector<double> row(k);
    for (std::size_t j = 0; j < k; ++j) row[j] = std::pow(x[i], powers[j]);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t l = 0; l < k; ++l) xtx[j][l] += w * row[j] * row[l];
      xty[j] += w * row[j] * y[i];
    }
    ++used;
  }
  if (used < k) throw std::invalid_argument("fit_powers: not enough points");

  FitResult r;
  r.n_points = used;
  r.coeffs = solve_dense(xtx, xty);
  r.stderrs.resize(k);
  // covariance = (X^T W X)^{-1}: solve against unit vectors
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> e(k, 0.0);
    e[j] = 1.0;
    const auto col = solve_dense(xtx, e);
    r.stderrs[j] = std::sqrt(std::max(0.0, col[j]));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(se[i] > 0.0)) continue;
    double pred = 0.0;
    for (std::size_t j = 0; j < k; ++j)
      pred += r.coeffs[j] * std::pow(x[i], powers[j]);
    const double z = (y[i] - pred) / se[i];
    r.chi2 += z * z;
  }
  return r;
}

double chi2_flat_pvalue(const std::vector<long long>& counts) {
  if (counts.size() < 2) throw std::invalid_argument("chi2: need >= 2 bins");
  long long total = 0;
  for (long long c : counts) total += c;
  const double expected = double(total) / double(counts.size());
  if (expected < 5.0) throw std::invalid_argument("chi2: bins too empty");
  double stat = 0.0;
  for (long long c : counts) {
    const double d = double(c) - expected;
    stat += d * d / expected;
  }
  return chi2_sf(stat, double(counts.size() - 1));
}

}  // namespace spslab
