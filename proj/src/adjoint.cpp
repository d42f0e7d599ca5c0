#include "spslab/adjoint.hpp"

#include <cmath>
#include <stdexcept>

namespace spslab {

namespace {

// Newton polish of a root of x^3 + p x^2 + q x + r.
double polish_cubic(double x, double p, double q, double r) {
  for (int it = 0; it < 3; ++it) {
    const double f = ((x + p) * x + q) * x + r;
    const double df = (3.0 * x + 2.0 * p) * x + q;
    if (df == 0.0) break;
    x -= f / df;
  }
  return x;
}

}  // namespace

Mat3r gamma21() {
  Mat3r g;
  g.m = {1, 0, 0, 0, 1, 0, 0, 0, -1};
  return g;
}

Mat3r adjoint_rep(const Mat2r& t) {
  if (std::abs(t.det() - 1.0) > 1e-9)
    throw std::invalid_argument("adjoint_rep: det != 1");
  const double a = t.a, b = t.b, c = t.c, d = t.d;
  Mat3r r;
  r.m = {a * d + b * c,
         d * b - a * c,
         a * c + b * d,
         d * c - a * b,
         0.5 * (d * d - b * b - c * c + a * a),
         0.5 * (d * d - b * b + c * c - a * a),
         d * c + a * b,
         0.5 * (d * d + b * b - c * c - a * a),
         0.5 * (d * d + b * b + c * c + a * a)};
  return r;
}

Mat3r ad_small(const Mat2r& p) {
  if (!is_traceless(p))
    throw std::invalid_argument("ad_small: input is not traceless");
  const double a = p.a, b = p.b, c = p.c;
  Mat3r r;
  r.m = {0,     b - c, b + c,
         c - b, 0,     -2 * a,
         b + c, -2 * a, 0};
  return r;
}

Mat3r ad_small_squared(const Mat2r& p) {
  if (!is_traceless(p))
    throw std::invalid_argument("ad_small_squared: input is not traceless");
  const double a = p.a, b = p.b, c = p.c;
  Mat3r r;
  r.m = {4 * b * c,
         -2 * a * (b + c),
         2 * a * (c - b),
         -2 * a * (b + c),
         4 * a * a - (c - b) * (c - b),
         c * c - b * b,
         2 * a * (b - c),
         b * b - c * c,
         (b + c) * (b + c) + 4 * a * a};
  return r;
}

Vec3 g_map(const CVec2& w) {
  return {2.0 * (w[0] * std::conj(w[1])).real(),
          std::norm(w[1]) - std::norm(w[0]),
          std::norm(w[0]) + std::norm(w[1])};
}

Mat3r averaged_adjoint(const NormalForm& nf, double lambda) {
  Mat3r avg = Mat3r::zero();
  for (const auto& e : nf.entries)
    avg = avg + e.weight * adjoint_rep(conjugated_step(e, lambda));
  return avg;
}

std::array<cplx, 3> eigenvalues_3x3(const Mat3r& a) {
  // characteristic polynomial x^3 + p x^2 + q x + r
  const double p = -a.trace();
  const double q = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) +
                   (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) +
                   (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1));
  const double r = -a.det();

  // depressed cubic t^3 + alpha t + beta with x = t - p/3
  const double alpha = q - p * p / 3.0;
  const double beta = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;
  const double disc = -4.0 * alpha * alpha * alpha - 27.0 * beta * beta;

  std::array<cplx, 3> out;
  if (disc >= 0.0 && alpha < 0.0) {
    // three real roots, trigonometric form
    const double m = 2.0 * std::sqrt(-alpha / 3.0);
    const double arg = std::clamp(-4.0 * beta / (m * m * m), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    std::array<double, 3> xs;
    for (int k = 0; k < 3; ++k) {
      const double t = m * std::cos(phi - 2.0 * M_PI * k / 3.0);
      xs[k] = polish_cubic(t - p / 3.0, p, q, r);
    }
    std::sort(xs.begin(), xs.end(), std::greater<>());
    for (int k = 0; k < 3; ++k) out[k] = xs[k];
    return out;
  }

  // one real root: stable Cardano
  double t;
  if (alpha == 0.0) {
    t = std::cbrt(-beta);
  } else {
    const double s = std::sqrt(std::max(0.0, beta * beta / 4.0 +
                                                 alpha * alpha * alpha / 27.0));
    const double w = std::cbrt(std::abs(beta) / 2.0 + s);
    t = (beta >= 0.0) ? alpha / (3.0 * w) - w : w - alpha / (3.0 * w);
  }
  const double x3 = polish_cubic(t - p / 3.0, p, q, r);
  // deflate: x^2 + B x + C
  const double bq = p + x3;
  const double cq = q + bq * x3;
  const cplx sq = std::sqrt(cplx(bq * bq - 4.0 * cq, 0.0));
  out[0] = x3;
  out[1] = 0.5 * (-bq + sq);
  out[2] = 0.5 * (-bq - sq);
  return out;
}

namespace {

struct Boundary {
  Vec3 left, right;
};

Boundary landauer_boundary(const NormalForm& nf) {
  const Vec3 e3 = {0.0, 0.0, 1.0};
  const Mat3r adm = adjoint_rep(nf.M);
  const Mat3r adminv = adjoint_rep(nf.M.inverse());
  return {adminv.transpose().apply(e3), adm.apply(e3)};
}

}  // namespace

double landauer_log_resistance_exact(const NormalForm& nf, double lambda,
                                     long n) {
  if (n < 1)
    throw std::invalid_argument("landauer_resistance_exact: N must be >= 1");
  const Mat3r avg = averaged_adjoint(nf, lambda);
  const auto [left, right] = landauer_boundary(nf);

  Vec3 y = right;
  double log_scale = 0.0;
  for (long i = 0; i < n; ++i) {
    y = avg.apply(y);
    const double mag =
        std::max(std::abs(y[0]), std::max(std::abs(y[1]), std::abs(y[2])));
    if (mag > 1e100 || (i % 64 == 63 && mag > 0.0)) {
      y = {y[0] / mag, y[1] / mag, y[2] / mag};
      log_scale += std::log(mag);
    }
  }
  const double val = std::log(2.0 * dot(left, y)) + log_scale;
  if (!(val >= std::log(2.0) - 1e-9))
    throw std::runtime_error(
        "landauer_resistance_exact: rho < 2, averaged adjoint is corrupt");
  return val;
}

double landauer_resistance_exact(const NormalForm& nf, double lambda, long n) {
  return std::exp(landauer_log_resistance_exact(nf, lambda, n));
}

LandauerExact landauer_exponent_exact(const NormalForm& nf, double lambda) {
  const Mat3r avg = averaged_adjoint(nf, lambda);
  // eigenvalues_3x3 puts the real root of largest real part first
  const auto eig = eigenvalues_3x3(avg);
  if (std::abs(eig[0].imag()) >= 1e-10)
    throw std::domain_error("landauer_exponent_exact: no real eigenvalue");
  const double mu3 = eig[0].real();
  if (mu3 < 1.0 - 1e-9)
    throw std::domain_error(
        "landauer_exponent_exact: dominant real eigenvalue below 1");
  for (int k = 1; k < 3; ++k) {
    if (std::abs(eig[k] - cplx(mu3)) <= 1e-6)
      throw std::domain_error(
          "landauer_exponent_exact: eigenvalue separation below 1e-6, "
          "outside the perturbative regime");
  }

  LandauerExact out;
  out.mu3 = mu3;
  out.mu1 = eig[1];
  out.mu2 = eig[2];
  out.gammahat = 0.5 * std::log(mu3);

  // finite-N growth ratio cross-check, horizon set by the spectral gap
  const double gap = mu3 - std::max(std::abs(out.mu1), std::abs(out.mu2));
  if (gap > 1e-7) {
    const long n1 = std::min<long>(2'000'000, long(std::ceil(8.0 / gap)));
    const double l1 = landauer_log_resistance_exact(nf, lambda, n1);
    const double l2 = landauer_log_resistance_exact(nf, lambda, 2 * n1);
    out.finite_n_residual =
        std::abs((l2 - l1) / (2.0 * double(n1)) - out.gammahat);
    out.finite_n_checked = true;
  }
  return out;
}

}  // namespace spslab
