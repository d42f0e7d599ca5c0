#include "spslab/linalg.hpp"

#include <stdexcept>

namespace spslab {

double Mat3r::det() const {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) -
         m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Mat3r Mat3r::transpose() const {
  Mat3r r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.m[3 * i + j] = m[3 * j + i];
  return r;
}

double Mat3r::max_abs() const {
  double v = 0.0;
  for (double x : m) v = std::max(v, std::abs(x));
  return v;
}

bool Mat3r::is_finite() const {
  for (double x : m)
    if (!std::isfinite(x)) return false;
  return true;
}

Mat3r operator*(const Mat3r& x, const Mat3r& y) {
  Mat3r r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += x.m[3 * i + k] * y.m[3 * k + j];
      r.m[3 * i + j] = s;
    }
  return r;
}

Mat3r operator+(const Mat3r& x, const Mat3r& y) {
  Mat3r r;
  for (int i = 0; i < 9; ++i) r.m[i] = x.m[i] + y.m[i];
  return r;
}

Mat3r operator-(const Mat3r& x, const Mat3r& y) {
  Mat3r r;
  for (int i = 0; i < 9; ++i) r.m[i] = x.m[i] - y.m[i];
  return r;
}

Mat3r operator*(double s, const Mat3r& x) {
  Mat3r r;
  for (int i = 0; i < 9; ++i) r.m[i] = s * x.m[i];
  return r;
}

Mat2r rotation(double eta) {
  const double c = std::cos(eta), s = std::sin(eta);
  return {c, -s, s, c};
}

bool check_u11(const Mat2c& t, double tol) {
  if (!t.is_finite()) return false;
  const Mat2c j = sympl_j();
  const Mat2c res = t.adjoint() * j * t - j;
  return res.max_abs() <= tol;
}

bool check_sl2r(const Mat2c& t, double tol) {
  if (!t.is_finite()) return false;
  const double im = std::max(std::max(std::abs(t.a.imag()), std::abs(t.b.imag())),
                             std::max(std::abs(t.c.imag()), std::abs(t.d.imag())));
  if (im > tol) return false;
  return std::abs(t.det() - 1.0) <= tol;
}

bool check_sl2r(const Mat2r& t, double tol) {
  return t.is_finite() && std::abs(t.det() - 1.0) <= tol;
}

Mat2r exp_sl2(const Mat2r& a, double trace_tol) {
  if (!a.is_finite()) throw std::invalid_argument("exp_sl2: non-finite input");
  if (!is_traceless(a, trace_tol))
    throw std::invalid_argument("exp_sl2: input is not traceless");

  const double q = -a.det();  // A^2 = q * 1
  double ch, sc;              // exp(A) = ch * 1 + sc * A
  if (std::abs(q) < 1e-14) {
    ch = 1.0;
    sc = 1.0;
  } else if (q > 0.0) {
    const double r = std::sqrt(q);
    ch = std::cosh(r);
    sc = std::sinh(r) / r;
  } else {
    const double r = std::sqrt(-q);
    ch = std::cos(r);
    sc = std::sin(r) / r;
  }
  return {ch + sc * a.a, sc * a.b, sc * a.c, ch + sc * a.d};
}

Mat2r log_elliptic(const Mat2r& t, double tol) {
  if (!t.is_finite()) throw std::domain_error("log_elliptic: non-finite input");
  if (std::abs(t.det() - 1.0) > 1e-9)
    throw std::domain_error("log_elliptic: det != 1");

  const double half_tr = 0.5 * t.trace();
  if (half_tr <= -1.0 + tol)
    throw std::domain_error(
        "log_elliptic: trace at or below -2, rotation angle outside (-pi,pi)");
  if (half_tr > 1.0 + tol)
    throw std::domain_error("log_elliptic: trace above 2, not elliptic");

  // Unipotent branch: (T - 1)^2 = 0 exactly when tr T = 2, det T = 1.
  if (half_tr >= 1.0 - 1e-14) {
    Mat2r a = t - Mat2r::identity();
    const double half_tr_a = 0.5 * a.trace();
    a.a -= half_tr_a;
    a.d -= half_tr_a;
    return a;
  }

  const double phi = std::acos(half_tr);  // in (0, pi)
  const double scale = phi / std::sin(phi);
  Mat2r a = scale * (t - Mat2r{half_tr, 0.0, 0.0, half_tr});
  // exact tracelessness despite rounding
  const double half_tr_a = 0.5 * a.trace();
  a.a -= half_tr_a;
  a.d -= half_tr_a;
  return a;
}

}  // namespace spslab
