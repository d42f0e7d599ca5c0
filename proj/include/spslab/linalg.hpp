#pragma once

// Dense 2x2 (real/complex) and 3x3 real matrix kernels with the group
// membership checks and the closed-form exponential/logarithm on traceless
// real 2x2 matrices. Everything here is a plain value type; all functions
// are pure and re-entrant.

#include <array>
#include <cmath>
#include <complex>

namespace spslab {

using cplx = std::complex<double>;
using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;
using CVec2 = std::array<cplx, 2>;

/// Real 2x2 matrix (a b; c d).
struct Mat2r {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  static constexpr Mat2r identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2r zero() { return {0.0, 0.0, 0.0, 0.0}; }

  double trace() const { return a + d; }
  double det() const { return a * d - b * c; }
  Mat2r transpose() const { return {a, c, b, d}; }
  /// Inverse assuming det != 0; no pivoting needed at 2x2.
  Mat2r inverse() const {
    const double inv = 1.0 / det();
    return {d * inv, -b * inv, -c * inv, a * inv};
  }
  double max_abs() const {
    return std::max(std::max(std::abs(a), std::abs(b)),
                    std::max(std::abs(c), std::abs(d)));
  }
  double frob() const { return std::sqrt(a * a + b * b + c * c + d * d); }
  bool is_finite() const {
    return std::isfinite(a) && std::isfinite(b) && std::isfinite(c) &&
           std::isfinite(d);
  }

  Vec2 apply(const Vec2& v) const {
    return {a * v[0] + b * v[1], c * v[0] + d * v[1]};
  }
  CVec2 apply(const CVec2& v) const {
    return {a * v[0] + b * v[1], c * v[0] + d * v[1]};
  }

  friend Mat2r operator*(const Mat2r& x, const Mat2r& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  }
  friend Mat2r operator+(const Mat2r& x, const Mat2r& y) {
    return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
  }
  friend Mat2r operator-(const Mat2r& x, const Mat2r& y) {
    return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
  }
  friend Mat2r operator*(double s, const Mat2r& x) {
    return {s * x.a, s * x.b, s * x.c, s * x.d};
  }
  friend Mat2r operator-(const Mat2r& x) { return {-x.a, -x.b, -x.c, -x.d}; }
};

/// Complex 2x2 matrix (a b; c d); the ambient space of transfer matrices.
struct Mat2c {
  cplx a, b, c, d;

  Mat2c() : a(0), b(0), c(0), d(0) {}
  Mat2c(cplx a_, cplx b_, cplx c_, cplx d_) : a(a_), b(b_), c(c_), d(d_) {}
  Mat2c(const Mat2r& m) : a(m.a), b(m.b), c(m.c), d(m.d) {}

  static Mat2c identity() { return {1.0, 0.0, 0.0, 1.0}; }

  cplx trace() const { return a + d; }
  cplx det() const { return a * d - b * c; }
  /// Conjugate transpose.
  Mat2c adjoint() const {
    return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)};
  }
  double max_abs() const {
    return std::max(std::max(std::abs(a), std::abs(b)),
                    std::max(std::abs(c), std::abs(d)));
  }
  bool is_finite() const {
    auto ok = [](cplx z) {
      return std::isfinite(z.real()) && std::isfinite(z.imag());
    };
    return ok(a) && ok(b) && ok(c) && ok(d);
  }

  CVec2 apply(const CVec2& v) const {
    return {a * v[0] + b * v[1], c * v[0] + d * v[1]};
  }

  friend Mat2c operator*(const Mat2c& x, const Mat2c& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  }
  friend Mat2c operator-(const Mat2c& x, const Mat2c& y) {
    return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
  }
};

/// Real 3x3 matrix, row major.
struct Mat3r {
  std::array<double, 9> m{};

  static Mat3r identity() {
    Mat3r r;
    r.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    return r;
  }
  static Mat3r zero() { return Mat3r{}; }

  double& operator()(int i, int j) { return m[3 * i + j]; }
  double operator()(int i, int j) const { return m[3 * i + j]; }

  double trace() const { return m[0] + m[4] + m[8]; }
  double det() const;
  Mat3r transpose() const;
  double max_abs() const;
  bool is_finite() const;

  Vec3 apply(const Vec3& v) const {
    return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
            m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
            m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
  }

  friend Mat3r operator*(const Mat3r& x, const Mat3r& y);
  friend Mat3r operator+(const Mat3r& x, const Mat3r& y);
  friend Mat3r operator-(const Mat3r& x, const Mat3r& y);
  friend Mat3r operator*(double s, const Mat3r& x);
};

inline double dot(const Vec3& x, const Vec3& y) {
  return x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
}
inline double norm(const Vec2& v) { return std::hypot(v[0], v[1]); }
inline double norm_sq(const CVec2& v) {
  return std::norm(v[0]) + std::norm(v[1]);
}
inline cplx inner(const CVec2& x, const CVec2& y) {
  return std::conj(x[0]) * y[0] + std::conj(x[1]) * y[1];
}

/// Rotation by eta: ((cos, -sin), (sin, cos)).
Mat2r rotation(double eta);

/// Unit vector e_theta = (cos theta, sin theta).
inline Vec2 unit_vector(double theta) {
  return {std::cos(theta), std::sin(theta)};
}

/// The symplectic form J = ((0,-1),(1,0)).
inline Mat2c sympl_j() { return {0.0, -1.0, 1.0, 0.0}; }

/// U(1,1) membership: || T* J T - J ||_max <= tol.
bool check_u11(const Mat2c& t, double tol = 1e-10);

/// SL(2,R) membership: entries real within tol and |det - 1| <= tol.
bool check_sl2r(const Mat2c& t, double tol = 1e-10);
bool check_sl2r(const Mat2r& t, double tol = 1e-10);

/// sl(2,R) membership, |trace| <= tol.
inline bool is_traceless(const Mat2r& t, double tol = 1e-10) {
  return std::abs(t.trace()) <= tol;
}

/// Closed-form exponential on traceless real 2x2 matrices.
///
/// With q = -det(A) one has A^2 = q * 1, so
///   exp(A) = cosh(sqrt(q)) 1 + sinh(sqrt(q))/sqrt(q) A   (q > 0),
/// with the cos/sin analogue for q < 0 and 1 + A at q = 0. The q = 0
/// branch is taken for |q| < 1e-14. Throws std::invalid_argument
/// on non-traceless input.
Mat2r exp_sl2(const Mat2r& a, double trace_tol = 1e-10);

/// Inverse of exp_sl2 near the identity: T elliptic (|tr T| < 2) or
/// unipotent (tr T = 2 within tolerance), det T = 1, rotation angle in
/// (-pi, pi). Throws std::domain_error outside this neighborhood.
Mat2r log_elliptic(const Mat2r& t, double tol = 1e-10);

}  // namespace spslab
