#pragma once

// Shared generators for the property-style tests: controlled random
// SL(2,R) matrices, traceless algebra elements, and complex unit vectors.

#include <complex>
#include <random>
#include <vector>

#include "spslab/linalg.hpp"

namespace spslab::testing {

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * (double(g() >> 11) * 0x1.0p-53);
}

/// Random SL(2,R) via Iwasawa-style product R_a diag(e^s, e^{-s}) R_b,
/// |s| <= s_max keeps the conditioning mild.
inline Mat2r random_sl2(std::mt19937_64& g, double s_max = 1.0) {
  const double a = uniform(g, 0.0, 6.283185307179586);
  const double b = uniform(g, 0.0, 6.283185307179586);
  const double s = uniform(g, -s_max, s_max);
  const Mat2r d = {std::exp(s), 0.0, 0.0, std::exp(-s)};
  return rotation(a) * d * rotation(b);
}

inline Mat2r random_traceless(std::mt19937_64& g, double scale = 1.0) {
  const double a = uniform(g, -scale, scale);
  return {a, uniform(g, -scale, scale), uniform(g, -scale, scale), -a};
}

inline std::vector<cplx> random_unit_cvec(std::mt19937_64& g, std::size_t n) {
  std::vector<cplx> v(n);
  double norm2 = 0.0;
  for (auto& z : v) {
    z = cplx(uniform(g, -1.0, 1.0), uniform(g, -1.0, 1.0));
    norm2 += std::norm(z);
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& z : v) z *= inv;
  return v;
}

}  // namespace spslab::testing
