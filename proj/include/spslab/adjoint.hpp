#pragma once

// The adjoint representation PSL(2,R) -> SO(2,1) in the orthonormal basis
// {b1, b2, b3} of sl(2,R), the squared-norm identities through the map g,
// and exact Landauer resistance / exponent from powers and the dominant
// eigenvalue of the disorder-averaged adjoint matrix.

#include <array>
#include <complex>

#include "spslab/linalg.hpp"
#include "spslab/normal_form.hpp"

namespace spslab {

/// Signature matrix diag(1, 1, -1) preserved by SO(2,1).
Mat3r gamma21();

/// 3x3 adjoint representative of T in SL(2,R); Ad(-T) = Ad(T).
/// Throws std::invalid_argument unless |det T - 1| <= 1e-9.
Mat3r adjoint_rep(const Mat2r& t);

/// ad_P (the commutator action of a traceless P) and its square, as the
/// explicit 3x3 matrices in the (a, b, c) parametrization of
/// P = ((a, b), (c, -a)).
Mat3r ad_small(const Mat2r& p);
Mat3r ad_small_squared(const Mat2r& p);

/// g(w) = (w1 conj(w2) + conj(w1) w2, |w2|^2 - |w1|^2, |w1|^2 + |w2|^2);
/// satisfies ||T w||^2 = <e3 | Ad_T g(w)> and g(v) = e3.
Vec3 g_map(const CVec2& w);

/// Disorder average E Ad(sign R_eta exp(lambda P + lambda^2 Q)) over the
/// normal form entries.
Mat3r averaged_adjoint(const NormalForm& nf, double lambda);

/// Eigenvalues of a real 3x3 matrix via the closed-form cubic with a
/// Newton polishing step. The first entry is the real root of largest
/// real part; a complex pair, when present, fills the other two slots.
std::array<cplx, 3> eigenvalues_3x3(const Mat3r& a);

/// log of the averaged Landauer resistance of a length-N system,
/// log rho_lambda(N) with rho = 2 <(Ad_{M^{-1}})^T e3 | (E Ad)^N | Ad_M e3>,
/// computed by N scaled matrix-vector products.
double landauer_log_resistance_exact(const NormalForm& nf, double lambda,
                                     long n);

/// rho_lambda(N) itself; always >= 2.
double landauer_resistance_exact(const NormalForm& nf, double lambda, long n);

struct LandauerExact {
  double gammahat = 0.0;  // 0.5 * log(mu3)
  double mu3 = 1.0;
  cplx mu1, mu2;                  // subdominant eigenvalues
  double finite_n_residual = 0.0;  // |ratio estimate - gammahat|
  bool finite_n_checked = false;
};

/// Exact Landauer exponent 0.5 log(mu3) from the dominant real eigenvalue
/// of the averaged adjoint, with an eigenvalue-separation guard and a
/// finite-N growth-ratio cross-check. Throws std::domain_error when the
/// spectral structure is outside the perturbative regime.
LandauerExact landauer_exponent_exact(const NormalForm& nf, double lambda);

}  // namespace spslab
