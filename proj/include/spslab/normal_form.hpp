#pragma once

// Verification of the critical-point conditions for a finite family of
// one-parameter SL(2,R) matrices and extraction of its rotation normal
// form: a common conjugator M, per-realization rotation angles, and the
// first/second order generators with their complex coupling constants.

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spslab/linalg.hpp"

namespace spslab {

/// One realization of a matrix family: value and lambda-derivatives at 0,
/// or an evaluator for numeric differentiation when derivatives are not
/// available in closed form.
struct Realization {
  double weight = 0.0;
  Mat2r T0;
  std::optional<Mat2r> T1;  // dT/dlambda at 0
  std::optional<Mat2r> T2;  // d^2 T/dlambda^2 at 0 (absent => zero)
  std::function<Mat2r(double)> evaluator;  // lambda -> T_lambda
};

/// Finite weighted family with a critical point at lambda = 0.
struct CriticalFamily {
  std::vector<Realization> realizations;
};

/// Diagnostics of the critical-point check: commutators, traces, and the
/// rotation-moment table E(e^{2ij eta}) for j = 1..4 with resonance flags.
struct CriticalDiagnostics {
  bool pass = false;
  double max_commutator = 0.0;
  double max_abs_trace = 0.0;
  int bad_pair_first = -1;
  int bad_pair_second = -1;
  int bad_trace_index = -1;
  bool moments_valid = false;
  std::array<cplx, 4> eta_moments{};  // E(e^{2 i j eta}), j = 1..4
  std::array<bool, 4> resonant{};     // |moment - 1| <= tol
  std::string failure;
};

/// Per-realization normal form data. The stored angle is the PSL(2,R)
/// representative in (0, pi); sign = +-1 restores the SL(2,R) element,
/// M T0 M^{-1} = sign * R_eta.
struct NormalFormEntry {
  double weight = 0.0;
  double eta = 0.0;
  int sign = 1;
  Mat2r P;    // first-order generator, traceless
  Mat2r Q;    // second-order generator, traceless
  cplx beta;  // <conj(v)| P |v>, v = (1, -i)/sqrt(2)
};

struct NormalForm {
  Mat2r M;  // common conjugator, det 1, canonicalized
  std::vector<NormalFormEntry> entries;
  double fd_residual = 0.0;  // reconstruction residual of the numeric path
};

/// Throws std::invalid_argument unless weights are positive and sum to 1
/// within 1e-12 and every T0 is in SL(2,R).
void validate_family(const CriticalFamily& family);

/// Checks conditions (i) commuting T0's and (ii) |tr| < 2 - tol, and
/// reports the moment table. Does not throw on a failing family; the
/// result carries the offending pair/realization instead.
CriticalDiagnostics verify_critical(const CriticalFamily& family,
                                    double tol = 1e-9);

/// Conjugator M in SL(2,R) with M T0 M^{-1} an exact rotation, for
/// elliptic T0 (det 1, |tr| < 2). The rotation sense of T0 is preserved;
/// counterclockwise input lands on R_eta with eta in (0, pi). M is
/// canonicalized to the unique lower-triangular representative with
/// positive diagonal. Throws std::domain_error off the elliptic set.
Mat2r elliptic_conjugator(const Mat2r& t0, double tol = 1e-9);

/// Angle and PSL sign of a matrix that is (within tol) +-R_phi:
/// returns (eta in (0, pi), sign) with C = sign * R_eta. Throws
/// std::domain_error when C is not a rotation within tol.
std::pair<double, int> rotation_angle_sign(const Mat2r& c, double tol = 1e-8);

/// Extracts the normal form of a verified family. Derivative data is
/// used when present; otherwise central finite differences on the
/// evaluator (h = 1e-4 / 1e-3, one Richardson step). Tiny traces left by
/// finite-difference roundoff are projected out of P and Q.
NormalForm extract_normal_form(const CriticalFamily& family);

/// Conjugated one-step matrix sign * R_eta * exp(lambda P + lambda^2 Q).
Mat2r conjugated_step(const NormalFormEntry& e, double lambda);

/// The coupling constant <conj(v)|X|v> with v = (1,-i)/sqrt(2).
cplx coupling_beta(const Mat2r& x);

// Weighted moments over the normal form entries.
cplx moment_e2ij(const NormalForm& nf, int j);           // E e^{2 i j eta}
cplx mean_beta(const NormalForm& nf);                    // E beta
double mean_abs2_beta(const NormalForm& nf);             // E |beta|^2
cplx mean_beta_conj_e2i(const NormalForm& nf);           // E conj(beta) e^{2 i eta}

}  // namespace spslab
