#pragma once

// Closed-form weak-disorder predictors built from a normal form: the
// lambda^2 coefficient D with its phase-correlation term, the positivity
// classification, the quadratic-form certificate, the mu3 expansion of
// the averaged adjoint, leading invariant-measure moments, correlation
// sum predictions, and the Anderson fourth-order coefficients.

#include <array>
#include <complex>
#include <vector>

#include "spslab/normal_form.hpp"

namespace spslab {

enum class VanishingCase { positive, case_i, case_ii };

/// Summary of the second-order theory for one family.
struct PerturbationReport {
  double D = 0.0;
  double gamma2 = 0.0;     // lambda^2 coefficient of the Lyapunov exponent
  double sigma2 = 0.0;     // lambda^2 coefficient of the CLT variance
  double landauer2 = 0.0;  // lambda^2 coefficient of the Landauer exponent
  double mu3_coeff = 0.0;  // lambda^2 coefficient of mu3 - 1 (= 4 D)
  VanishingCase vanishing = VanishingCase::positive;
};

/// D = 1/2 E|beta|^2 + Re[ E(beta) E(conj(beta) e^{2i eta})
///     / (1 - E e^{2i eta}) ]. Throws std::domain_error when
/// E(e^{2ij eta}) is within 1e-9 of 1 for j = 1 or 2.
double coefficient_D(const NormalForm& nf);

/// Classification of D = 0: case_i when e^{2i eta} and beta are constant
/// across the support, case_ii when E e^{2i eta} = 0 and beta is a
/// constant multiple of 1 - e^{2i eta} (least-squares fit, residual
/// tolerance 1e-8). Throws when D <= tol matches neither case.
VanishingCase classify_vanishing(const NormalForm& nf, double tol = 1e-9);

PerturbationReport perturbation_report(const NormalForm& nf);

/// The 2x2 matrix of the positivity certificate in the orthonormal basis
/// {psi1, normalized component of psi2 orthogonal to psi1}, together with
/// its determinant and smallest eigenvalue. Requires unit vectors with
/// |<psi1|psi2>| < 1 - 1e-9.
struct QuadraticFormMatrix {
  std::array<cplx, 4> q{};  // row major (q00 q01; q10 q11)
  double det = 0.0;
  double min_eigenvalue = 0.0;
  cplx overlap;
};
QuadraticFormMatrix quadratic_form_matrix(const std::vector<cplx>& psi1,
                                          const std::vector<cplx>& psi2);

struct ExponentPrediction {
  double gamma = 0.0;
  double sigma = 0.0;
  double landauer = 0.0;
  double D = 0.0;
  bool sigma_valid = true;  // the variance statement requires D > 0
};
ExponentPrediction predict_exponents(const NormalForm& nf, double lambda);

/// mu3 = 1 + 2 lambda^2 [ E|beta|^2 + 2 Re( E(beta) E(conj(beta)
/// e^{2i eta}) / (1 - E e^{2i eta}) ) ] = 1 + 4 D lambda^2.
double mu3_expansion(const NormalForm& nf, double lambda);

/// Leading prediction for the invariant-measure moment E_nu(e^{2ij theta}).
/// For non-centered families (j = 1) this is the linear law
/// lambda E(conj(beta) e^{2i eta}) / (1 - E e^{2i eta}); for families of
/// Anderson type (constant angle, centered beta, Q = 0, nilpotent P) the
/// lambda^2 refinement lambda^2 E|beta|^2 / (1 - e^{-2ij eta}) applies for
/// j = 1, 2. error_order is the power of the first neglected term.
struct PhaseMomentPrediction {
  cplx value = 0.0;
  int error_order = 1;
};
PhaseMomentPrediction predict_phase_moment(const NormalForm& nf, double lambda,
                                           int j = 1);

/// Leading correlation-sum predictions conditioned on the initial angle
/// and the first-step rotation angle: the summed phase correlation
/// J1 = e^{2i(theta0+eta1)} / (1 - E e^{2i eta}) + O(lambda) and the
/// lambda-slope of the summed Lyapunov-increment correlation
/// E_2 sum (gamma_m - gamma) = lambda * gamma_sum_slope + O(lambda^2).
struct CorrelationPrediction {
  cplx j1;
  double gamma_sum_slope = 0.0;
  std::array<bool, 4> resonant_modes{};  // informational, j = 1..4
};
CorrelationPrediction predict_correlation_sum(const NormalForm& nf,
                                              double theta0, double eta1);

/// Anderson-model exponents through fourth order, from the disorder
/// moments m2 = E(v^2), m4 = E(v^4) at energy E = -2 cos k:
///   gamma = 1/2 l^2 E|b|^2 + l^4 (3/4 (E|b|^2)^2 - 1/4 E|b|^4),
///   sigma = 1/2 l^2 E|b|^2 + l^4 (3/8 (E|b|^2)^2 - 1/8 E|b|^4),
/// with E|b|^2 = m2 / (4 sin^2 k), E|b|^4 = m4 / (16 sin^4 k). Rejects
/// e^{2ijk} = 1 for j in {1,2,4}; the j = 3 resonance is benign for the
/// symmetric disorder assumed here (odd moments vanish).
struct AndersonOrders {
  double gamma2 = 0.0, gamma4_coeff = 0.0;
  double sigma2 = 0.0, sigma4_coeff = 0.0;
  double gamma = 0.0, sigma = 0.0;
  double gamma_minus_sigma = 0.0;
};
AndersonOrders anderson_orders(double k, double m2, double m4, double lambda);

}  // namespace spslab
