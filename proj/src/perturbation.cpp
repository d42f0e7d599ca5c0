#include "spslab/perturbation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spslab {

namespace {

constexpr double kResonanceTol = 1e-9;

void require_nonresonant(const NormalForm& nf, std::initializer_list<int> js) {
  for (int j : js) {
    const cplx m = moment_e2ij(nf, j);
    if (std::abs(m - 1.0) <= kResonanceTol)
      throw std::domain_error("resonant rotation moment E(e^{2i*" +
                              std::to_string(j) + "*eta}) = 1");
  }
}

double phase_correlation_term(const NormalForm& nf) {
  const cplx num = mean_beta(nf) * mean_beta_conj_e2i(nf);
  return (num / (1.0 - moment_e2ij(nf, 1))).real();
}

bool constant_eta(const NormalForm& nf, double tol = 1e-12) {
  for (const auto& e : nf.entries)
    if (std::abs(e.eta - nf.entries.front().eta) > tol) return false;
  return true;
}

// Constant angle, centered coupling, vanishing Q and nilpotent P: the
// structure under which the lambda^2 moment refinement is derived.
bool anderson_like(const NormalForm& nf) {
  if (!constant_eta(nf)) return false;
  if (std::abs(mean_beta(nf)) > 1e-12) return false;
  for (const auto& e : nf.entries) {
    if (e.Q.max_abs() > 1e-12) return false;
    if (std::abs(e.P.det()) > 1e-12) return false;
  }
  return true;
}

}  // namespace

double coefficient_D(const NormalForm& nf) {
  require_nonresonant(nf, {1, 2});
  return 0.5 * mean_abs2_beta(nf) + phase_correlation_term(nf);
}

VanishingCase classify_vanishing(const NormalForm& nf, double tol) {
  const double d = coefficient_D(nf);
  if (d > tol) return VanishingCase::positive;

  // case (i): e^{2i eta} and beta almost surely constant.
  bool const_both = true;
  const cplx z0 = std::polar(1.0, 2.0 * nf.entries.front().eta);
  const cplx b0 = nf.entries.front().beta;
  for (const auto& e : nf.entries) {
    if (std::abs(std::polar(1.0, 2.0 * e.eta) - z0) > tol ||
        std::abs(e.beta - b0) > tol) {
      const_both = false;
      break;
    }
  }
  if (const_both) return VanishingCase::case_i;

  // case (ii): E e^{2i eta} = 0 and beta = c (1 - e^{2i eta}).
  if (std::abs(moment_e2ij(nf, 1)) <= tol) {
    cplx num = 0.0;
    double den = 0.0;
    for (const auto& e : nf.entries) {
      const cplx g = 1.0 - std::polar(1.0, 2.0 * e.eta);
      num += e.weight * e.beta * std::conj(g);
      den += e.weight * std::norm(g);
    }
    const cplx c = den > 0.0 ? num / den : cplx(0.0);
    double res2 = 0.0;
    for (const auto& e : nf.entries) {
      const cplx g = 1.0 - std::polar(1.0, 2.0 * e.eta);
      res2 += e.weight * std::norm(e.beta - c * g);
    }
    if (std::sqrt(res2) <= 1e-8) return VanishingCase::case_ii;
  }

  throw std::runtime_error(
      "classify_vanishing: D vanishes but neither constancy nor the affine "
      "relation holds; numerical tolerance failure");
}

PerturbationReport perturbation_report(const NormalForm& nf) {
  PerturbationReport r;
  r.D = coefficient_D(nf);
  r.gamma2 = r.D;
  r.sigma2 = r.D;
  r.landauer2 = 2.0 * r.D;
  r.mu3_coeff = 4.0 * r.D;
  r.vanishing = classify_vanishing(nf);
  return r;
}

QuadraticFormMatrix quadratic_form_matrix(const std::vector<cplx>& psi1,
                                          const std::vector<cplx>& psi2) {
  if (psi1.size() != psi2.size() || psi1.empty())
    throw std::invalid_argument("quadratic_form_matrix: size mismatch");
  auto nrm = [](const std::vector<cplx>& v) {
    double s = 0.0;
    for (cplx z : v) s += std::norm(z);
    return std::sqrt(s);
  };
  if (std::abs(nrm(psi1) - 1.0) > 1e-10 || std::abs(nrm(psi2) - 1.0) > 1e-10)
    throw std::invalid_argument("quadratic_form_matrix: vectors must be unit");
  cplx w = 0.0;
  for (std::size_t i = 0; i < psi1.size(); ++i)
    w += std::conj(psi1[i]) * psi2[i];
  if (std::abs(w) >= 1.0 - 1e-9)
    throw std::invalid_argument(
        "quadratic_form_matrix: vectors are (nearly) parallel");

  QuadraticFormMatrix out;
  out.overlap = w;
  const double aw2 = std::norm(w);
  const double root = std::sqrt(1.0 - aw2);
  const cplx den1 = 1.0 - w;             // 1 - <psi1|psi2>
  const cplx den2 = 1.0 - std::conj(w);  // 1 - <psi2|psi1>
  out.q[0] = (1.0 + aw2) / (den1 * den2);
  out.q[1] = root / den2;
  out.q[2] = root / den1;
  out.q[3] = 1.0;
  out.det = (out.q[0] * out.q[3] - out.q[1] * out.q[2]).real();
  const double tr = (out.q[0] + out.q[3]).real();
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * out.det));
  out.min_eigenvalue = 0.5 * (tr - disc);
  return out;
}

ExponentPrediction predict_exponents(const NormalForm& nf, double lambda) {
  ExponentPrediction p;
  p.D = coefficient_D(nf);
  p.gamma = p.D * lambda * lambda;
  p.sigma = p.gamma;
  p.landauer = 2.0 * p.gamma;
  p.sigma_valid = p.D > 1e-12;
  return p;
}

double mu3_expansion(const NormalForm& nf, double lambda) {
  require_nonresonant(nf, {1});
  const double bracket =
      mean_abs2_beta(nf) + 2.0 * phase_correlation_term(nf);
  return 1.0 + 2.0 * lambda * lambda * bracket;
}

PhaseMomentPrediction predict_phase_moment(const NormalForm& nf, double lambda,
                                           int j) {
  if (j < 1 || j > 4)
    throw std::invalid_argument("predict_phase_moment: j must be in 1..4");
  PhaseMomentPrediction p;
  const bool centered = std::abs(mean_beta(nf)) <= 1e-12;

  if (j == 1 && !centered) {
    require_nonresonant(nf, {1});
    p.value = lambda * mean_beta_conj_e2i(nf) / (1.0 - moment_e2ij(nf, 1));
    p.error_order = 2;
    return p;
  }
  if ((j == 1 || j == 2) && anderson_like(nf)) {
    require_nonresonant(nf, {j});
    const double eta = nf.entries.front().eta;
    p.value = lambda * lambda * mean_abs2_beta(nf) /
              (1.0 - std::polar(1.0, -2.0 * j * eta));
    p.error_order = 3;
    return p;
  }
  p.value = 0.0;
  p.error_order = (j == 1 || (j == 2 && centered)) ? 2 : 1;
  return p;
}

CorrelationPrediction predict_correlation_sum(const NormalForm& nf,
                                              double theta0, double eta1) {
  CorrelationPrediction p;
  for (int j = 1; j <= 4; ++j)
    p.resonant_modes[j - 1] = std::abs(moment_e2ij(nf, j) - 1.0) <= kResonanceTol;
  if (p.resonant_modes[0])
    throw std::domain_error(
        "predict_correlation_sum: resonant moment E(e^{2i eta}) = 1");
  if (!(coefficient_D(nf) > 0.0))
    throw std::domain_error("predict_correlation_sum: requires D > 0");

  const cplx phase = std::polar(1.0, 2.0 * (theta0 + eta1));
  const cplx den = 1.0 - moment_e2ij(nf, 1);
  p.j1 = phase / den;
  p.gamma_sum_slope = (mean_beta(nf) * phase / den).real();
  return p;
}

AndersonOrders anderson_orders(double k, double m2, double m4, double lambda) {
  if (!(m2 > 0.0) || !(m4 > 0.0))
    throw std::invalid_argument("anderson_orders: moments must be positive");
  for (int j : {1, 2, 4}) {
    if (std::abs(std::polar(1.0, 2.0 * j * k) - 1.0) <= kResonanceTol)
      throw std::domain_error(
          "anderson_orders: resonance e^{2i*" + std::to_string(j) +
          "*k} = 1 (band edge / Kappus-Wegner point)");
  }
  const double s2 = std::sin(k) * std::sin(k);
  const double eb2 = m2 / (4.0 * s2);
  const double eb4 = m4 / (16.0 * s2 * s2);

  AndersonOrders o;
  o.gamma2 = 0.5 * eb2;
  o.sigma2 = 0.5 * eb2;
  o.gamma4_coeff = 0.75 * eb2 * eb2 - 0.25 * eb4;
  o.sigma4_coeff = 0.375 * eb2 * eb2 - 0.125 * eb4;
  const double l2 = lambda * lambda, l4 = l2 * l2;
  o.gamma = o.gamma2 * l2 + o.gamma4_coeff * l4;
  o.sigma = o.sigma2 * l2 + o.sigma4_coeff * l4;
  o.gamma_minus_sigma = (o.gamma4_coeff - o.sigma4_coeff) * l4;
  return o;
}

}  // namespace spslab
