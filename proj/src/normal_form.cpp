#include "spslab/normal_form.hpp"

#include <cmath>
#include <stdexcept>

namespace spslab {

namespace {

constexpr double kPi = 3.14159265358979323846;

Mat2r commutator(const Mat2r& x, const Mat2r& y) { return x * y - y * x; }

void project_traceless(Mat2r& x) {
  const double h = 0.5 * x.trace();
  x.a -= h;
  x.d -= h;
}

Mat2r eval_or_throw(const Realization& r, double lambda) {
  if (!r.evaluator)
    throw std::invalid_argument(
        "extract_normal_form: realization has neither derivatives nor an "
        "evaluator");
  return r.evaluator(lambda);
}

}  // namespace

void validate_family(const CriticalFamily& family) {
  if (family.realizations.empty())
    throw std::invalid_argument("family: no realizations");
  double wsum = 0.0;
  for (std::size_t i = 0; i < family.realizations.size(); ++i) {
    const auto& r = family.realizations[i];
    if (!(r.weight > 0.0))
      throw std::invalid_argument("family: weight " + std::to_string(i) +
                                  " is not positive");
    wsum += r.weight;
    if (!check_sl2r(r.T0, 1e-9))
      throw std::invalid_argument("family: T0 of realization " +
                                  std::to_string(i) + " is not in SL(2,R)");
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw std::invalid_argument("family: weights sum to " +
                                std::to_string(wsum) + ", expected 1");
}

CriticalDiagnostics verify_critical(const CriticalFamily& family, double tol) {
  validate_family(family);
  const auto& rs = family.realizations;

  CriticalDiagnostics d;
  d.pass = true;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const double t = std::abs(rs[i].T0.trace());
    if (t > d.max_abs_trace) {
      d.max_abs_trace = t;
      if (t >= 2.0 - tol) d.bad_trace_index = int(i);
    }
    for (std::size_t j = i + 1; j < rs.size(); ++j) {
      const double c = commutator(rs[i].T0, rs[j].T0).max_abs();
      if (c > d.max_commutator) {
        d.max_commutator = c;
        if (c > tol) {
          d.bad_pair_first = int(i);
          d.bad_pair_second = int(j);
        }
      }
    }
  }
  if (d.max_commutator > tol) {
    d.pass = false;
    d.failure = "realizations " + std::to_string(d.bad_pair_first) + " and " +
                std::to_string(d.bad_pair_second) +
                " do not commute at lambda = 0";
  }
  if (d.max_abs_trace >= 2.0 - tol) {
    d.pass = false;
    if (!d.failure.empty()) d.failure += "; ";
    d.failure += "realization " + std::to_string(d.bad_trace_index) +
                 " has |trace| = " + std::to_string(d.max_abs_trace);
  }
  if (!d.pass) return d;

  // Moment table from the jointly conjugated angles.
  const Mat2r m = elliptic_conjugator(rs[0].T0, tol);
  const Mat2r minv = m.inverse();
  d.moments_valid = true;
  for (const auto& r : rs) {
    const auto [eta, sign] = rotation_angle_sign(m * r.T0 * minv);
    (void)sign;  // e^{2 i j eta} is insensitive to the PSL sign
    for (int j = 1; j <= 4; ++j)
      d.eta_moments[j - 1] += r.weight * std::polar(1.0, 2.0 * j * eta);
  }
  for (int j = 0; j < 4; ++j)
    d.resonant[j] = std::abs(d.eta_moments[j] - 1.0) <= tol;
  return d;
}

Mat2r elliptic_conjugator(const Mat2r& t0, double tol) {
  if (std::abs(t0.det() - 1.0) > 1e-9)
    throw std::domain_error("elliptic_conjugator: det != 1");
  const double half_tr = 0.5 * t0.trace();
  if (std::abs(half_tr) >= 1.0 - 0.5 * tol)
    throw std::domain_error("elliptic_conjugator: |trace| >= 2 - tol");

  // Eigenvector w = (b, e^{i eta} - a) for the eigenvalue with positive
  // sine; b != 0 on the elliptic set.
  const double sin_eta = std::sqrt(1.0 - half_tr * half_tr);
  const Vec2 u = {t0.b, half_tr - t0.a};
  const Vec2 up = {0.0, sin_eta};

  // Basis [u, -u'] conjugates counterclockwise input to R_eta; [u, u']
  // conjugates clockwise input to R_{-eta}. The sense is decided by the
  // sign of det[u, u'] = b * sin_eta.
  Mat2r v;
  if (t0.b < 0.0)
    v = {u[0], -up[0], u[1], -up[1]};
  else
    v = {u[0], up[0], u[1], up[1]};
  const double dv = v.det();
  const Mat2r m0 = std::sqrt(dv) * v.inverse();

  // Unique rotation making the conjugator lower triangular with positive
  // diagonal: with phi = atan2(m12, m22) the diagonal of R_phi M0 is
  // (1/h, h), h = hypot(m12, m22).
  const double phi = std::atan2(m0.b, m0.d);
  return rotation(phi) * m0;
}

std::pair<double, int> rotation_angle_sign(const Mat2r& c, double tol) {
  const double phi = std::atan2(c.c, c.a);
  if ((c - rotation(phi)).max_abs() > tol)
    throw std::domain_error(
        "rotation_angle_sign: matrix is not a rotation (family not "
        "simultaneously conjugated?)");
  if (c.c > 0.0) return {phi, 1};            // sin(phi) > 0
  if (c.c < 0.0) return {phi + kPi, -1};     // R_phi = -R_{phi+pi}
  throw std::domain_error("rotation_angle_sign: angle is 0 or pi");
}

cplx coupling_beta(const Mat2r& x) {
  const double s = 1.0 / std::sqrt(2.0);
  const CVec2 v = {cplx(s, 0.0), cplx(0.0, -s)};
  const CVec2 xv = x.apply(v);
  // <conj(v)| X |v> = sum_i v_i (X v)_i
  return v[0] * xv[0] + v[1] * xv[1];
}

Mat2r conjugated_step(const NormalFormEntry& e, double lambda) {
  const Mat2r gen = lambda * e.P + (lambda * lambda) * e.Q;
  Mat2r w = rotation(e.eta) * exp_sl2(gen, 1e-8);
  if (e.sign < 0) w = -w;
  return w;
}

NormalForm extract_normal_form(const CriticalFamily& family) {
  const CriticalDiagnostics diag = verify_critical(family);
  if (!diag.pass)
    throw std::invalid_argument("extract_normal_form: " + diag.failure);

  NormalForm nf;
  nf.M = elliptic_conjugator(family.realizations[0].T0);
  const Mat2r minv = nf.M.inverse();

  for (const auto& r : family.realizations) {
    NormalFormEntry e;
    e.weight = r.weight;
    const Mat2r c0 = nf.M * r.T0 * minv;
    const auto [eta, sign] = rotation_angle_sign(c0);
    e.eta = eta;
    e.sign = sign;

    Mat2r s1, s2;
    if (r.T1) {
      s1 = nf.M * (*r.T1) * minv;
      s2 = r.T2 ? nf.M * (*r.T2) * minv : Mat2r::zero();
    } else {
      // Central differences with one Richardson step: O(h^4) first
      // derivative, O(h^2) second.
      auto conj_eval = [&](double lam) {
        return nf.M * eval_or_throw(r, lam) * minv;
      };
      const double h1 = 1e-4;
      auto d1 = [&](double h) {
        return (0.5 / h) * (conj_eval(h) - conj_eval(-h));
      };
      s1 = (1.0 / 3.0) * (4.0 * d1(0.5 * h1) - d1(h1));
      const double h2 = 1e-3;
      auto d2 = [&](double h) {
        return (1.0 / (h * h)) *
               (conj_eval(h) - 2.0 * conj_eval(0.0) + conj_eval(-h));
      };
      s2 = (1.0 / 3.0) * (4.0 * d2(0.5 * h2) - d2(h2));
    }

    // A(lambda) = (sign R_eta)^{-1} S(lambda) = 1 + lambda P
    //             + lambda^2 (Q + P^2/2) + O(lambda^3)
    Mat2r rot_inv = rotation(-e.eta);
    if (e.sign < 0) rot_inv = -rot_inv;
    e.P = rot_inv * s1;
    e.Q = 0.5 * (rot_inv * s2 - e.P * e.P);
    project_traceless(e.P);
    project_traceless(e.Q);
    e.beta = coupling_beta(e.P);
    nf.entries.push_back(e);
  }

  // Reconstruction residual at a probe lambda for evaluator-backed input.
  double res = 0.0;
  const double probe = 1e-2;
  for (std::size_t i = 0; i < family.realizations.size(); ++i) {
    const auto& r = family.realizations[i];
    if (r.T1 || !r.evaluator) continue;
    const Mat2r exact = nf.M * r.evaluator(probe) * minv;
    res = std::max(res,
                   (exact - conjugated_step(nf.entries[i], probe)).max_abs());
  }
  nf.fd_residual = res;
  if (res > 1e-3)
    throw std::runtime_error(
        "extract_normal_form: numeric differentiation residual " +
        std::to_string(res) + " exceeds tolerance");
  return nf;
}

cplx moment_e2ij(const NormalForm& nf, int j) {
  cplx s = 0.0;
  for (const auto& e : nf.entries)
    s += e.weight * std::polar(1.0, 2.0 * j * e.eta);
  return s;
}

cplx mean_beta(const NormalForm& nf) {
  cplx s = 0.0;
  for (const auto& e : nf.entries) s += e.weight * e.beta;
  return s;
}

double mean_abs2_beta(const NormalForm& nf) {
  double s = 0.0;
  for (const auto& e : nf.entries) s += e.weight * std::norm(e.beta);
  return s;
}

cplx mean_beta_conj_e2i(const NormalForm& nf) {
  cplx s = 0.0;
  for (const auto& e : nf.entries)
    s += e.weight * std::conj(e.beta) * std::polar(1.0, 2.0 * e.eta);
  return s;
}

}  // namespace spslab
