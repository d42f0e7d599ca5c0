#include "spslab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "spslab/perturbation.hpp"

namespace spslab {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_and_se(const std::vector<double>& xs) {
  MeanSe r;
  const double n = double(xs.size());
  r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return r;
}

inline Mat2r sample_matrix(const ChainModel& m, double u) {
  if (m.continuous) {
    const double v = m.half_width * (2.0 * u - 1.0);
    return {m.w0.a + v * m.w1.a, m.w0.b + v * m.w1.b, m.w0.c + v * m.w1.c,
            m.w0.d + v * m.w1.d};
  }
  std::size_t i = 0;
  while (i + 1 < m.cum.size() && u >= m.cum[i]) ++i;
  return m.mats[i];
}

inline std::size_t sample_index(const std::vector<double>& cum, double u) {
  std::size_t i = 0;
  while (i + 1 < cum.size() && u >= cum[i]) ++i;
  return i;
}

/// Advance the unit-direction state by `steps` draws, accumulating the
/// log growth exactly (renormalization is pure bookkeeping).
double log_growth(const ChainModel& model, std::mt19937_64& rng, long steps,
                  long renorm_every, double& ux, double& uy) {
  double acc = 0.0;
  long since = 0;
  for (long n = 0; n < steps; ++n) {
    const Mat2r w = sample_matrix(model, uniform01(rng));
    const double x = w.a * ux + w.b * uy;
    const double y = w.c * ux + w.d * uy;
    ux = x;
    uy = y;
    const double n2 = x * x + y * y;
    if (++since == renorm_every || n2 > 1e200) {
      const double r = std::sqrt(n2);
      acc += std::log(r);
      ux /= r;
      uy /= r;
      since = 0;
    }
  }
  const double r = std::sqrt(ux * ux + uy * uy);
  acc += std::log(r);
  ux /= r;
  uy /= r;
  return acc;
}

void run_chains(long count, int threads,
                const std::function<void(long)>& body) {
  if (threads <= 1 || count < 2) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  const int nt = int(std::min<long>(threads, count));
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&, t]() {
      for (long i = t; i < count; i += nt) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// e^{2ij theta} for the direction (ux, uy), no normalization required.
inline cplx phase_power(double ux, double uy, int j) {
  const double n2 = ux * ux + uy * uy;
  const cplx z(( ux * ux - uy * uy) / n2, 2.0 * ux * uy / n2);
  cplx zj = z;
  for (int t = 1; t < j; ++t) zj *= z;
  return zj;
}

}  // namespace

void RunConfig::validate() const {
  if (steps < 1) throw std::invalid_argument("RunConfig: steps must be >= 1");
  if (ensemble < 1)
    throw std::invalid_argument("RunConfig: ensemble must be >= 1");
  if (burn_in < 0 || burn_in > steps)
    throw std::invalid_argument("RunConfig: need 0 <= burn_in <= steps");
  if (renorm_every < 1)
    throw std::invalid_argument("RunConfig: renorm_every must be >= 1");
  if (threads < 1) throw std::invalid_argument("RunConfig: threads must be >= 1");
}

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ChainModel make_chain_model(const NormalForm& nf, double lambda) {
  if (nf.entries.empty())
    throw std::invalid_argument("make_chain_model: empty normal form");
  ChainModel m;
  m.M = nf.M;
  m.Minv = nf.M.inverse();
  double acc = 0.0;
  for (const auto& e : nf.entries) {
    m.mats.push_back(conjugated_step(e, lambda));
    acc += e.weight;
    m.cum.push_back(acc);
    m.eta.push_back(e.eta);
  }
  return m;
}

double phase_step(const NormalForm& nf, std::size_t sigma, double lambda,
                  double theta) {
  if (sigma >= nf.entries.size())
    throw std::out_of_range("phase_step: realization index");
  const Mat2r w = conjugated_step(nf.entries[sigma], lambda);
  const Vec2 u = w.apply(unit_vector(theta));
  double out = std::atan2(u[1], u[0]);
  if (out < 0.0) out += kTwoPi;
  return out;
}

PhaseOrbit phase_orbit(const ChainModel& model, const RunConfig& cfg,
                       std::uint64_t chain) {
  cfg.validate();
  auto rng = chain_rng(cfg.seed, chain);
  PhaseOrbit orbit;
  orbit.reserve(std::size_t(cfg.steps) + 1);
  orbit.push_back(std::fmod(cfg.theta0 + kTwoPi, kTwoPi));
  double ux = std::cos(cfg.theta0), uy = std::sin(cfg.theta0);
  for (long n = 0; n < cfg.steps; ++n) {
    const Mat2r w = sample_matrix(model, uniform01(rng));
    const double x = w.a * ux + w.b * uy;
    const double y = w.c * ux + w.d * uy;
    const double r = std::hypot(x, y);
    ux = x / r;
    uy = y / r;
    double th = std::atan2(uy, ux);
    if (th < 0.0) th += kTwoPi;
    orbit.push_back(th);
  }
  return orbit;
}

Estimate estimate_lyapunov(const ChainModel& model, const RunConfig& cfg) {
  cfg.validate();
  std::vector<double> xs(std::size_t(cfg.ensemble));
  run_chains(cfg.ensemble, cfg.threads, [&](long c) {
    auto rng = chain_rng(cfg.seed, std::uint64_t(c));
    double ux = std::cos(cfg.theta0), uy = std::sin(cfg.theta0);
    xs[std::size_t(c)] =
        log_growth(model, rng, cfg.steps, cfg.renorm_every, ux, uy) /
        double(cfg.steps);
  });
  const auto [mean, se] = mean_and_se(xs);
  return {mean, se, cfg.ensemble, false, ""};
}

Estimate estimate_lyapunov(const NormalForm& nf, double lambda,
                           const RunConfig& cfg) {
  return estimate_lyapunov(make_chain_model(nf, lambda), cfg);
}

std::vector<double> replica_log_norms(const ChainModel& model,
                                      const RunConfig& cfg) {
  cfg.validate();
  const long window = cfg.steps - cfg.burn_in;
  if (window < 1)
    throw std::invalid_argument("replica_log_norms: empty window");
  std::vector<double> xs(std::size_t(cfg.ensemble));
  run_chains(cfg.ensemble, cfg.threads, [&](long c) {
    auto rng = chain_rng(cfg.seed, std::uint64_t(c));
    double ux = std::cos(cfg.theta0), uy = std::sin(cfg.theta0);
    log_growth(model, rng, cfg.burn_in, cfg.renorm_every, ux, uy);
    xs[std::size_t(c)] =
        log_growth(model, rng, window, cfg.renorm_every, ux, uy);
  });
  return xs;
}

Estimate estimate_variance(const ChainModel& model, const RunConfig& cfg) {
  if (cfg.ensemble < 2)
    throw std::invalid_argument("estimate_variance: need ensemble >= 2");
  const long window = cfg.steps - cfg.burn_in;
  const auto xs = replica_log_norms(model, cfg);
  const double n = double(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss / (n - 1.0);

  Estimate e;
  e.value = var / double(window);
  e.se = e.value * std::sqrt(2.0 / (n - 1.0));
  e.count = cfg.ensemble;
  if (cfg.ensemble < 32) {
    e.flagged = true;
    e.note = "fewer than 32 replicas";
  }
  return e;
}

Estimate estimate_variance(const NormalForm& nf, double lambda,
                           const RunConfig& cfg) {
  Estimate e = estimate_variance(make_chain_model(nf, lambda), cfg);
  try {
    if (!(coefficient_D(nf) > 0.0)) {
      e.flagged = true;
      if (!e.note.empty()) e.note += "; ";
      e.note += "D <= 0: variance statement of the second-order theory "
                "does not apply";
    }
  } catch (const std::domain_error&) {
    e.flagged = true;
    if (!e.note.empty()) e.note += "; ";
    e.note += "resonant rotation moment";
  }
  return e;
}

ComplexEstimate estimate_phase_moment(const ChainModel& model, int j,
                                      const RunConfig& cfg) {
  cfg.validate();
  if (j < 1 || j > 4)
    throw std::invalid_argument("estimate_phase_moment: j must be in 1..4");
  const long window = cfg.steps - cfg.burn_in;
  if (window < 1)
    throw std::invalid_argument("estimate_phase_moment: empty window");

  std::vector<double> re(std::size_t(cfg.ensemble)),
      im(std::size_t(cfg.ensemble));
  run_chains(cfg.ensemble, cfg.threads, [&](long c) {
    auto rng = chain_rng(cfg.seed, std::uint64_t(c));
    double ux = std::cos(cfg.theta0), uy = std::sin(cfg.theta0);
    long since = 0;
    cplx acc = 0.0;
    for (long n = 0; n < cfg.steps; ++n) {
      const Mat2r w = sample_matrix(model, uniform01(rng));
      const double x = w.a * ux + w.b * uy;
      const double y = w.c * ux + w.d * uy;
      ux = x;
      uy = y;
      if (++since == cfg.renorm_every || x * x + y * y > 1e200) {
        const double r = std::hypot(ux, uy);
        ux /= r;
        uy /= r;
        since = 0;
      }
      if (n >= cfg.burn_in) acc += phase_power(ux, uy, j);
    }
    re[std::size_t(c)] = acc.real() / double(window);
    im[std::size_t(c)] = acc.imag() / double(window);
  });
  const auto mre = mean_and_se(re);
  const auto mim = mean_and_se(im);
  return {cplx(mre.mean, mim.mean), mre.se, mim.se, cfg.ensemble};
}

ComplexEstimate estimate_phase_moment(const NormalForm& nf, double lambda,
                                      int j, const RunConfig& cfg) {
  return estimate_phase_moment(make_chain_model(nf, lambda), j, cfg);
}

Estimate estimate_landauer_mc(const ChainModel& model, long n, long ensemble,
                              std::uint64_t seed, int threads,
                              double gammahat_guess) {
  if (n < 1 || ensemble < 2)
    throw std::invalid_argument("estimate_landauer_mc: need n >= 1, M >= 2");
  std::vector<double> logs(std::size_t(ensemble), 0.0);
  run_chains(ensemble, threads, [&](long c) {
    auto rng = chain_rng(seed, std::uint64_t(c));
    Mat2r prod = Mat2r::identity();
    double log_scale = 0.0;
    for (long i = 0; i < n; ++i) {
      prod = sample_matrix(model, uniform01(rng)) * prod;
      const double mag = prod.max_abs();
      if (mag > 1e100 || (i % 32 == 31)) {
        prod = (1.0 / mag) * prod;
        log_scale += std::log(mag);
      }
    }
    const Mat2r t = model.Minv * prod * model.M;
    const double f2 = t.a * t.a + t.b * t.b + t.c * t.c + t.d * t.d;
    if (!std::isfinite(f2) || f2 <= 0.0)
      throw std::runtime_error("estimate_landauer_mc: overflow despite scaling");
    logs[std::size_t(c)] = 2.0 * log_scale + std::log(f2);
  });

  const double top = *std::max_element(logs.begin(), logs.end());
  std::vector<double> ws(logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i) ws[i] = std::exp(logs[i] - top);
  const auto [mean_w, se_w] = mean_and_se(ws);

  Estimate e;
  e.value = (top + std::log(mean_w)) / (2.0 * double(n));
  e.se = se_w / mean_w / (2.0 * double(n));
  e.count = ensemble;
  if (double(n) * gammahat_guess > 40.0) {
    e.flagged = true;
    e.note = "N * gammahat > 40: averaging a heavy-tailed exponential";
  }
  return e;
}

Estimate estimate_landauer_mc(const NormalForm& nf, double lambda, long n,
                              long ensemble, std::uint64_t seed, int threads) {
  double guess = 0.0;
  try {
    guess = 2.0 * coefficient_D(nf) * lambda * lambda;
  } catch (const std::domain_error&) {
  }
  return estimate_landauer_mc(make_chain_model(nf, lambda), n, ensemble, seed,
                              threads, guess);
}

namespace {

struct CoupledPair {
  double ux, uy;  // chain conditioned on the first step
  double px, py;  // stationary partner
};

inline void advance_pair(CoupledPair& s, const Mat2r& w, bool renorm) {
  const double x = w.a * s.ux + w.b * s.uy;
  const double y = w.c * s.ux + w.d * s.uy;
  const double qx = w.a * s.px + w.b * s.py;
  const double qy = w.c * s.px + w.d * s.py;
  s = {x, y, qx, qy};
  if (renorm) {
    const double ru = std::hypot(s.ux, s.uy);
    const double rp = std::hypot(s.px, s.py);
    s.ux /= ru;
    s.uy /= ru;
    s.px /= rp;
    s.py /= rp;
  }
}

struct PilotFit {
  long m_hi = 0;
  double rate = 0.0;
  double amplitude = 0.0;
  bool decayed = false;  // signal fell below the noise floor within cap
};

PilotFit fit_decay(const std::vector<cplx>& dsum,
                   const std::vector<double>& dabs2, long chains) {
  const long cap = long(dsum.size());
  std::vector<double> mag(cap);
  for (long m = 0; m < cap; ++m) mag[m] = std::abs(dsum[m]) / double(chains);

  // The ensemble mean |D_m| carries the decaying signal; the per-path
  // spread decays much more slowly (uncollapsed couplings), so the
  // signal window ends where |D_m| meets its own local standard error,
  // not a global floor.
  auto noise_at = [&](long m) {
    const double var =
        std::max(0.0, dabs2[m] / double(chains) - mag[m] * mag[m]);
    return std::sqrt(var / double(chains));
  };
  const long w = std::max<long>(4, cap / 128);
  auto smooth = [&](long m) {
    const long lo = std::max<long>(0, m - w / 2);
    const long hi = std::min<long>(cap - 1, m + w / 2);
    double s = 0.0;
    for (long t = lo; t <= hi; ++t) s += mag[t];
    return s / double(hi - lo + 1);
  };

  // first sustained entry into the noise band
  PilotFit f;
  long m_star = -1;
  long below = 0;
  for (long m = 1; m < cap; ++m) {
    if (smooth(m) < 4.0 * noise_at(m)) {
      if (++below >= w && m_star < 0) m_star = m - below + 1;
    } else {
      below = 0;
      m_star = -1;
    }
  }
  f.decayed = m_star > 0;
  if (!f.decayed) m_star = cap - 1;
  f.m_hi = m_star;

  if (m_star < 8) {  // signal gone within a window: one-step decay
    f.rate = 1.0;
    f.amplitude = mag[0];
    f.decayed = true;
    return f;
  }

  const long m_lo = std::max<long>(1, m_star / 8);
  const long m_hi = std::max(m_lo + 4, (7 * m_star) / 8);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long npts = 0;
  for (long m = m_lo; m <= m_hi; ++m) {
    const double s = smooth(m);
    if (s <= 0.0) continue;
    const double x = double(m), y = std::log(s);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++npts;
  }
  if (npts >= 4) {
    const double denom = double(npts) * sxx - sx * sx;
    if (denom > 0.0) {
      const double slope = (double(npts) * sxy - sx * sy) / denom;
      f.rate = -slope;
      f.amplitude = std::exp((sy - slope * sx) / double(npts));
    }
  } else {
    f.rate = 1.0;
    f.amplitude = mag[0];
  }
  return f;
}

}  // namespace

CorrelationEstimate estimate_correlation_sum(const NormalForm& nf,
                                             double lambda, int j,
                                             double theta0,
                                             const RunConfig& cfg) {
  cfg.validate();
  if (j < 1 || j > 4)
    throw std::invalid_argument("estimate_correlation_sum: j must be in 1..4");
  if (!(lambda > 0.0))
    throw std::invalid_argument("estimate_correlation_sum: lambda must be > 0");
  if (!(coefficient_D(nf) > 0.0))
    throw std::domain_error("estimate_correlation_sum: requires D > 0");

  const ChainModel model = make_chain_model(nf, lambda);

  // strata of the first-step rotation angle
  std::vector<double> strat_eta;
  std::vector<double> strat_weight;
  std::vector<std::vector<std::size_t>> strat_members;
  for (std::size_t i = 0; i < nf.entries.size(); ++i) {
    const double eta = nf.entries[i].eta;
    const double wgt = nf.entries[i].weight;
    bool found = false;
    for (std::size_t s = 0; s < strat_eta.size(); ++s) {
      if (std::abs(strat_eta[s] - eta) < 1e-12) {
        strat_weight[s] += wgt;
        strat_members[s].push_back(i);
        found = true;
        break;
      }
    }
    if (!found) {
      strat_eta.push_back(eta);
      strat_weight.push_back(wgt);
      strat_members.push_back({i});
    }
  }
  const bool single_stratum = strat_eta.size() == 1;

  // --- pilot: measure the decay of the coupled difference --------------
  const long pilot_chains = std::clamp<long>(cfg.ensemble / 8, 256, 1024);
  long cap = 256;
  PilotFit fit;
  const long renorm = 32;
  while (true) {
    std::vector<cplx> dsum(std::size_t(cap), cplx(0.0));
    std::vector<double> dabs2(std::size_t(cap), 0.0);
    for (long c = 0; c < pilot_chains; ++c) {
      auto rng = chain_rng(cfg.seed, (std::uint64_t(1) << 40) + c);
      CoupledPair st;
      st.ux = std::cos(theta0);
      st.uy = std::sin(theta0);
      const double th_p = kTwoPi * uniform01(rng);
      st.px = std::cos(th_p);
      st.py = std::sin(th_p);
      // equilibrate the partner alone
      for (long m = 0; m < cap + cfg.burn_in; ++m) {
        const Mat2r w = sample_matrix(model, uniform01(rng));
        const double qx = w.a * st.px + w.b * st.py;
        const double qy = w.c * st.px + w.d * st.py;
        const double r = std::hypot(qx, qy);
        st.px = qx / r;
        st.py = qy / r;
      }
      for (long m = 0; m < cap; ++m) {
        advance_pair(st, sample_matrix(model, uniform01(rng)),
                     m % renorm == renorm - 1);
        const cplx diff =
            phase_power(st.ux, st.uy, j) - phase_power(st.px, st.py, j);
        dsum[std::size_t(m)] += diff;
        dabs2[std::size_t(m)] += std::norm(diff);
      }
    }
    fit = fit_decay(dsum, dabs2, pilot_chains);
    if (fit.decayed || cap >= 65536) break;
    cap *= 4;
  }

  CorrelationEstimate out;
  out.fitted_rate = fit.rate;
  out.converged = fit.rate > 0.0 && fit.decayed;
  long m_max;
  if (fit.rate > 0.0) {
    m_max = std::min<long>(1'000'000, long(std::ceil(12.0 / fit.rate)));
    m_max = std::max(m_max, fit.m_hi);
    m_max = std::max<long>(m_max, 16);
    out.tail_bound = fit.amplitude * std::exp(-fit.rate * double(m_max)) /
                     fit.rate;
  } else {
    m_max = cap;  // non-convergent fit; flagged via `converged`
    out.tail_bound = std::abs(fit.amplitude);
  }
  out.m_max = m_max;

  // --- main stratified runs --------------------------------------------
  const long partner_burn = std::max(cfg.burn_in, m_max);
  for (std::size_t s = 0; s < strat_eta.size(); ++s) {
    // conditional law of the first step within the stratum
    std::vector<double> cond_cum;
    double acc = 0.0;
    for (std::size_t i : strat_members[s]) {
      acc += nf.entries[i].weight / strat_weight[s];
      cond_cum.push_back(acc);
    }

    std::vector<double> re(std::size_t(cfg.ensemble)),
        im(std::size_t(cfg.ensemble));
    run_chains(cfg.ensemble, cfg.threads, [&](long c) {
      auto rng =
          chain_rng(cfg.seed, (std::uint64_t(s + 2) << 41) + std::uint64_t(c));
      CoupledPair st;
      st.ux = std::cos(theta0);
      st.uy = std::sin(theta0);
      const double th_p = kTwoPi * uniform01(rng);
      st.px = std::cos(th_p);
      st.py = std::sin(th_p);
      for (long m = 0; m < partner_burn; ++m) {
        const Mat2r w = sample_matrix(model, uniform01(rng));
        const double qx = w.a * st.px + w.b * st.py;
        const double qy = w.c * st.px + w.d * st.py;
        const double r = std::hypot(qx, qy);
        st.px = qx / r;
        st.py = qy / r;
      }

      cplx sum = 0.0;
      for (long m = 1; m <= m_max; ++m) {
        Mat2r wm, wp;
        if (m == 1) {
          const double u1 = uniform01(rng);
          const std::size_t ci = sample_index(cond_cum, u1);
          wm = model.mats[strat_members[s][ci]];
          // same draw doubles as the partner's unconditioned step when
          // there is a single stratum; otherwise an independent one
          wp = single_stratum ? wm
                              : sample_matrix(model, uniform01(rng));
          const double x = wm.a * st.ux + wm.b * st.uy;
          const double y = wm.c * st.ux + wm.d * st.uy;
          const double qx = wp.a * st.px + wp.b * st.py;
          const double qy = wp.c * st.px + wp.d * st.py;
          st = {x, y, qx, qy};
        } else {
          advance_pair(st, sample_matrix(model, uniform01(rng)),
                       m % renorm == renorm - 1);
        }
        sum +=
            phase_power(st.ux, st.uy, j) - phase_power(st.px, st.py, j);
      }
      re[std::size_t(c)] = sum.real();
      im[std::size_t(c)] = sum.imag();
    });

    const auto mre = mean_and_se(re);
    const auto mim = mean_and_se(im);
    CorrelationEstimate::Stratum str;
    str.eta1 = strat_eta[s];
    str.weight = strat_weight[s];
    str.est = {cplx(mre.mean, mim.mean), mre.se, mim.se, cfg.ensemble};
    out.strata.push_back(str);
  }

  cplx total = 0.0;
  double se2_re = 0.0, se2_im = 0.0;
  for (const auto& s : out.strata) {
    total += s.weight * s.est.value;
    se2_re += s.weight * s.weight * s.est.se_re * s.est.se_re;
    se2_im += s.weight * s.weight * s.est.se_im * s.est.se_im;
  }
  out.total = {total, std::sqrt(se2_re), std::sqrt(se2_im),
               cfg.ensemble * long(out.strata.size())};
  return out;
}

EnumerationResult enumerate_exact(const ChainModel& model, long n,
                                  double theta0) {
  if (model.continuous)
    throw std::invalid_argument("enumerate_exact: finite support only");
  if (n < 1 || n > 24)
    throw std::invalid_argument("enumerate_exact: n out of range [1, 24]");

  std::vector<double> weights(model.cum.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < model.cum.size(); ++i) {
    weights[i] = model.cum[i] - prev;
    prev = model.cum[i];
  }

  EnumerationResult out;
  double sum_log = 0.0, sum_log2 = 0.0;

  struct Frame {
    Mat2r prod;
    double ux, uy, log_acc;
    cplx p1, p2;
  };
  std::function<void(long, double, const Frame&)> walk =
      [&](long depth, double weight, const Frame& f) {
        if (depth == n) {
          sum_log += weight * f.log_acc;
          sum_log2 += weight * f.log_acc * f.log_acc;
          const Mat2r t = model.Minv * f.prod * model.M;
          out.mean_trace +=
              weight * (t.a * t.a + t.b * t.b + t.c * t.c + t.d * t.d);
          out.mean_phase_avg_j1 += weight * f.p1 / double(n);
          out.mean_phase_avg_j2 += weight * f.p2 / double(n);
          return;
        }
        for (std::size_t i = 0; i < model.mats.size(); ++i) {
          const Mat2r& w = model.mats[i];
          Frame g;
          g.prod = w * f.prod;
          const double x = w.a * f.ux + w.b * f.uy;
          const double y = w.c * f.ux + w.d * f.uy;
          const double r = std::hypot(x, y);
          g.ux = x / r;
          g.uy = y / r;
          g.log_acc = f.log_acc + std::log(r);
          const cplx z = phase_power(g.ux, g.uy, 1);
          g.p1 = f.p1 + z;
          g.p2 = f.p2 + z * z;
          walk(depth + 1, weight * weights[i], g);
        }
      };

  Frame root{Mat2r::identity(), std::cos(theta0), std::sin(theta0), 0.0, 0.0,
             0.0};
  walk(0, 1.0, root);
  out.mean_log_norm = sum_log;
  out.var_log_norm = std::max(0.0, sum_log2 - sum_log * sum_log);
  return out;
}

}  // namespace spslab
