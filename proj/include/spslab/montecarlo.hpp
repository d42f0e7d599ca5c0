#pragma once

// Stochastic verification engine: Lyapunov exponent, CLT variance,
// Landauer resistance by direct averaging, phase-orbit simulation,
// invariant-measure moments and truncated correlation sums. Chains are
// independent work units on counter-derived per-chain random streams, so
// serial and threaded execution produce bit-identical results.

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spslab/normal_form.hpp"

namespace spslab {

struct RunConfig {
  long steps = 1'000'000;    // N, total steps per chain (burn-in included)
  long ensemble = 64;        // M, number of independent chains
  long burn_in = 0;          // equilibration steps discarded by estimators
  std::uint64_t seed = 0;
  long renorm_every = 16;
  double theta0 = 0.0;
  int threads = 1;

  void validate() const;  // steps >= burn_in >= 0, renorm_every >= 1, ...
};

struct Estimate {
  double value = 0.0;
  double se = 0.0;  // standard error
  long count = 0;
  bool flagged = false;
  std::string note;
};

struct ComplexEstimate {
  cplx value;
  double se_re = 0.0;
  double se_im = 0.0;
  long count = 0;
};

/// Phase sequence theta_0 .. theta_N of one chain, angles in [0, 2pi).
using PhaseOrbit = std::vector<double>;

/// Transfer matrices of one disorder realization at fixed lambda, in the
/// conjugated frame. Finite support is a weight table; the continuous
/// option covers uniform Anderson disorder, W(v) = W0 + v W1 with
/// v ~ U[-half_width, half_width].
struct ChainModel {
  std::vector<Mat2r> mats;
  std::vector<double> cum;  // cumulative weights, cum.back() == 1
  std::vector<double> eta;  // per-realization rotation angle
  bool continuous = false;
  Mat2r w0, w1;
  double half_width = 0.0;
  Mat2r M = Mat2r::identity();
  Mat2r Minv = Mat2r::identity();
};

ChainModel make_chain_model(const NormalForm& nf, double lambda);

// --- reproducible per-chain streams ------------------------------------

std::uint64_t mix64(std::uint64_t x);

/// Engine for chain `chain` of run `seed`; the stream id is a splitmix
/// hash of the pair, so chains are decorrelated and order-independent.
inline std::mt19937_64 chain_rng(std::uint64_t seed, std::uint64_t chain) {
  return std::mt19937_64(mix64(seed + 0x9E3779B97F4A7C15ULL * (chain + 1)));
}

inline double uniform01(std::mt19937_64& g) {
  return double(g() >> 11) * 0x1.0p-53;
}

// --- estimators ---------------------------------------------------------

/// One application of the random phase map: the angle of
/// sign R_eta exp(lambda P + lambda^2 Q) e_theta, in [0, 2pi).
double phase_step(const NormalForm& nf, std::size_t sigma, double lambda,
                  double theta);

/// Phase orbit of one chain (theta_0 = cfg.theta0) under the chain's
/// random code; mostly for diagnostics and tests.
PhaseOrbit phase_orbit(const ChainModel& model, const RunConfig& cfg,
                       std::uint64_t chain);

/// (1/N) E log || prod_n W_n e_theta0 || over cfg.ensemble chains of
/// cfg.steps steps; standard error from the inter-chain spread.
Estimate estimate_lyapunov(const ChainModel& model, const RunConfig& cfg);
Estimate estimate_lyapunov(const NormalForm& nf, double lambda,
                           const RunConfig& cfg);

/// The per-replica accumulated log norms X_m over the post-burn-in window
/// of length steps - burn_in (the raw sample behind the variance
/// estimator and the CLT normality test).
std::vector<double> replica_log_norms(const ChainModel& model,
                                      const RunConfig& cfg);

/// CLT variance: sample variance of X_m / sqrt(window), standard error
/// from the chi-square law. Requires ensemble >= 2; flagged below 32 and
/// when the family has D <= 0 (variance statement not guaranteed).
Estimate estimate_variance(const ChainModel& model, const RunConfig& cfg);
Estimate estimate_variance(const NormalForm& nf, double lambda,
                           const RunConfig& cfg);

/// Invariant-measure moment I_j = E_nu e^{2ij theta} by time-plus-ensemble
/// averaging after burn-in, j in 1..4.
ComplexEstimate estimate_phase_moment(const ChainModel& model, int j,
                                      const RunConfig& cfg);
ComplexEstimate estimate_phase_moment(const NormalForm& nf, double lambda,
                                      int j, const RunConfig& cfg);

/// Landauer resistance by direct averaging of tr(T* T) over `ensemble`
/// sampled products of length n (log-scaled); returns log(average)/(2n)
/// with a delta-method standard error. Flagged when n times the predicted
/// exponent exceeds 40 (heavy-tailed average).
Estimate estimate_landauer_mc(const ChainModel& model, long n, long ensemble,
                              std::uint64_t seed, int threads = 1,
                              double gammahat_guess = 0.0);
Estimate estimate_landauer_mc(const NormalForm& nf, double lambda, long n,
                              long ensemble, std::uint64_t seed,
                              int threads = 1);

/// Truncated correlation sum J_j = E_2 sum_{m>=1} (e^{2ij theta_m} - nu_j)
/// at fixed theta0, stratified by the first-step rotation angle. The
/// nu_j subtraction uses a coupled stationary partner chain driven by the
/// same code, so the summand decays pathwise and no separate nu estimate
/// enters. Truncation at m_max = min(ceil(12 / fitted rate), 1e6).
struct CorrelationEstimate {
  ComplexEstimate total;
  long m_max = 0;
  double fitted_rate = 0.0;
  double tail_bound = 0.0;
  bool converged = true;
  struct Stratum {
    double eta1 = 0.0;
    double weight = 0.0;
    ComplexEstimate est;
  };
  std::vector<Stratum> strata;
};
CorrelationEstimate estimate_correlation_sum(const NormalForm& nf,
                                             double lambda, int j,
                                             double theta0,
                                             const RunConfig& cfg);

/// Exact full-support enumeration over all |support|^n codes (finite
/// models, small n): expectations of the log norm, its square, the
/// Landauer trace, and the time-averaged phase moments j = 1, 2.
struct EnumerationResult {
  double mean_log_norm = 0.0;  // E log || prod W e_theta0 ||
  double var_log_norm = 0.0;
  double mean_trace = 0.0;  // E tr(T* T), boundary conjugation included
  cplx mean_phase_avg_j1;   // E (1/n) sum_m e^{2i theta_m}
  cplx mean_phase_avg_j2;
};
EnumerationResult enumerate_exact(const ChainModel& model, long n,
                                  double theta0);

}  // namespace spslab
