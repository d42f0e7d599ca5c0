#pragma once

// Command drivers behind the spslab executable: config validation,
// lambda sweeps comparing Monte Carlo against the second-order predictors
// and the exact adjoint computation, and phase-measure studies. All
// artifacts are plain CSV/JSON; decimal fields carry 17 significant
// digits so re-parsing reproduces them bit-exactly.

#include <iosfwd>
#include <string>
#include <vector>

#include "spslab/models.hpp"
#include "spslab/stats.hpp"

namespace spslab {

struct SweepRow {
  double lambda = 0.0;
  Estimate gamma_mc, sigma_mc, landauer_mc;
  double gamma_pred = 0.0, sigma_pred = 0.0, landauer_pred = 0.0;
  double landauer_exact = 0.0;
  double D = 0.0;
  std::vector<std::string> flags;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  FitResult gamma_fit;  // powers lambda^2, lambda^4
  FitResult sigma_fit;
  FitResult sps_fit;  // lambda^4 coefficient of gamma - sigma
  bool fits_valid = false;
  bool any_estimator_failed = false;
};

struct PhaseMomentRow {
  double lambda = 0.0;
  int j = 0;
  ComplexEstimate measured;
  cplx predicted;
  int prediction_order = 0;
  double slack = 0.0;
  bool pass = false;
};

struct PhasesResult {
  std::vector<PhaseMomentRow> moments;
  std::vector<double> flat_test_pvalues;  // chi-square flatness at lambda = 0
  bool any_estimator_failed = false;
};

/// FNV-1a digest of the config text, embedded in reports.
std::string fnv1a_hex(const std::string& text);

/// 17-significant-digit decimal, round-trip exact.
std::string format_g17(double v);

int run_validate(const Config& cfg, std::ostream& out);

SweepResult run_sweep(const Config& cfg, const std::string& config_digest,
                      const std::string& out_dir, std::ostream& out);

PhasesResult run_phases(const Config& cfg, const std::string& config_digest,
                        const std::string& out_dir, std::ostream& out);

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_csv(const std::string& text);

}  // namespace spslab
