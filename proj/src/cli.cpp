#include "spslab/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "spslab/adjoint.hpp"
#include "spslab/perturbation.hpp"

namespace spslab {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string join_flags(const std::vector<std::string>& flags) {
  std::string out;
  for (const auto& f : flags) {
    if (!out.empty()) out += ';';
    out += f;
  }
  return out;
}

std::filesystem::path resolve(const std::string& out_dir,
                              const std::string& name) {
  std::filesystem::path p(name);
  if (p.is_absolute() || out_dir.empty()) return p;
  return std::filesystem::path(out_dir) / p;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  if (!p.parent_path().empty())
    std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int run_validate(const Config& cfg, std::ostream& out) {
  const CriticalFamily family = config_family(cfg);
  const CriticalDiagnostics d = verify_critical(family);

  out << "critical-point check\n";
  out << "  realizations:       " << family.realizations.size() << "\n";
  out << "  max |[T0,T0']|:     " << format_g17(d.max_commutator) << "\n";
  out << "  max |tr T0|:        " << format_g17(d.max_abs_trace) << "\n";
  if (!d.pass) {
    out << "  FAIL: " << d.failure << "\n";
    return 1;
  }
  out << "  commuting and elliptic:  pass\n";
  out << "rotation moments E(e^{2ij eta})\n";
  bool warned = false;
  for (int j = 1; j <= 4; ++j) {
    const cplx m = d.eta_moments[j - 1];
    out << "  j=" << j << ":  " << format_g17(m.real()) << (m.imag() < 0 ? " - " : " + ")
        << format_g17(std::abs(m.imag())) << "i   |m-1| = "
        << format_g17(std::abs(m - 1.0));
    if (d.resonant[j - 1]) {
      out << "   ** resonant **";
      warned = true;
    }
    out << "\n";
  }
  if (warned)
    out << "warning: resonant rotation moments; the perturbative "
           "predictions gated on those moments are unavailable\n";
  return 0;
}

namespace {

SweepRow sweep_point(const Config& cfg, const NormalForm& nf,
                     const ChainModel& model, double lambda) {
  SweepRow row;
  row.lambda = lambda;

  for (int j = 1; j <= 4; ++j) {
    const double dist = std::abs(moment_e2ij(nf, j) - 1.0);
    if (dist < 1e-6) row.flags.push_back("res_j" + std::to_string(j));
  }

  try {
    const auto pred = predict_exponents(nf, lambda);
    row.D = pred.D;
    row.gamma_pred = pred.gamma;
    row.sigma_pred = pred.sigma;
    row.landauer_pred = pred.landauer;
    if (!pred.sigma_valid) row.flags.push_back("D_nonpositive");
  } catch (const std::exception&) {
    row.D = row.gamma_pred = row.sigma_pred = row.landauer_pred = kNan;
    row.flags.push_back("predictor_failed");
  }

  const auto want = [&](const char* name) {
    for (const auto& e : cfg.output.estimators)
      if (e == name) return true;
    return false;
  };

  if (want("lyapunov")) {
    try {
      row.gamma_mc = estimate_lyapunov(model, cfg.run);
    } catch (const std::exception&) {
      row.gamma_mc.value = kNan;
      row.flags.push_back("lyapunov_failed");
    }
  } else {
    row.gamma_mc.value = kNan;
  }

  if (want("variance")) {
    try {
      row.sigma_mc = estimate_variance(model, cfg.run);
      if (row.sigma_mc.flagged) row.flags.push_back("variance_flagged");
    } catch (const std::exception&) {
      row.sigma_mc.value = kNan;
      row.flags.push_back("variance_failed");
    }
  } else {
    row.sigma_mc.value = kNan;
  }

  if (want("landauer")) {
    const long n_land = 200;
    try {
      row.landauer_mc = estimate_landauer_mc(
          model, n_land, std::max<long>(cfg.run.ensemble * 16, 1024),
          cfg.run.seed ^ 0x4c414e44ULL, cfg.run.threads,
          std::isfinite(row.landauer_pred) ? row.landauer_pred : 0.0);
    } catch (const std::exception&) {
      row.landauer_mc.value = kNan;
      row.flags.push_back("landauer_mc_failed");
    }
    try {
      row.landauer_exact = landauer_exponent_exact(nf, lambda).gammahat;
    } catch (const std::exception&) {
      row.landauer_exact = kNan;
      row.flags.push_back("landauer_exact_failed");
    }
  } else {
    row.landauer_mc.value = kNan;
    row.landauer_exact = kNan;
  }
  return row;
}

bool row_fit_eligible(const SweepRow& row) {
  for (const auto& f : row.flags) {
    if (f == "res_j1" || f == "res_j2" || f == "predictor_failed" ||
        f == "lyapunov_failed" || f == "variance_failed")
      return false;
  }
  return row.gamma_mc.se > 0.0 && row.sigma_mc.se > 0.0;
}

}  // namespace

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "lambda,gamma_mc,gamma_mc_se,sigma_mc,sigma_mc_se,landauer_mc,"
      "landauer_mc_se,gamma_pred,sigma_pred,landauer_pred,landauer_exact,D,"
      "flags\n";
  for (const auto& r : rows) {
    out += format_g17(r.lambda) + ',' + format_g17(r.gamma_mc.value) + ',' +
           format_g17(r.gamma_mc.se) + ',' + format_g17(r.sigma_mc.value) +
           ',' + format_g17(r.sigma_mc.se) + ',' +
           format_g17(r.landauer_mc.value) + ',' +
           format_g17(r.landauer_mc.se) + ',' + format_g17(r.gamma_pred) +
           ',' + format_g17(r.sigma_pred) + ',' +
           format_g17(r.landauer_pred) + ',' + format_g17(r.landauer_exact) +
           ',' + format_g17(r.D) + ',' + join_flags(r.flags) + '\n';
  }
  return out;
}

std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
  std::vector<SweepRow> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 12) throw std::runtime_error("sweep csv: short row");
    SweepRow r;
    r.lambda = std::strtod(cells[0].c_str(), nullptr);
    r.gamma_mc.value = std::strtod(cells[1].c_str(), nullptr);
    r.gamma_mc.se = std::strtod(cells[2].c_str(), nullptr);
    r.sigma_mc.value = std::strtod(cells[3].c_str(), nullptr);
    r.sigma_mc.se = std::strtod(cells[4].c_str(), nullptr);
    r.landauer_mc.value = std::strtod(cells[5].c_str(), nullptr);
    r.landauer_mc.se = std::strtod(cells[6].c_str(), nullptr);
    r.gamma_pred = std::strtod(cells[7].c_str(), nullptr);
    r.sigma_pred = std::strtod(cells[8].c_str(), nullptr);
    r.landauer_pred = std::strtod(cells[9].c_str(), nullptr);
    r.landauer_exact = std::strtod(cells[10].c_str(), nullptr);
    r.D = std::strtod(cells[11].c_str(), nullptr);
    if (cells.size() > 12 && !cells[12].empty()) {
      std::istringstream fs(cells[12]);
      std::string f;
      while (std::getline(fs, f, ';')) r.flags.push_back(f);
    }
    rows.push_back(r);
  }
  return rows;
}

SweepResult run_sweep(const Config& cfg, const std::string& config_digest,
                      const std::string& out_dir, std::ostream& out) {
  const CriticalFamily family = config_family(cfg);
  const CriticalDiagnostics diag = verify_critical(family);
  if (!diag.pass) throw std::runtime_error("sweep: " + diag.failure);
  const NormalForm nf = extract_normal_form(family);

  const bool anderson = std::holds_alternative<AndersonSpec>(cfg.model);
  AndersonModel amodel;
  if (anderson) amodel = anderson_family(std::get<AndersonSpec>(cfg.model));

  SweepResult result;
  for (double lambda : cfg.sweep.lambdas) {
    const ChainModel model = anderson ? make_chain_model(amodel, lambda)
                                      : make_chain_model(nf, lambda);
    SweepRow row = sweep_point(cfg, nf, model, lambda);
    if (!row.flags.empty()) {
      for (const auto& f : row.flags)
        if (f.find("failed") != std::string::npos)
          result.any_estimator_failed = true;
    }
    out << "lambda = " << format_g17(lambda)
        << "  gamma_mc = " << format_g17(row.gamma_mc.value)
        << "  sigma_mc = " << format_g17(row.sigma_mc.value)
        << "  gammahat_exact = " << format_g17(row.landauer_exact) << "\n";
    result.rows.push_back(std::move(row));
  }

  // weighted fits over the resonance-clear rows
  std::vector<double> xs, yg, sg, ys, ss, yd, sd;
  for (const auto& r : result.rows) {
    if (!row_fit_eligible(r)) continue;
    xs.push_back(r.lambda);
    yg.push_back(r.gamma_mc.value);
    sg.push_back(r.gamma_mc.se);
    ys.push_back(r.sigma_mc.value);
    ss.push_back(r.sigma_mc.se);
    yd.push_back(r.gamma_mc.value - r.sigma_mc.value);
    sd.push_back(std::hypot(r.gamma_mc.se, r.sigma_mc.se));
  }
  if (xs.size() >= 3) {
    result.gamma_fit = fit_powers(xs, yg, sg, {2, 4});
    result.sigma_fit = fit_powers(xs, ys, ss, {2, 4});
    result.sps_fit = fit_powers(xs, yd, sd, {4});
    result.fits_valid = true;
    out << "fit gamma  = (" << format_g17(result.gamma_fit.coeffs[0])
        << " +- " << format_g17(result.gamma_fit.stderrs[0])
        << ") l^2 + (" << format_g17(result.gamma_fit.coeffs[1]) << " +- "
        << format_g17(result.gamma_fit.stderrs[1]) << ") l^4\n";
    out << "fit sigma  = (" << format_g17(result.sigma_fit.coeffs[0])
        << " +- " << format_g17(result.sigma_fit.stderrs[0])
        << ") l^2 + (" << format_g17(result.sigma_fit.coeffs[1]) << " +- "
        << format_g17(result.sigma_fit.stderrs[1]) << ") l^4\n";
    out << "fit gamma - sigma = (" << format_g17(result.sps_fit.coeffs[0])
        << " +- " << format_g17(result.sps_fit.stderrs[0]) << ") l^4\n";
  }

  // artifacts
  const std::string csv = sweep_csv(result.rows);
  const std::string csv_name =
      cfg.output.csv_path.empty() ? "sweep.csv" : cfg.output.csv_path;
  write_file(resolve(out_dir, csv_name), csv);

  nlohmann::json jr;
  jr["config_digest"] = config_digest;
  jr["seed"] = cfg.run.seed;
  jr["rows"] = nlohmann::json::array();
  for (const auto& r : result.rows) {
    nlohmann::json row;
    row["lambda"] = r.lambda;
    row["gamma_mc"] = r.gamma_mc.value;
    row["gamma_mc_se"] = r.gamma_mc.se;
    row["sigma_mc"] = r.sigma_mc.value;
    row["sigma_mc_se"] = r.sigma_mc.se;
    row["landauer_mc"] = r.landauer_mc.value;
    row["landauer_mc_se"] = r.landauer_mc.se;
    row["gamma_pred"] = r.gamma_pred;
    row["sigma_pred"] = r.sigma_pred;
    row["landauer_pred"] = r.landauer_pred;
    row["landauer_exact"] = r.landauer_exact;
    row["D"] = r.D;
    row["flags"] = r.flags;
    jr["rows"].push_back(row);
  }
  if (result.fits_valid) {
    jr["fits"]["gamma"] = {{"coeffs", result.gamma_fit.coeffs},
                           {"stderrs", result.gamma_fit.stderrs},
                           {"powers", {2, 4}}};
    jr["fits"]["sigma"] = {{"coeffs", result.sigma_fit.coeffs},
                           {"stderrs", result.sigma_fit.stderrs},
                           {"powers", {2, 4}}};
    jr["fits"]["gamma_minus_sigma"] = {{"coeffs", result.sps_fit.coeffs},
                                       {"stderrs", result.sps_fit.stderrs},
                                       {"powers", {4}}};
  }
  const std::string json_name =
      cfg.output.json_path.empty() ? "sweep.json" : cfg.output.json_path;
  write_file(resolve(out_dir, json_name), jr.dump(2) + "\n");
  return result;
}

PhasesResult run_phases(const Config& cfg, const std::string& config_digest,
                        const std::string& out_dir, std::ostream& out) {
  const CriticalFamily family = config_family(cfg);
  const CriticalDiagnostics diag = verify_critical(family);
  if (!diag.pass) throw std::runtime_error("phases: " + diag.failure);
  const NormalForm nf = extract_normal_form(family);

  const bool anderson = std::holds_alternative<AndersonSpec>(cfg.model);
  AndersonModel amodel;
  if (anderson) amodel = anderson_family(std::get<AndersonSpec>(cfg.model));

  PhasesResult result;
  const int bins = cfg.output.histogram_bins;
  std::string hist_csv = "lambda,bin,theta_lo,theta_hi,count,density\n";

  for (double lambda : cfg.sweep.lambdas) {
    const ChainModel model = anderson ? make_chain_model(amodel, lambda)
                                      : make_chain_model(nf, lambda);

    // histogram over [0, 2pi)
    std::vector<long long> counts(std::size_t(bins), 0);
    const long window = cfg.run.steps - cfg.run.burn_in;
    for (long c = 0; c < cfg.run.ensemble; ++c) {
      const PhaseOrbit orbit = phase_orbit(model, cfg.run, std::uint64_t(c));
      for (long n = cfg.run.burn_in + 1; n <= cfg.run.steps; ++n) {
        int b = int(orbit[std::size_t(n)] / kTwoPi * bins);
        if (b >= bins) b = bins - 1;
        ++counts[std::size_t(b)];
      }
    }
    const double total = double(window) * double(cfg.run.ensemble);
    for (int b = 0; b < bins; ++b) {
      const double lo = kTwoPi * b / bins, hi = kTwoPi * (b + 1) / bins;
      hist_csv += format_g17(lambda) + ',' + std::to_string(b) + ',' +
                  format_g17(lo) + ',' + format_g17(hi) + ',' +
                  std::to_string(counts[std::size_t(b)]) + ',' +
                  format_g17(double(counts[std::size_t(b)]) / total * bins /
                             kTwoPi) +
                  '\n';
    }
    if (lambda == 0.0 && total >= 5.0 * bins) {
      const double p = chi2_flat_pvalue(counts);
      result.flat_test_pvalues.push_back(p);
      out << "lambda = 0 flat-histogram chi2 p = " << format_g17(p) << "\n";
    }

    // moment table
    for (int j = 1; j <= 4; ++j) {
      PhaseMomentRow row;
      row.lambda = lambda;
      row.j = j;
      try {
        row.measured = estimate_phase_moment(model, j, cfg.run);
      } catch (const std::exception&) {
        result.any_estimator_failed = true;
        continue;
      }
      try {
        const auto pred = predict_phase_moment(nf, lambda, j);
        row.predicted = pred.value;
        row.prediction_order = pred.error_order;
      } catch (const std::exception&) {
        row.predicted = 0.0;
        row.prediction_order = 1;
      }
      const double l = std::abs(lambda);
      switch (row.prediction_order) {
        case 3: row.slack = 5.0 * l * l * l; break;
        case 2: row.slack = 2.0 * l * l; break;
        default: row.slack = 0.6 * l; break;
      }
      const double dev = std::abs(row.measured.value - row.predicted);
      const double se3 = 3.0 * std::hypot(row.measured.se_re,
                                          row.measured.se_im);
      row.pass = dev <= se3 + row.slack;
      out << "lambda = " << format_g17(lambda) << "  I_" << j << " = "
          << format_g17(std::abs(row.measured.value)) << "  pred "
          << format_g17(std::abs(row.predicted)) << "  "
          << (row.pass ? "PASS" : "FAIL") << "\n";
      result.moments.push_back(row);
    }
  }

  write_file(resolve(out_dir, "phases_hist.csv"), hist_csv);

  std::string mom_csv =
      "lambda,j,I_re,I_im,I_se_re,I_se_im,pred_re,pred_im,slack,pass\n";
  for (const auto& r : result.moments) {
    mom_csv += format_g17(r.lambda) + ',' + std::to_string(r.j) + ',' +
               format_g17(r.measured.value.real()) + ',' +
               format_g17(r.measured.value.imag()) + ',' +
               format_g17(r.measured.se_re) + ',' +
               format_g17(r.measured.se_im) + ',' +
               format_g17(r.predicted.real()) + ',' +
               format_g17(r.predicted.imag()) + ',' + format_g17(r.slack) +
               ',' + (r.pass ? "1" : "0") + '\n';
  }
  write_file(resolve(out_dir, "phases_moments.csv"), mom_csv);

  if (!cfg.output.json_path.empty()) {
    nlohmann::json jr;
    jr["config_digest"] = config_digest;
    jr["seed"] = cfg.run.seed;
    jr["moments"] = nlohmann::json::array();
    for (const auto& r : result.moments) {
      jr["moments"].push_back({{"lambda", r.lambda},
                               {"j", r.j},
                               {"I_re", r.measured.value.real()},
                               {"I_im", r.measured.value.imag()},
                               {"pred_re", r.predicted.real()},
                               {"pred_im", r.predicted.imag()},
                               {"slack", r.slack},
                               {"pass", r.pass}});
    }
    write_file(resolve(out_dir, cfg.output.json_path), jr.dump(2) + "\n");
  }
  return result;
}

}  // namespace spslab
