#pragma once

// Concrete family constructors: the Anderson model with analytic
// derivatives and closed-form conjugator, a synthetic family that
// instantiates the rotation normal form directly, and JSON config
// ingestion for the command-line driver.

#include <string>
#include <variant>
#include <vector>

#include "spslab/montecarlo.hpp"
#include "spslab/normal_form.hpp"

namespace spslab {

struct DisorderPoint {
  double v = 0.0;
  double weight = 0.0;
};

/// Disorder distribution of the Anderson potential; centered (E v = 0)
/// is enforced on construction.
struct AndersonSpec {
  enum class Disorder { two_point, uniform, values };
  enum class Discretization { gauss_legendre, midpoint };

  double energy = -1.0;  // must lie in (-2, 2)
  Disorder disorder = Disorder::two_point;
  double a = 1.0;  // two_point: v = +-a; uniform: v ~ U[-a, a]
  std::vector<DisorderPoint> values;
  int quadrature_nodes = 21;  // finite representation of uniform disorder
  Discretization discretization = Discretization::gauss_legendre;
};

/// Anderson family with the attached closed forms used for
/// cross-validation: M, eta = k, P_sigma = -(v/sin k)((0,0),(1,0)),
/// Q = 0 and beta = i v / (2 sin k).
struct AndersonModel {
  AndersonSpec spec;
  double k = 0.0;  // E = -2 cos k
  CriticalFamily family;
  Mat2r closed_form_M;
  NormalForm expected;  // closed-form normal form data
  double m2 = 0.0;      // E v^2 of the true distribution
  double m4 = 0.0;      // E v^4
};

AndersonModel anderson_family(const AndersonSpec& spec);

/// Per-lambda chain model; uniform disorder keeps its continuous law here
/// (the finite family above is the quadrature view used by predictors).
ChainModel make_chain_model(const AndersonModel& model, double lambda);

struct SyntheticEntry {
  double weight = 0.0;
  double eta = 0.0;
  Mat2r P;
  Mat2r Q;  // optional, zero when omitted
};

/// Family T_{lambda,sigma} = R_eta exp(lambda P + lambda^2 Q) with exact
/// derivatives; M = identity by construction.
struct SyntheticSpec {
  std::vector<SyntheticEntry> entries;
};

CriticalFamily synthetic_family(const SyntheticSpec& spec);

/// Gauss-Legendre nodes/weights on [-1, 1] (weights sum to 2).
void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights);

// --- JSON configuration -------------------------------------------------

struct SweepSpec {
  std::vector<double> lambdas;
};

struct OutputSpec {
  std::string csv_path;
  std::string json_path;
  std::vector<std::string> estimators = {"lyapunov", "variance", "landauer"};
  int histogram_bins = 256;
};

struct Config {
  std::variant<AndersonSpec, SyntheticSpec> model;
  RunConfig run;
  SweepSpec sweep;
  OutputSpec output;
};

/// Parses and fully validates a config file; unknown keys and malformed
/// values are rejected with their JSON location. Throws
/// std::runtime_error with a descriptive message.
Config load_config(const std::string& path);
Config parse_config(const std::string& json_text);

/// The family described by the config (quadrature view for uniform
/// disorder) and, when the model is Anderson, its wrapper.
CriticalFamily config_family(const Config& cfg);

}  // namespace spslab
