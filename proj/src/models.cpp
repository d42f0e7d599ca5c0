#include "spslab/models.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace spslab {

namespace {

constexpr double kPi = 3.14159265358979323846;

Mat2r anderson_t0(double energy) { return {-energy, -1.0, 1.0, 0.0}; }

std::vector<DisorderPoint> disorder_points(const AndersonSpec& spec) {
  std::vector<DisorderPoint> pts;
  switch (spec.disorder) {
    case AndersonSpec::Disorder::two_point:
      pts = {{-spec.a, 0.5}, {spec.a, 0.5}};
      break;
    case AndersonSpec::Disorder::uniform: {
      const int n = spec.quadrature_nodes;
      if (n < 2) throw std::invalid_argument("anderson: need >= 2 nodes");
      if (spec.discretization == AndersonSpec::Discretization::gauss_legendre) {
        std::vector<double> x, w;
        gauss_legendre(n, x, w);
        for (int i = 0; i < n; ++i) pts.push_back({spec.a * x[i], 0.5 * w[i]});
      } else {
        // midpoints of n equal bins, equal weights
        for (int i = 0; i < n; ++i) {
          const double x = -1.0 + (2.0 * i + 1.0) / double(n);
          pts.push_back({spec.a * x, 1.0 / double(n)});
        }
      }
      break;
    }
    case AndersonSpec::Disorder::values:
      pts = spec.values;
      break;
  }
  return pts;
}

}  // namespace

void gauss_legendre(int n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton iteration from the Chebyshev-based initial guess
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[n - 1 - i] = weights[i];
  }
}

AndersonModel anderson_family(const AndersonSpec& spec) {
  if (!(std::abs(spec.energy) < 2.0))
    throw std::invalid_argument("anderson: |E| must be < 2");
  if (spec.disorder != AndersonSpec::Disorder::values && !(spec.a > 0.0))
    throw std::invalid_argument("anderson: disorder amplitude must be > 0");

  const auto pts = disorder_points(spec);
  double wsum = 0.0, m1 = 0.0;
  for (const auto& p : pts) {
    if (!(p.weight > 0.0))
      throw std::invalid_argument("anderson: disorder weights must be > 0");
    wsum += p.weight;
    m1 += p.weight * p.v;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw std::invalid_argument("anderson: disorder weights must sum to 1");
  if (std::abs(m1) > 1e-12)
    throw std::invalid_argument("anderson: disorder must be centered, E v = 0");

  AndersonModel model;
  model.spec = spec;
  model.k = std::acos(-0.5 * spec.energy);
  const double sk = std::sin(model.k);
  model.closed_form_M = {std::sqrt(sk), 0.0, -std::cos(model.k) / std::sqrt(sk),
                         1.0 / std::sqrt(sk)};

  switch (spec.disorder) {
    case AndersonSpec::Disorder::two_point:
      model.m2 = spec.a * spec.a;
      model.m4 = model.m2 * model.m2;
      break;
    case AndersonSpec::Disorder::uniform:
      model.m2 = spec.a * spec.a / 3.0;
      model.m4 = spec.a * spec.a * spec.a * spec.a / 5.0;
      break;
    case AndersonSpec::Disorder::values:
      for (const auto& p : pts) {
        model.m2 += p.weight * p.v * p.v;
        model.m4 += p.weight * p.v * p.v * p.v * p.v;
      }
      break;
  }

  model.expected.M = model.closed_form_M;
  for (const auto& p : pts) {
    Realization r;
    r.weight = p.weight;
    r.T0 = anderson_t0(spec.energy);
    r.T1 = Mat2r{p.v, 0.0, 0.0, 0.0};
    r.T2 = Mat2r::zero();
    model.family.realizations.push_back(r);

    NormalFormEntry e;
    e.weight = p.weight;
    e.eta = model.k;
    e.sign = 1;
    e.P = {0.0, 0.0, -p.v / sk, 0.0};
    e.Q = Mat2r::zero();
    e.beta = cplx(0.0, p.v / (2.0 * sk));
    model.expected.entries.push_back(e);
  }
  return model;
}

ChainModel make_chain_model(const AndersonModel& model, double lambda) {
  ChainModel cm = make_chain_model(model.expected, lambda);
  if (model.spec.disorder == AndersonSpec::Disorder::uniform) {
    // W(v) = R_k (1 + lambda P(v)) = W0 + v W1, exact in v
    const double sk = std::sin(model.k);
    const Mat2r rk = rotation(model.k);
    cm.continuous = true;
    cm.w0 = rk;
    cm.w1 = (-lambda / sk) * (rk * Mat2r{0.0, 0.0, 1.0, 0.0});
    cm.half_width = model.spec.a;
  }
  return cm;
}

CriticalFamily synthetic_family(const SyntheticSpec& spec) {
  if (spec.entries.empty())
    throw std::invalid_argument("synthetic: no entries");
  CriticalFamily fam;
  for (std::size_t i = 0; i < spec.entries.size(); ++i) {
    const auto& e = spec.entries[i];
    if (!is_traceless(e.P) || !is_traceless(e.Q))
      throw std::invalid_argument("synthetic: P and Q must be traceless (entry " +
                                  std::to_string(i) + ")");
    Realization r;
    r.weight = e.weight;
    const Mat2r rot = rotation(e.eta);
    r.T0 = rot;
    r.T1 = rot * e.P;
    r.T2 = rot * (2.0 * e.Q + e.P * e.P);  // second derivative of the flow
    const Mat2r p = e.P, q = e.Q;
    r.evaluator = [rot, p, q](double lam) {
      return rot * exp_sl2(lam * p + (lam * lam) * q, 1e-8);
    };
    fam.realizations.push_back(r);
  }
  validate_family(fam);
  return fam;
}

// --- JSON configuration -------------------------------------------------

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::runtime_error("config error at " + where + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) fail(where + "/" + key, "unknown key");
  }
}

double get_num(const json& obj, const std::string& where,
               const std::string& key, double fallback, bool required = false) {
  if (!obj.contains(key)) {
    if (required) fail(where + "/" + key, "missing required value");
    return fallback;
  }
  if (!obj[key].is_number()) fail(where + "/" + key, "expected a number");
  return obj[key].get<double>();
}

Mat2r get_mat2(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 ||
      !j[1].is_array() || j[1].size() != 2)
    fail(where, "expected a 2x2 matrix [[a,b],[c,d]]");
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      if (!j[r][c].is_number()) fail(where, "matrix entries must be numbers");
  return {j[0][0].get<double>(), j[0][1].get<double>(), j[1][0].get<double>(),
          j[1][1].get<double>()};
}

AndersonSpec parse_anderson(const json& jm) {
  reject_unknown(jm, "/model",
                 {"type", "energy", "disorder"});
  AndersonSpec spec;
  spec.energy = get_num(jm, "/model", "energy", 0.0, true);
  if (!(std::abs(spec.energy) < 2.0))
    fail("/model/energy", "must lie in (-2, 2)");
  if (!jm.contains("disorder") || !jm["disorder"].is_object())
    fail("/model/disorder", "missing disorder object");
  const json& jd = jm["disorder"];
  reject_unknown(jd, "/model/disorder",
                 {"type", "a", "values", "nodes", "discretization"});
  const std::string type = jd.value("type", "");
  if (type == "two_point") {
    spec.disorder = AndersonSpec::Disorder::two_point;
    spec.a = get_num(jd, "/model/disorder", "a", 1.0);
  } else if (type == "uniform") {
    spec.disorder = AndersonSpec::Disorder::uniform;
    spec.a = get_num(jd, "/model/disorder", "a", 1.0);
    spec.quadrature_nodes =
        int(get_num(jd, "/model/disorder", "nodes", 21.0));
    const std::string disc = jd.value("discretization", "gauss_legendre");
    if (disc == "gauss_legendre")
      spec.discretization = AndersonSpec::Discretization::gauss_legendre;
    else if (disc == "midpoint")
      spec.discretization = AndersonSpec::Discretization::midpoint;
    else
      fail("/model/disorder/discretization",
           "expected 'gauss_legendre' or 'midpoint'");
  } else if (type == "values") {
    spec.disorder = AndersonSpec::Disorder::values;
    if (!jd.contains("values") || !jd["values"].is_array())
      fail("/model/disorder/values", "expected an array");
    double wsum = 0.0;
    for (std::size_t i = 0; i < jd["values"].size(); ++i) {
      const json& jv = jd["values"][i];
      const std::string where =
          "/model/disorder/values/" + std::to_string(i);
      reject_unknown(jv, where, {"v", "weight"});
      DisorderPoint p;
      p.v = get_num(jv, where, "v", 0.0, true);
      p.weight = get_num(jv, where, "weight", 0.0, true);
      wsum += p.weight;
      spec.values.push_back(p);
    }
    if (std::abs(wsum - 1.0) > 1e-12)
      fail("/model/disorder/values",
           "weights sum to " + std::to_string(wsum) + ", expected 1");
  } else {
    fail("/model/disorder/type",
         "expected 'two_point', 'uniform' or 'values'");
  }
  return spec;
}

SyntheticSpec parse_synthetic(const json& jm) {
  reject_unknown(jm, "/model", {"type", "realizations"});
  if (!jm.contains("realizations") || !jm["realizations"].is_array())
    fail("/model/realizations", "expected an array");
  SyntheticSpec spec;
  double wsum = 0.0;
  for (std::size_t i = 0; i < jm["realizations"].size(); ++i) {
    const json& jr = jm["realizations"][i];
    const std::string where = "/model/realizations/" + std::to_string(i);
    reject_unknown(jr, where, {"weight", "eta", "P", "Q"});
    SyntheticEntry e;
    e.weight = get_num(jr, where, "weight", 0.0, true);
    e.eta = get_num(jr, where, "eta", 0.0, true);
    if (!jr.contains("P")) fail(where + "/P", "missing required value");
    e.P = get_mat2(jr["P"], where + "/P");
    e.Q = jr.contains("Q") ? get_mat2(jr["Q"], where + "/Q") : Mat2r::zero();
    if (!is_traceless(e.P)) fail(where + "/P", "must be traceless");
    if (!is_traceless(e.Q)) fail(where + "/Q", "must be traceless");
    wsum += e.weight;
    spec.entries.push_back(e);
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    fail("/model/realizations",
         "weights sum to " + std::to_string(wsum) + ", expected 1");
  return spec;
}

}  // namespace

Config parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config parse error: ") + e.what());
  }
  if (!root.is_object()) fail("/", "top level must be an object");
  reject_unknown(root, "", {"model", "run", "sweep", "output"});

  Config cfg;
  if (!root.contains("model") || !root["model"].is_object())
    fail("/model", "missing model object");
  const std::string type = root["model"].value("type", "");
  if (type == "anderson")
    cfg.model = parse_anderson(root["model"]);
  else if (type == "synthetic")
    cfg.model = parse_synthetic(root["model"]);
  else
    fail("/model/type", "expected 'anderson' or 'synthetic'");

  if (root.contains("run")) {
    const json& jr = root["run"];
    reject_unknown(jr, "/run",
                   {"steps", "ensemble", "burn_in", "seed", "renorm_every",
                    "theta0", "threads"});
    cfg.run.steps = long(get_num(jr, "/run", "steps", 1e6));
    cfg.run.ensemble = long(get_num(jr, "/run", "ensemble", 64));
    cfg.run.burn_in = long(get_num(jr, "/run", "burn_in", 0));
    cfg.run.seed = std::uint64_t(get_num(jr, "/run", "seed", 0));
    cfg.run.renorm_every = long(get_num(jr, "/run", "renorm_every", 16));
    cfg.run.theta0 = get_num(jr, "/run", "theta0", 0.0);
    cfg.run.threads = int(get_num(jr, "/run", "threads", 1));
  }
  try {
    cfg.run.validate();
  } catch (const std::exception& e) {
    fail("/run", e.what());
  }

  if (root.contains("sweep")) {
    const json& js = root["sweep"];
    reject_unknown(js, "/sweep",
                   {"lambdas", "min", "max", "count", "log_spaced"});
    if (js.contains("lambdas")) {
      if (!js["lambdas"].is_array()) fail("/sweep/lambdas", "expected array");
      for (const auto& v : js["lambdas"]) {
        if (!v.is_number()) fail("/sweep/lambdas", "entries must be numbers");
        cfg.sweep.lambdas.push_back(v.get<double>());
      }
    } else {
      const double lo = get_num(js, "/sweep", "min", 0.0, true);
      const double hi = get_num(js, "/sweep", "max", 0.0, true);
      const int count = int(get_num(js, "/sweep", "count", 0.0, true));
      const bool log_spaced =
          js.contains("log_spaced") && js["log_spaced"].get<bool>();
      if (count < 1) fail("/sweep/count", "must be >= 1");
      if (log_spaced && !(lo > 0.0))
        fail("/sweep/min", "log spacing needs min > 0");
      for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : double(i) / double(count - 1);
        cfg.sweep.lambdas.push_back(
            log_spaced ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo));
      }
    }
  } else {
    cfg.sweep.lambdas = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  }

  if (root.contains("output")) {
    const json& jo = root["output"];
    reject_unknown(jo, "/output",
                   {"csv", "json", "estimators", "histogram_bins"});
    cfg.output.csv_path = jo.value("csv", "");
    cfg.output.json_path = jo.value("json", "");
    if (jo.contains("estimators")) {
      if (!jo["estimators"].is_array())
        fail("/output/estimators", "expected array");
      cfg.output.estimators.clear();
      for (const auto& v : jo["estimators"]) {
        const std::string name = v.get<std::string>();
        if (name != "lyapunov" && name != "variance" && name != "landauer")
          fail("/output/estimators", "unknown estimator '" + name + "'");
        cfg.output.estimators.push_back(name);
      }
    }
    cfg.output.histogram_bins =
        int(get_num(jo, "/output", "histogram_bins", 256));
    if (cfg.output.histogram_bins < 8)
      fail("/output/histogram_bins", "must be >= 8");
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

CriticalFamily config_family(const Config& cfg) {
  if (std::holds_alternative<AndersonSpec>(cfg.model))
    return anderson_family(std::get<AndersonSpec>(cfg.model)).family;
  return synthetic_family(std::get<SyntheticSpec>(cfg.model));
}

}  // namespace spslab
