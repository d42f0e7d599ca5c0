// spslab command-line driver: validate | sweep | phases <config.json>

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "spslab/cli.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transfer-matrix criticality laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = 0;
  long long seed_override = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "JSON config file")->required();
    cmd->add_option("--out-dir", out_dir, "directory for output artifacts");
    cmd->add_option("--threads", threads, "override run.threads");
    cmd->add_option("--seed-override", seed_override, "override run.seed");
  };

  CLI::App* validate = app.add_subcommand(
      "validate", "check the critical-point conditions and moment table");
  add_common(validate);
  CLI::App* sweep = app.add_subcommand(
      "sweep", "lambda sweep: Monte Carlo vs predictions vs exact adjoint");
  add_common(sweep);
  CLI::App* phases = app.add_subcommand(
      "phases", "invariant-measure histogram and moment table");
  add_common(phases);

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string text = slurp(config_path);
    spslab::Config cfg = spslab::parse_config(text);
    if (threads > 0) cfg.run.threads = threads;
    if (seed_override >= 0) cfg.run.seed = std::uint64_t(seed_override);
    const std::string digest = spslab::fnv1a_hex(text);

    if (app.got_subcommand(validate)) {
      return spslab::run_validate(cfg, std::cout);
    }
    if (app.got_subcommand(sweep)) {
      const auto result = spslab::run_sweep(cfg, digest, out_dir, std::cout);
      return result.any_estimator_failed ? 2 : 0;
    }
    const auto result = spslab::run_phases(cfg, digest, out_dir, std::cout);
    return result.any_estimator_failed ? 2 : 0;
  } catch (const std::runtime_error& e) {
    // config and validation problems
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}
