// osctrack: run, certify and sweep oscillating-feedback tracking simulations.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "osctrack/app.hpp"

namespace {

struct Cli
{
  std::string config_path;
  std::string scenario, curve, x0, output_dir, bounds, alphas, epsilons;
  double alpha{0}, epsilon{0}, horizon{0}, rho{0};
  double rho_prime{0}, delta{0}, delta_prime{0}, lambda{0};
  std::size_t substeps{0}, bound_samples{0};
  std::uint64_t seed{0};
};

void add_common(CLI::App * cmd, Cli & c)
{
  cmd->add_option("--config", c.config_path, "JSON config file; flags override its values");
  cmd->add_option("--scenario", c.scenario, "unicycle | underwater | car");
  cmd->add_option("--curve", c.curve, "curve name, or ';'-separated component expressions in t");
  cmd->add_option("--alpha", c.alpha, "feedback gain");
  cmd->add_option("--epsilon", c.epsilon, "sampling period");
  cmd->add_option("--x0", c.x0, "initial state, comma separated");
  cmd->add_option("--horizon", c.horizon, "final time");
  cmd->add_option("--rho", c.rho, "tube radius for reports");
  cmd->add_option("--substeps", c.substeps, "RK4 steps per sampling interval");
  cmd->add_option("--seed", c.seed, "seed for randomized sampling");
  cmd->add_option("-o,--output-dir", c.output_dir, std::string("output directory (default $") + osctrack::kOutputDirEnv + " or .)");
}

osctrack::RunConfig make_config(const CLI::App * cmd, const Cli & c)
{
  osctrack::RunConfig cfg = c.config_path.empty() ? osctrack::RunConfig{} : osctrack::load_config(c.config_path);
  auto given              = [cmd](const char * name) { return cmd->count(name) > 0; };
  if (given("--scenario")) { cfg.scenario = c.scenario; }
  if (given("--curve")) { cfg.curve = c.curve; }
  if (given("--alpha")) { cfg.alpha = c.alpha; }
  if (given("--epsilon")) { cfg.epsilon = c.epsilon; }
  if (given("--x0")) { cfg.x0 = osctrack::parse_number_list(c.x0); }
  if (given("--horizon")) { cfg.horizon = c.horizon; }
  if (given("--rho")) { cfg.rho = c.rho; }
  if (given("--substeps")) { cfg.substeps = c.substeps; }
  if (given("--seed")) { cfg.seed = c.seed; }
  if (given("--output-dir")) { cfg.output_dir = c.output_dir; }
  if (cmd->get_option_no_throw("--rho-prime") && given("--rho-prime")) { cfg.rho_prime = c.rho_prime; }
  if (cmd->get_option_no_throw("--delta") && given("--delta")) { cfg.delta = c.delta; }
  if (cmd->get_option_no_throw("--delta-prime") && given("--delta-prime")) { cfg.delta_prime = c.delta_prime; }
  if (cmd->get_option_no_throw("--lambda") && given("--lambda")) { cfg.lambda = c.lambda; }
  if (cmd->get_option_no_throw("--bounds") && given("--bounds")) { cfg.bounds = c.bounds; }
  if (cmd->get_option_no_throw("--bound-samples") && given("--bound-samples")) { cfg.bound_samples = c.bound_samples; }
  if (cmd->get_option_no_throw("--alphas") && given("--alphas")) { cfg.alphas = osctrack::parse_number_list(c.alphas); }
  if (cmd->get_option_no_throw("--epsilons") && given("--epsilons")) {
    cfg.epsilons = osctrack::parse_number_list(c.epsilons);
  }
  return cfg;
}

int exit_code_for(const osctrack::Error & e)
{
  if (dynamic_cast<const osctrack::SimulationError *>(&e)) { return osctrack::kExitSimulation; }
  if (dynamic_cast<const osctrack::CertificationError *>(&e)) { return osctrack::kExitCertification; }
  return osctrack::kExitValidation;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Oscillating-feedback tracking for driftless control-affine systems"};
  app.require_subcommand(1);
  Cli c;

  auto * run = app.add_subcommand("run", "simulate one configuration; writes trajectory.csv, report.json, metadata.json");
  add_common(run, c);

  auto * cert = app.add_subcommand("certify", "compute the sampling-period certificate; writes certificate.json");
  add_common(cert, c);
  cert->add_option("--rho-prime", c.rho_prime, "inner radius rho'");
  cert->add_option("--delta", c.delta, "radius delta");
  cert->add_option("--delta-prime", c.delta_prime, "radius delta'");
  cert->add_option("--lambda", c.lambda, "target decay rate");
  cert->add_option("--bounds", c.bounds, "auto | analytic | empirical");
  cert->add_option("--bound-samples", c.bound_samples, "tube samples for empirical bounds");

  auto * sw = app.add_subcommand("sweep", "run an (alpha, epsilon) grid concurrently; writes sweep.csv");
  add_common(sw, c);
  sw->add_option("--alphas", c.alphas, "comma-separated gains");
  sw->add_option("--epsilons", c.epsilons, "comma-separated sampling periods");

  auto * ls = app.add_subcommand("list-scenarios", "print available scenarios");
  auto * lc = app.add_subcommand("list-curves", "print named reference curves");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : osctrack::kExitValidation;
  }

  try {
    if (ls->parsed()) {
      for (const auto & name : osctrack::scenario_names()) {
        const auto sc = osctrack::scenario_by_name(name);
        std::cout << name << "  n=" << sc.system.n() << " m=" << sc.system.m() << " curve=" << sc.default_curve
                  << " alpha=" << sc.default_params.alpha << " epsilon=" << sc.default_params.epsilon << '\n';
      }
      return 0;
    }
    if (lc->parsed()) {
      for (const auto & name : osctrack::curve_names()) {
        std::cout << name << "  dim=" << osctrack::curve_by_name(name, 1.0).dim << '\n';
      }
      return 0;
    }
    if (run->parsed()) {
      const auto out = osctrack::run(make_config(run, c));
      std::cout << "status " << osctrack::to_string(out.trajectory.termination) << '\n'
                << "steady_amplitude " << osctrack::format_number(out.report.steady_amplitude) << '\n'
                << "entry_time " << osctrack::format_number(out.report.entry_time) << '\n'
                << "wrote " << out.csv_path.string() << '\n';
      if (out.gain_warning) { std::cerr << "warning: " << *out.gain_warning << '\n'; }
      if (out.exit_code != osctrack::kExitOk) {
        std::cerr << "error: " << out.trajectory.diagnostic << " (partial output written)\n";
      }
      return out.exit_code;
    }
    if (cert->parsed()) {
      const auto out = osctrack::certify(make_config(cert, c));
      if (out.certificate.certified) {
        std::cout << "eps_hat " << osctrack::format_number(out.certificate.eps_hat) << '\n';
      } else {
        std::cerr << "certification failed: " << out.certificate.failure << '\n';
      }
      std::cout << "wrote " << out.path.string() << '\n';
      return out.exit_code;
    }
    if (sw->parsed()) {
      const auto out = osctrack::sweep(make_config(sw, c));
      std::cout << "wrote " << out.path.string() << " (" << out.rows.size() << " runs)\n";
      return out.exit_code;
    }
  } catch (const osctrack::Error & e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return osctrack::kExitValidation;
  }
  return 0;
}
