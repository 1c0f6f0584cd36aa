#ifndef OSCTRACK__APP_HPP_
#define OSCTRACK__APP_HPP_

/**
 * @file
 * @brief Run configuration and the run / certify / sweep commands behind the command-line tool.
 */

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "osctrack/certify.hpp"
#include "osctrack/io.hpp"
#include "osctrack/metrics.hpp"
#include "osctrack/scenarios.hpp"

namespace osctrack {

inline constexpr const char * kVersion = "0.3.0";

/// Environment variable naming the default output directory.
inline constexpr const char * kOutputDirEnv = "OSCTRACK_OUTPUT_DIR";

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitSimulation = 2, kExitCertification = 3 };

struct RunConfig
{
  std::string scenario{"unicycle"};
  std::string curve;  ///< registry name or ';'-separated expressions; empty selects the scenario default
  std::optional<double> alpha;
  std::optional<double> epsilon;
  std::optional<std::vector<double>> x0;
  std::optional<double> horizon;
  std::size_t substeps{0};  ///< 0 selects the default rule
  std::optional<double> rho;
  std::uint64_t seed{1};
  std::string output_dir;

  // certify
  std::optional<double> rho_prime;
  std::optional<double> delta;
  std::optional<double> delta_prime;
  std::optional<double> lambda;
  std::string bounds{"auto"};  ///< auto | analytic | empirical
  std::size_t bound_samples{10000};

  // sweep
  std::vector<double> alphas;
  std::vector<double> epsilons;
};

inline std::vector<double> parse_number_list(const std::string & text)
{
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) { continue; }
    std::size_t used = 0;
    double v         = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception &) {
      throw UsageError("not a number: '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) { throw UsageError("not a number: '" + item + "'"); }
    out.push_back(v);
  }
  return out;
}

inline RunConfig config_from_json(const nlohmann::json & j)
{
  RunConfig c;
  auto opt = [&](const char * key, std::optional<double> & dst) {
    if (j.contains(key) && !j.at(key).is_null()) { dst = j.at(key).get<double>(); }
  };
  if (j.contains("scenario")) { c.scenario = j.at("scenario").get<std::string>(); }
  if (j.contains("curve")) { c.curve = j.at("curve").get<std::string>(); }
  opt("alpha", c.alpha);
  opt("epsilon", c.epsilon);
  opt("horizon", c.horizon);
  opt("rho", c.rho);
  opt("rho_prime", c.rho_prime);
  opt("delta", c.delta);
  opt("delta_prime", c.delta_prime);
  opt("lambda", c.lambda);
  if (j.contains("x0") && !j.at("x0").is_null()) { c.x0 = j.at("x0").get<std::vector<double>>(); }
  if (j.contains("substeps")) { c.substeps = j.at("substeps").get<std::size_t>(); }
  if (j.contains("seed")) { c.seed = j.at("seed").get<std::uint64_t>(); }
  if (j.contains("output_dir")) { c.output_dir = j.at("output_dir").get<std::string>(); }
  if (j.contains("bounds")) { c.bounds = j.at("bounds").get<std::string>(); }
  if (j.contains("bound_samples")) { c.bound_samples = j.at("bound_samples").get<std::size_t>(); }
  if (j.contains("alphas")) { c.alphas = j.at("alphas").get<std::vector<double>>(); }
  if (j.contains("epsilons")) { c.epsilons = j.at("epsilons").get<std::vector<double>>(); }
  return c;
}

inline RunConfig load_config(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) { throw UsageError("cannot open config file " + path.string()); }
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception & e) {
    throw UsageError("config file " + path.string() + ": " + e.what());
  }
}

/// Scenario, curve and parameters with every default filled in.
struct ResolvedRun
{
  Scenario scenario;
  ReferenceCurve curve;
  ControllerParams params;
  Vector x0;
  SamplerGrid grid;
  double rho{0};
  std::filesystem::path output_dir;
};

inline std::filesystem::path resolve_output_dir(const RunConfig & cfg)
{
  if (!cfg.output_dir.empty()) { return cfg.output_dir; }
  if (const char * env = std::getenv(kOutputDirEnv); env && *env) { return env; }
  return ".";
}

inline ResolvedRun resolve(const RunConfig & cfg)
{
  Scenario sc          = scenario_by_name(cfg.scenario);
  ControllerParams p   = sc.default_params;
  if (cfg.alpha) { p.alpha = *cfg.alpha; }
  if (cfg.epsilon) { p.epsilon = *cfg.epsilon; }
  p.validate();
  const double horizon = cfg.horizon.value_or(sc.horizon);
  if (!(horizon > 0)) { throw ValidationError("horizon must be positive"); }
  const double rho = cfg.rho.value_or(sc.rho);
  if (!(rho > 0)) { throw ValidationError("rho must be positive"); }

  ReferenceCurve curve = parse_curve(cfg.curve.empty() ? sc.default_curve : cfg.curve, horizon);
  if (curve.dim != sc.system.n()) {
    throw ValidationError("curve has dimension " + std::to_string(curve.dim) + ", scenario " + sc.name + " needs "
                          + std::to_string(sc.system.n()));
  }
  Vector x0 = sc.default_x0;
  if (cfg.x0) {
    if (cfg.x0->size() != sc.system.n()) {
      throw ValidationError("x0 has " + std::to_string(cfg.x0->size()) + " entries, expected "
                            + std::to_string(sc.system.n()));
    }
    x0 = Eigen::Map<const Vector>(cfg.x0->data(), static_cast<Eigen::Index>(cfg.x0->size()));
  }
  if (!sc.system.contains(x0)) { throw ValidationError("x0 lies outside the domain of " + sc.name); }
  SamplerGrid grid = SamplerGrid::for_scheme(sc.scheme, p.epsilon, horizon, cfg.substeps);
  grid.validate(sc.scheme);
  return ResolvedRun{std::move(sc), std::move(curve), p, x0, grid, rho, resolve_output_dir(cfg)};
}

inline nlohmann::json resolved_json(const ResolvedRun & r, const RunConfig & cfg)
{
  return {
    {"scenario", r.scenario.name},
    {"curve", cfg.curve.empty() ? r.scenario.default_curve : cfg.curve},
    {"alpha", r.params.alpha},
    {"epsilon", r.params.epsilon},
    {"x0", std::vector<double>(r.x0.data(), r.x0.data() + r.x0.size())},
    {"horizon", r.grid.horizon},
    {"substeps", r.grid.substeps},
    {"intervals", r.grid.intervals()},
    {"rho", r.rho},
    {"seed", cfg.seed},
    {"nu", r.curve.nu},
  };
}

inline nlohmann::json build_stamp()
{
  return {{"version", kVersion}, {"compiler", __VERSION__}, {"cplusplus", __cplusplus}};
}

struct RunOutcome
{
  Trajectory trajectory;
  StabilityReport report;
  std::optional<std::string> gain_warning;
  std::filesystem::path csv_path;
  std::filesystem::path report_path;
  std::filesystem::path metadata_path;
  int exit_code{kExitOk};
};

inline void write_text(const std::filesystem::path & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw UsageError("cannot write " + path.string()); }
  out << text;
}

/// Simulates one configuration without writing files.
inline RunOutcome execute(const ResolvedRun & r)
{
  RunOutcome out;
  OscillatingFeedback law(r.scenario.system, r.scenario.scheme, r.params);
  out.trajectory   = simulate(law, r.curve, r.x0, r.grid);
  out.report       = dist_to_family(out.trajectory, r.rho);
  out.gain_warning = gain_condition_warning(r.params.alpha, r.curve.nu, r.rho);
  out.exit_code    = out.trajectory.completed() ? kExitOk : kExitSimulation;
  return out;
}

/**
 * @brief `run`: trajectory CSV, stability report JSON and run metadata JSON in the output directory.
 */
inline RunOutcome run(const RunConfig & cfg)
{
  const ResolvedRun r = resolve(cfg);
  RunOutcome out      = execute(r);

  std::filesystem::create_directories(r.output_dir);
  out.csv_path      = r.output_dir / "trajectory.csv";
  out.report_path   = r.output_dir / "report.json";
  out.metadata_path = r.output_dir / "metadata.json";

  {
    std::ofstream csv(out.csv_path, std::ios::binary);
    if (!csv) { throw UsageError("cannot write " + out.csv_path.string()); }
    write_trajectory_csv(csv, out.trajectory);
  }
  nlohmann::json report = to_json(out.report);
  report["status"]      = to_string(out.trajectory.termination);
  report["partial"]     = !out.trajectory.completed();
  report["diagnostic"]  = out.trajectory.diagnostic;
  report["coefficient_evaluations"] = out.trajectory.coefficient_evaluations;
  report["gain_condition"] = out.gain_warning ? nlohmann::json(*out.gain_warning) : nlohmann::json("ok");
  write_text(out.report_path, report.dump(2) + "\n");

  nlohmann::json meta{{"config", resolved_json(r, cfg)}, {"build", build_stamp()}};
  write_text(out.metadata_path, meta.dump(2) + "\n");
  return out;
}

struct CertifyOutcome
{
  CertificateInputs inputs;
  Certificate certificate;
  std::filesystem::path path;
  int exit_code{kExitOk};
};

/// Certificate inputs from the config: radii default to rho' = (nu/alpha + rho)/2, delta = 2 rho,
/// delta' = 3 rho and lambda = (alpha - nu/rho')/2.
inline CertificateInputs certificate_inputs(const ResolvedRun & r, const RunConfig & cfg)
{
  const double alpha     = r.params.alpha;
  const double nu        = r.curve.nu;
  const double rho       = r.rho;
  const double rho_prime = cfg.rho_prime.value_or(0.5 * (nu / alpha + rho));
  const double delta     = cfg.delta.value_or(2 * rho);
  const double delta_p   = cfg.delta_prime.value_or(3 * rho);
  const double lambda    = cfg.lambda.value_or(0.5 * (alpha - nu / rho_prime));

  SupBounds bounds;
  const auto analytic = analytic_bounds(r.scenario.name);
  if (cfg.bounds == "analytic") {
    if (!analytic) { throw UsageError("no analytic bounds for scenario " + r.scenario.name); }
    bounds = *analytic;
  } else if (cfg.bounds == "auto" && analytic) {
    bounds = *analytic;
  } else if (cfg.bounds == "auto" || cfg.bounds == "empirical") {
    bounds = estimate_sup_bounds(r.scenario.system, r.scenario.scheme, r.curve, delta_p, r.grid.horizon,
      cfg.bound_samples, cfg.seed);
  } else {
    throw UsageError("bounds must be auto, analytic or empirical");
  }
  return CertificateInputs::from_bounds(bounds, nu, rho_prime, rho, delta, delta_p, lambda);
}

/**
 * @brief `certify`: writes certificate.json; exit code 3 if no threshold could be certified.
 */
inline CertifyOutcome certify(const RunConfig & cfg)
{
  const ResolvedRun r = resolve(cfg);
  CertifyOutcome out;
  try {
    out.inputs      = certificate_inputs(r, cfg);
    out.certificate = bound_constants(r.scenario.system, r.scenario.scheme, r.params, out.inputs);
  } catch (const CertificationError & e) {
    out.certificate.certified = false;
    out.certificate.failure   = e.what();
  }
  out.exit_code = out.certificate.certified ? kExitOk : kExitCertification;

  std::filesystem::create_directories(r.output_dir);
  out.path = r.output_dir / "certificate.json";
  nlohmann::json j{{"certificate", to_json(out.certificate)},
    {"inputs", to_json(out.inputs)},
    {"config", resolved_json(r, cfg)},
    {"build", build_stamp()}};
  write_text(out.path, j.dump(2) + "\n");
  return out;
}

struct SweepRow
{
  double alpha{0};
  double epsilon{0};
  std::string status;
  double steady_amplitude{0};
  double entry_time{0};
  double fitted_lambda{0};
  bool alpha_condition_ok{true};
  std::string message;
};

/// Runs every configuration of the (alpha, epsilon) grid concurrently; failures are recorded per row.
inline std::vector<SweepRow> sweep_rows(const RunConfig & cfg)
{
  if (cfg.alphas.empty() && cfg.epsilons.empty()) { throw UsageError("sweep: empty parameter grid"); }
  const ResolvedRun base = resolve(cfg);
  const std::vector<double> alphas   = cfg.alphas.empty() ? std::vector<double>{base.params.alpha} : cfg.alphas;
  const std::vector<double> epsilons = cfg.epsilons.empty() ? std::vector<double>{base.params.epsilon} : cfg.epsilons;

  std::vector<SweepRow> rows;
  for (double a : alphas) {
    for (double e : epsilons) {
      SweepRow row;
      row.alpha   = a;
      row.epsilon = e;
      rows.push_back(row);
    }
  }

  auto work = [&base](SweepRow & row) {
    try {
      ResolvedRun r      = base;
      r.params.alpha     = row.alpha;
      r.params.epsilon   = row.epsilon;
      r.params.validate();
      r.grid             = SamplerGrid::for_scheme(r.scenario.scheme, row.epsilon, base.grid.horizon);
      RunOutcome o       = execute(r);
      row.status         = to_string(o.trajectory.termination);
      row.steady_amplitude = o.report.steady_amplitude;
      row.entry_time     = o.report.entry_time;
      row.fitted_lambda  = o.report.fitted_lambda;
      row.alpha_condition_ok = !o.gain_warning.has_value();
      row.message        = o.trajectory.diagnostic;
    } catch (const std::exception & ex) {
      row.status  = "error";
      row.message = ex.what();
      row.alpha_condition_ok = !gain_condition_warning(row.alpha, base.curve.nu, base.rho).has_value();
    }
  };

  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::size_t next          = 0;
  while (next < rows.size()) {
    std::vector<std::future<void>> batch;
    for (std::size_t w = 0; w < workers && next < rows.size(); ++w, ++next) {
      batch.push_back(std::async(std::launch::async, work, std::ref(rows[next])));
    }
    for (auto & f : batch) { f.get(); }
  }
  return rows;
}

inline void write_sweep_csv(std::ostream & os, const std::vector<SweepRow> & rows)
{
  os << "alpha,epsilon,status,steady_amplitude,entry_time,fitted_lambda,alpha_condition,message\n";
  for (const auto & r : rows) {
    std::string msg = r.message;
    std::replace(msg.begin(), msg.end(), '"', '\'');
    os << format_number(r.alpha) << ',' << format_number(r.epsilon) << ',' << r.status << ','
       << format_number(r.steady_amplitude) << ',' << format_number(r.entry_time) << ','
       << format_number(r.fitted_lambda) << ',' << (r.alpha_condition_ok ? "ok" : "violated") << ",\"" << msg
       << "\"\n";
  }
}

struct SweepOutcome
{
  std::vector<SweepRow> rows;
  std::filesystem::path path;
  int exit_code{kExitOk};
};

/// `sweep`: writes sweep.csv with one row per (alpha, epsilon).
inline SweepOutcome sweep(const RunConfig & cfg)
{
  SweepOutcome out;
  out.rows            = sweep_rows(cfg);
  const auto out_dir  = resolve_output_dir(cfg);
  std::filesystem::create_directories(out_dir);
  out.path = out_dir / "sweep.csv";
  std::ofstream csv(out.path, std::ios::binary);
  if (!csv) { throw UsageError("cannot write " + out.path.string()); }
  write_sweep_csv(csv, out.rows);
  return out;
}

}  // namespace osctrack

#endif  // OSCTRACK__APP_HPP_
