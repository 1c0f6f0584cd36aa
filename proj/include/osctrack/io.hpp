#ifndef OSCTRACK__IO_HPP_
#define OSCTRACK__IO_HPP_

/**
 * @file
 * @brief CSV traces and JSON reports.
 */

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "osctrack/certify.hpp"
#include "osctrack/metrics.hpp"

namespace osctrack {

/// Shortest decimal form that round-trips a double (17 significant digits).
inline std::string format_number(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Columns: t, x_1..x_n, gamma_1..gamma_n, u_1..u_m, dist.
inline void write_trajectory_csv(std::ostream & os, const Trajectory & traj)
{
  if (traj.empty()) {
    os << "t,dist\n";
    return;
  }
  const auto n = traj.states.front().size();
  const auto m = traj.controls.front().size();
  os << 't';
  for (Eigen::Index i = 1; i <= n; ++i) { os << ",x_" << i; }
  for (Eigen::Index i = 1; i <= n; ++i) { os << ",gamma_" << i; }
  for (Eigen::Index i = 1; i <= m; ++i) { os << ",u_" << i; }
  os << ",dist\n";
  std::string line;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    line = format_number(traj.times[k]);
    for (Eigen::Index i = 0; i < n; ++i) { (line += ',') += format_number(traj.states[k][i]); }
    for (Eigen::Index i = 0; i < n; ++i) { (line += ',') += format_number(traj.reference[k][i]); }
    for (Eigen::Index i = 0; i < m; ++i) { (line += ',') += format_number(traj.controls[k][i]); }
    (line += ',') += format_number(traj.dist[k]);
    line += '\n';
    os << line;
  }
}

/// JSON number, or null for non-finite values.
inline nlohmann::json finite_or_null(double v)
{
  if (std::isfinite(v)) { return v; }
  return nullptr;
}

inline nlohmann::json to_json(const StabilityReport & r)
{
  return {
    {"rho", r.rho},
    {"entry_time", finite_or_null(r.entry_time)},
    {"steady_amplitude", r.steady_amplitude},
    {"tail_start", r.tail_start},
    {"fitted_lambda", r.fit_valid ? nlohmann::json(r.fitted_lambda) : nlohmann::json(nullptr)},
    {"fitted_C", r.fit_valid ? nlohmann::json(r.fitted_C) : nlohmann::json(nullptr)},
    {"fit_points", r.fit_points},
  };
}

inline nlohmann::json to_json(const SupBounds & b)
{
  return {{"M1", b.M1}, {"M2", b.M2}, {"M3", b.M3}, {"L", b.L}, {"mu", b.mu}, {"provenance", b.provenance}};
}

inline nlohmann::json to_json(const CertificateInputs & in)
{
  return {
    {"r", finite_or_null(in.r)},
    {"rho", in.rho},
    {"rho_prime", in.rho_prime},
    {"delta", in.delta},
    {"delta_prime", in.delta_prime},
    {"mu", in.mu},
    {"nu", in.nu},
    {"M1", in.M1},
    {"M2", in.M2},
    {"M3", in.M3},
    {"L", in.L},
    {"lambda", in.lambda},
    {"provenance", in.provenance},
  };
}

inline nlohmann::json to_json(const Certificate & c)
{
  return {
    {"certified", c.certified},
    {"failure", c.failure},
    {"provenance", c.provenance},
    {"C1", c.C1},
    {"C2", c.C2},
    {"sigma", c.sigma},
    {"d", c.d},
    {"eps1", finite_or_null(c.eps1)},
    {"eps2", finite_or_null(c.eps2)},
    {"eps3", finite_or_null(c.eps3)},
    {"eps_hat", c.eps_hat},
    {"lambda", c.lambda},
    {"lambda1", c.lambda1},
    {"iterations", c.iterations},
  };
}

}  // namespace osctrack

#endif  // OSCTRACK__IO_HPP_
