#ifndef OSCTRACK__METRICS_HPP_
#define OSCTRACK__METRICS_HPP_

/**
 * @file
 * @brief Stability measurements for the family of balls \f$ B_\rho(\gamma(t)) \f$.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "osctrack/integrator.hpp"

namespace osctrack {

/// Fraction of the horizon, counted from the end, used for steady-state measurements.
inline constexpr double kTailFraction = 0.25;

/// Distance from a point at distance `d` from the center to a closed ball of radius `rho`.
inline double tube_distance(double d, double rho) { return std::max(0.0, d - rho); }

struct ExponentialFit
{
  double C{0};
  double lambda{0};
  std::size_t points{0};
  bool valid{false};
};

/**
 * @brief Least-squares fit of \f$ y = C e^{-\lambda t} \f$ on \f$ \log y \f$; non-positive y are skipped.
 */
inline ExponentialFit fit_exponential(std::span<const double> t, std::span<const double> y)
{
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < std::min(t.size(), y.size()); ++i) {
    if (!(y[i] > 0)) { continue; }
    const double ly = std::log(y[i]);
    st += t[i];
    sy += ly;
    stt += t[i] * t[i];
    sty += t[i] * ly;
    ++n;
  }
  ExponentialFit fit;
  fit.points = n;
  if (n < 2) { return fit; }
  const double nn  = static_cast<double>(n);
  const double den = nn * stt - st * st;
  if (!(std::abs(den) > 0)) { return fit; }
  const double slope     = (nn * sty - st * sy) / den;
  const double intercept = (sy - slope * st) / nn;
  fit.lambda             = -slope;
  fit.C                  = std::exp(intercept);
  fit.valid              = true;
  return fit;
}

struct StabilityReport
{
  double rho{0};
  double entry_time{std::numeric_limits<double>::infinity()};  ///< first t after which the tube is never left
  double steady_amplitude{0};  ///< sup |x - gamma| over the tail window
  double tail_start{0};
  double fitted_lambda{0};
  double fitted_C{0};
  std::size_t fit_points{0};
  bool fit_valid{false};
  std::vector<double> tube_distance;  ///< max(0, |x - gamma| - rho) per recorded point
};

/**
 * @brief Tube distance trace, entry time, tail amplitude and exponential decay fit.
 *
 * The fit uses sample instants (every `substeps`-th point) before the entry time with positive tube
 * distance.
 */
inline StabilityReport dist_to_family(const Trajectory & traj, double rho, double tail_fraction = kTailFraction)
{
  if (traj.empty()) { throw UsageError("dist_to_family: empty trajectory"); }
  if (!(rho > 0)) { throw ValidationError("rho must be positive"); }
  StabilityReport r;
  r.rho = rho;
  const std::size_t n = traj.size();
  r.tube_distance.resize(n);
  for (std::size_t i = 0; i < n; ++i) { r.tube_distance[i] = tube_distance(traj.dist[i], rho); }

  // last point outside the slightly inflated tube
  const double limit = rho * (1 + 1e-9);
  std::size_t first_inside = 0;
  for (std::size_t i = n; i-- > 0;) {
    if (traj.dist[i] > limit) {
      first_inside = i + 1;
      break;
    }
  }
  r.entry_time = first_inside < n ? traj.times[first_inside] : std::numeric_limits<double>::infinity();

  const double t0 = traj.times.front(), t1 = traj.times.back();
  r.tail_start    = t1 - tail_fraction * (t1 - t0);
  for (std::size_t i = 0; i < n; ++i) {
    if (traj.times[i] >= r.tail_start) { r.steady_amplitude = std::max(r.steady_amplitude, traj.dist[i]); }
  }

  const std::size_t stride = std::max<std::size_t>(1, traj.substeps);
  std::vector<double> ft, fy;
  for (std::size_t i = 0; i < n; i += stride) {
    if (traj.times[i] >= r.entry_time) { break; }
    if (r.tube_distance[i] > 0) {
      ft.push_back(traj.times[i]);
      fy.push_back(r.tube_distance[i]);
    }
  }
  const auto fit = fit_exponential(ft, fy);
  r.fit_valid    = fit.valid;
  r.fit_points   = fit.points;
  r.fitted_lambda = fit.valid ? fit.lambda : 0.0;
  r.fitted_C      = fit.valid ? fit.C : 0.0;
  return r;
}

struct GapReport
{
  double tail_nonadmissible{0};
  double tail_admissible{0};
  double ratio{1};
};

/**
 * @brief Ratio of tail amplitudes, non-admissible over admissible reference.
 */
inline GapReport admissible_vs_nonadmissible_gap(const Trajectory & traj_admissible, const Trajectory & traj_nonadmissible)
{
  if (traj_admissible.empty() || traj_nonadmissible.empty()) { throw UsageError("gap: empty trajectory"); }
  const double h1 = traj_admissible.times.back(), h2 = traj_nonadmissible.times.back();
  if (std::abs(h1 - h2) > 1e-9 * std::max(1.0, std::abs(h1))
      || std::abs(traj_admissible.times.front() - traj_nonadmissible.times.front()) > 1e-12) {
    throw UsageError("gap: trajectories cover different horizons");
  }
  auto tail = [](const Trajectory & tr) {
    const double t0 = tr.times.front(), t1 = tr.times.back();
    const double ts = t1 - kTailFraction * (t1 - t0);
    double amp      = 0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      if (tr.times[i] >= ts) { amp = std::max(amp, tr.dist[i]); }
    }
    return amp;
  };
  GapReport g;
  g.tail_admissible    = tail(traj_admissible);
  g.tail_nonadmissible = tail(traj_nonadmissible);
  if (g.tail_admissible == g.tail_nonadmissible) {
    g.ratio = 1.0;
  } else {
    g.ratio = g.tail_admissible > 0 ? g.tail_nonadmissible / g.tail_admissible : std::numeric_limits<double>::infinity();
  }
  return g;
}

}  // namespace osctrack

#endif  // OSCTRACK__METRICS_HPP_
