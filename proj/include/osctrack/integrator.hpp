#ifndef OSCTRACK__INTEGRATOR_HPP_
#define OSCTRACK__INTEGRATOR_HPP_

/**
 * @file
 * @brief Sampled (pi_epsilon) closed-loop solutions and a continuous-feedback baseline.
 *
 * On every interval \f$ [t_j, t_{j+1}) \f$, \f$ t_j = j\varepsilon \f$, the coefficients are computed
 * once from \f$ (x(t_j), \gamma(t_j)) \f$ while the trigonometric factors of the controls run with
 * absolute time. The frozen ODE is integrated with fixed classical fourth-order steps.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "osctrack/controller.hpp"
#include "osctrack/curves.hpp"

namespace osctrack {

/// Steps per period of the fastest oscillation.
inline constexpr std::size_t kStepsPerPeriod = 40;

/// Lower bound on the default number of substeps per interval.
inline constexpr std::size_t kMinSubsteps = 200;

struct SamplerGrid
{
  double epsilon{0.1};
  double horizon{1.0};
  std::size_t substeps{kMinSubsteps};

  /// Default grid: max(200, 40 * largest frequency multiplier) substeps per interval.
  static SamplerGrid for_scheme(const BracketScheme & scheme, double epsilon, double horizon, std::size_t substeps = 0)
  {
    SamplerGrid g{epsilon, horizon, substeps};
    if (substeps == 0) {
      g.substeps = std::max(kMinSubsteps, kStepsPerPeriod * std::max(1u, scheme.max_frequency()));
    }
    return g;
  }

  /// Number of sampling intervals; a trailing partial interval counts as a full one.
  std::size_t intervals() const
  {
    return static_cast<std::size_t>(std::max(0.0, std::ceil(horizon / epsilon - 1e-9)));
  }

  void validate(const BracketScheme & scheme) const
  {
    if (!(epsilon > 0)) { throw ValidationError("epsilon must be positive"); }
    if (!(horizon > 0)) { throw ValidationError("horizon must be positive"); }
    const std::size_t needed = kStepsPerPeriod * std::max(1u, scheme.max_frequency());
    if (substeps < needed) {
      throw ValidationError("substeps = " + std::to_string(substeps) + " does not resolve the fastest oscillation ("
                            + std::to_string(needed) + " required)");
    }
  }
};

enum class Termination { completed, domain_exit, rank_condition, blow_up };

inline const char * to_string(Termination t)
{
  switch (t) {
  case Termination::completed: return "completed";
  case Termination::domain_exit: return "domain_exit";
  case Termination::rank_condition: return "rank_condition";
  case Termination::blow_up: return "blow_up";
  }
  return "unknown";
}

struct Trajectory
{
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> reference;
  std::vector<Vector> controls;  ///< control applied on the interval that starts at or contains the point
  std::vector<double> dist;      ///< |x(t) - gamma(t)|

  std::vector<Vector> coefficients;  ///< one frozen coefficient vector per interval (sampled runs)
  std::size_t coefficient_evaluations{0};
  std::size_t substeps{0};
  double epsilon{0};

  Termination termination{Termination::completed};
  std::string diagnostic;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  bool completed() const { return termination == Termination::completed; }

  void push(double t, const Vector & x, const Vector & g, const Vector & u)
  {
    times.push_back(t);
    states.push_back(x);
    reference.push_back(g);
    controls.push_back(u);
    dist.push_back((x - g).norm());
  }
};

/// Throws SimulationError (or RankConditionError / DomainError) unless the run completed.
inline void ensure_completed(const Trajectory & traj)
{
  switch (traj.termination) {
  case Termination::completed: return;
  case Termination::rank_condition: throw RankConditionError(traj.diagnostic);
  case Termination::domain_exit: throw DomainError(traj.diagnostic);
  case Termination::blow_up: throw SimulationError(traj.diagnostic);
  }
}

struct SimulationHooks
{
  /// Called every time feedback coefficients are evaluated: (interval index, time, state).
  std::function<void(std::size_t, double, const Vector &)> on_coefficients;
};

namespace detail {

template<typename Rhs>
Vector rk4_step(const Rhs & rhs, double t, const Vector & x, double h)
{
  const Vector k1 = rhs(t, x);
  const Vector k2 = rhs(t + h / 2, x + (h / 2) * k1);
  const Vector k3 = rhs(t + h / 2, x + (h / 2) * k2);
  const Vector k4 = rhs(t + h, x + h * k3);
  return x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

inline void validate_inputs(
  const OscillatingFeedback & law, const ReferenceCurve & curve, const Vector & x0, const SamplerGrid & grid)
{
  grid.validate(law.scheme());
  if (curve.dim != law.system().n()) {
    throw StructuralError("curve dimension " + std::to_string(curve.dim) + " differs from system dimension "
                          + std::to_string(law.system().n()));
  }
  law.system().require_in_domain(x0);
  if (std::abs(grid.epsilon - law.params().epsilon) > 1e-15 * std::max(1.0, grid.epsilon)) {
    throw ValidationError("grid epsilon differs from controller epsilon");
  }
}

}  // namespace detail

/**
 * @brief pi_epsilon-solution from `x0`, recorded on the substep grid.
 *
 * Domain exit, a singular gain matrix or a non-finite state stop the run; the partial trajectory is
 * returned with `termination` and `diagnostic` set.
 */
inline Trajectory simulate(const OscillatingFeedback & law,
  const ReferenceCurve & curve,
  const Vector & x0,
  const SamplerGrid & grid,
  const SimulationHooks & hooks = {})
{
  detail::validate_inputs(law, curve, x0, grid);
  const auto & sys       = law.system();
  const double eps       = grid.epsilon;
  const std::size_t subs = grid.substeps;
  const std::size_t nint = grid.intervals();
  const double h         = eps / static_cast<double>(subs);
  const double t_end     = grid.horizon * (1 + 1e-12);

  Trajectory traj;
  traj.substeps = subs;
  traj.epsilon  = eps;
  const std::size_t expected = nint * subs + 1;
  traj.times.reserve(expected);
  traj.states.reserve(expected);
  traj.reference.reserve(expected);
  traj.controls.reserve(expected);
  traj.dist.reserve(expected);
  traj.coefficients.reserve(nint);

  Vector x = x0;
  for (std::size_t j = 0; j < nint; ++j) {
    const double tj    = eps * static_cast<double>(j);
    const Vector gamma = curve(tj);
    Vector a;
    try {
      a = law.coefficients(x, gamma);
    } catch (const RankConditionError & e) {
      traj.termination = Termination::rank_condition;
      traj.diagnostic  = std::string(e.what()) + " (t = " + std::to_string(tj) + ")";
      if (traj.empty()) { traj.push(tj, x, gamma, Vector::Zero(static_cast<Eigen::Index>(sys.m()))); }
      return traj;
    }
    ++traj.coefficient_evaluations;
    if (hooks.on_coefficients) { hooks.on_coefficients(j, tj, x); }
    traj.coefficients.push_back(a);

    auto rhs = [&](double t, const Vector & y) { return sys.velocity(y, law.control(t, a)); };

    if (j == 0) { traj.push(tj, x, gamma, law.control(tj, a)); }
    for (std::size_t k = 0; k < subs; ++k) {
      const double t  = eps * (static_cast<double>(j) + static_cast<double>(k) / static_cast<double>(subs));
      const double tn = eps * (static_cast<double>(j) + static_cast<double>(k + 1) / static_cast<double>(subs));
      Vector xn       = detail::rk4_step(rhs, t, x, h);
      if (!xn.allFinite()) {
        traj.termination = Termination::blow_up;
        traj.diagnostic  = "non-finite state at t = " + std::to_string(tn);
        return traj;
      }
      if (!sys.contains(xn)) {
        traj.termination = Termination::domain_exit;
        traj.diagnostic  = "state " + detail::format_state(xn) + " left the domain at t = " + std::to_string(tn);
        return traj;
      }
      x = std::move(xn);
      if (tn > t_end) { continue; }
      traj.push(tn, x, curve(tn), law.control(tn, a));
    }
  }
  return traj;
}

/**
 * @brief Continuous-feedback baseline: coefficients re-evaluated from (x(t), gamma(t)) at every
 * fourth-order stage, on the same substep grid as simulate().
 */
inline Trajectory classic_solution_simulate(const OscillatingFeedback & law,
  const ReferenceCurve & curve,
  const Vector & x0,
  const SamplerGrid & grid,
  const SimulationHooks & hooks = {})
{
  detail::validate_inputs(law, curve, x0, grid);
  const auto & sys       = law.system();
  const double eps       = grid.epsilon;
  const std::size_t subs = grid.substeps;
  const std::size_t nint = grid.intervals();
  const double h         = eps / static_cast<double>(subs);
  const double t_end     = grid.horizon * (1 + 1e-12);

  Trajectory traj;
  traj.substeps = subs;
  traj.epsilon  = eps;

  std::size_t interval = 0;
  auto feedback        = [&](double t, const Vector & y) {
    Vector a = law.coefficients(y, curve(t));
    ++traj.coefficient_evaluations;
    if (hooks.on_coefficients) { hooks.on_coefficients(interval, t, y); }
    return law.control(t, a);
  };
  auto rhs = [&](double t, const Vector & y) { return sys.velocity(y, feedback(t, y)); };

  Vector x = x0;
  try {
    traj.push(0.0, x, curve(0.0), feedback(0.0, x));
    for (std::size_t j = 0; j < nint; ++j) {
      interval = j;
      for (std::size_t k = 0; k < subs; ++k) {
        const double t  = eps * (static_cast<double>(j) + static_cast<double>(k) / static_cast<double>(subs));
        const double tn = eps * (static_cast<double>(j) + static_cast<double>(k + 1) / static_cast<double>(subs));
        Vector xn       = detail::rk4_step(rhs, t, x, h);
        if (!xn.allFinite()) {
          traj.termination = Termination::blow_up;
          traj.diagnostic  = "non-finite state at t = " + std::to_string(tn);
          return traj;
        }
        if (!sys.contains(xn)) {
          traj.termination = Termination::domain_exit;
          traj.diagnostic  = "state " + detail::format_state(xn) + " left the domain at t = " + std::to_string(tn);
          return traj;
        }
        x = std::move(xn);
        if (tn > t_end) { continue; }
        traj.push(tn, x, curve(tn), feedback(tn, x));
      }
    }
  } catch (const RankConditionError & e) {
    traj.termination = Termination::rank_condition;
    traj.diagnostic  = e.what();
  } catch (const DomainError & e) {
    traj.termination = Termination::domain_exit;
    traj.diagnostic  = e.what();
  }
  return traj;
}

/**
 * @brief The one-interval slice [t_j, t_{j+1}] of a sampled trajectory.
 */
inline Trajectory interval_slice(const Trajectory & traj, std::size_t j)
{
  if (traj.substeps == 0) { throw UsageError("interval_slice: trajectory has no substep structure"); }
  const std::size_t first = j * traj.substeps;
  const std::size_t last  = std::min(first + traj.substeps, traj.size() - 1);
  if (first >= traj.size() || last <= first) { throw UsageError("interval_slice: interval out of range"); }
  Trajectory out;
  out.substeps = traj.substeps;
  out.epsilon  = traj.epsilon;
  for (std::size_t k = first; k <= last; ++k) {
    out.push(traj.times[k], traj.states[k], traj.reference[k], traj.controls[k]);
  }
  if (j < traj.coefficients.size()) { out.coefficients.push_back(traj.coefficients[j]); }
  return out;
}

}  // namespace osctrack

#endif  // OSCTRACK__INTEGRATOR_HPP_
