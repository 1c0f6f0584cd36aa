#ifndef OSCTRACK__CONTROLLER_HPP_
#define OSCTRACK__CONTROLLER_HPP_

/**
 * @file
 * @brief Oscillating feedback built from the bracket-generating matrix.
 *
 * The coefficient vector solves \f$ F(x) a = -\alpha (x - \gamma) \f$. Each bracket coefficient
 * drives a pair of sinusoids of amplitude \f$ \sqrt{4\pi\kappa|a|/\varepsilon} \f$ whose second-order
 * average moves the state along the bracket direction; second-degree columns use cube-root
 * amplitudes.
 */

#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "osctrack/systems.hpp"

namespace osctrack {

struct ControllerParams
{
  double alpha{1.0};    ///< gain, 1/time
  double epsilon{0.1};  ///< sampling period

  void validate() const
  {
    if (!(alpha > 0) || !std::isfinite(alpha)) { throw ValidationError("alpha must be positive"); }
    if (!(epsilon > 0) || !std::isfinite(epsilon)) {
      throw ValidationError("epsilon must be positive");
    }
  }
};

/// Returns a message when `alpha <= nu / rho`, the regime where tube convergence is not guaranteed.
inline std::optional<std::string> gain_condition_warning(double alpha, double nu, double rho)
{
  if (rho > 0 && !(alpha > nu / rho)) {
    return "alpha = " + std::to_string(alpha) + " does not exceed nu/rho = " + std::to_string(nu / rho);
  }
  return std::nullopt;
}

/// sign with sign(0) = 0.
inline double sign0(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

/**
 * @brief Coefficients \f$ a = -\alpha F^{-1}(x)(x - \gamma) \f$ via an LU solve.
 */
inline Vector coefficients(
  const GainColumns & columns, const ControllerParams & params, const Vector & x, const Vector & gamma)
{
  if (gamma.size() != x.size()) { throw StructuralError("coefficients: gamma dimension mismatch"); }
  const Matrix F = columns(x);
  return F.partialPivLu().solve(-params.alpha * (x - gamma));
}

inline Vector coefficients(const ControlSystem & sys,
  const BracketScheme & scheme,
  const ControllerParams & params,
  const Vector & x,
  const Vector & gamma)
{
  return coefficients(GainColumns(sys, scheme), params, x, gamma);
}

/**
 * @brief Degree-one controls: constant part on s1 channels plus one sinusoid pair per bracket.
 *
 * `t` is absolute time; `coeffs` are the values frozen at the start of the sampling interval.
 */
inline Vector control_degree1(
  const BracketScheme & scheme, const ControllerParams & params, double t, const Vector & coeffs, std::size_t m)
{
  if (static_cast<std::size_t>(coeffs.size()) != scheme.size()) {
    throw StructuralError("control: coefficient vector length differs from scheme size");
  }
  Vector u = Vector::Zero(static_cast<Eigen::Index>(m));
  Eigen::Index k = 0;
  for (auto j : scheme.s1) { u[static_cast<Eigen::Index>(j)] += coeffs[k++]; }

  const double eps = params.epsilon;
  for (const auto & p : scheme.s2) {
    const double a = coeffs[k++];
    if (a == 0.0) { continue; }
    const double amp   = std::sqrt(4 * std::numbers::pi * p.kappa * std::abs(a) / eps);
    const double phase = 2 * std::numbers::pi * p.kappa * t / eps;
    u[static_cast<Eigen::Index>(p.first)] += amp * std::cos(phase);
    u[static_cast<Eigen::Index>(p.second)] += sign0(a) * amp * std::sin(phase);
  }
  return u;
}

/**
 * @brief Full controls for schemes with \f$ [[f_{j_1}, f_{j_2}], f_{j_1}] \f$ columns.
 *
 * Adds, per triple, \f$ c \cos(2\pi k_1 t/\varepsilon)(1 + \sin(2\pi k_2 t/\varepsilon)) \f$ on
 * channel j1 and \f$ c \sin(2\pi k_2 t/\varepsilon) \f$ on channel j2, where
 * \f$ c = \sqrt[3]{16\pi^2(k_2^2 - k_1^2) a / \varepsilon^2} \f$ (real cube root).
 */
inline Vector control_degree2(
  const BracketScheme & scheme, const ControllerParams & params, double t, const Vector & coeffs, std::size_t m)
{
  Vector u = control_degree1(scheme, params, t, coeffs, m);
  const double eps = params.epsilon;
  auto k           = static_cast<Eigen::Index>(scheme.s1.size() + scheme.s2.size());
  for (const auto & tr : scheme.degree2) {
    if (tr.indices[2] != tr.indices[0]) {
      throw UnsupportedSchemeError("only [[f_j1, f_j2], f_j1] second-degree columns are supported");
    }
    const double a = coeffs[k++];
    if (a == 0.0) { continue; }
    const double k1 = tr.k1, k2 = tr.k2;
    const double amp =
      std::cbrt(16 * std::numbers::pi * std::numbers::pi * (k2 * k2 - k1 * k1) * a / (eps * eps));
    const double w1 = 2 * std::numbers::pi * k1 * t / eps;
    const double w2 = 2 * std::numbers::pi * k2 * t / eps;
    u[static_cast<Eigen::Index>(tr.outer())] += amp * std::cos(w1) * (1 + std::sin(w2));
    u[static_cast<Eigen::Index>(tr.inner())] += amp * std::sin(w2);
  }
  return u;
}

/**
 * @brief Feedback law bound to a system, scheme and parameters.
 */
class OscillatingFeedback
{
public:
  OscillatingFeedback(const ControlSystem & sys, const BracketScheme & scheme, ControllerParams params)
      : columns_(sys, scheme), params_(params)
  {
    params_.validate();
  }

  const ControlSystem & system() const { return columns_.system(); }
  const BracketScheme & scheme() const { return columns_.scheme(); }
  const GainColumns & columns() const { return columns_; }
  const ControllerParams & params() const { return params_; }

  Vector coefficients(const Vector & x, const Vector & gamma) const
  {
    return osctrack::coefficients(columns_, params_, x, gamma);
  }

  Vector control(double t, const Vector & coeffs) const
  {
    if (scheme().has_degree2()) { return control_degree2(scheme(), params_, t, coeffs, system().m()); }
    return control_degree1(scheme(), params_, t, coeffs, system().m());
  }

private:
  GainColumns columns_;
  ControllerParams params_;
};

}  // namespace osctrack

#endif  // OSCTRACK__CONTROLLER_HPP_
