#ifndef OSCTRACK__CURVES_HPP_
#define OSCTRACK__CURVES_HPP_

/**
 * @file
 * @brief Reference curves with analytic derivatives and sampled velocity bounds.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "osctrack/expression.hpp"
#include "osctrack/systems.hpp"

namespace osctrack {

/// Number of samples used when estimating the velocity bound of a curve.
inline constexpr std::size_t kVelocityBoundSamples = 100000;

/// Multiplicative margin applied to the sampled velocity bound.
inline constexpr double kVelocityBoundMargin = 1.01;

struct ReferenceCurve
{
  using CurveFn = std::function<Vector(double)>;

  std::string name;
  std::size_t dim{0};
  CurveFn eval;
  CurveFn deriv;
  CurveFn accel;  ///< optional second derivative, used to build admissible headings
  double nu{0};       ///< declared bound on |d gamma / dt| over [0, horizon]
  double horizon{0};  ///< time span on which nu was established

  Vector operator()(double t) const { return eval(t); }

  Vector acceleration(double t) const
  {
    if (accel) { return accel(t); }
    const double h = 1e-5 * std::max(1.0, std::abs(t));
    return (deriv(t + h) - deriv(t - h)) / (2 * h);
  }
};

/// Largest |deriv(t)| on `samples` evenly spaced points of [0, horizon].
inline double sampled_speed_bound(
  const ReferenceCurve::CurveFn & deriv, double horizon, std::size_t samples = kVelocityBoundSamples)
{
  double best = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = samples > 1 ? horizon * static_cast<double>(k) / static_cast<double>(samples - 1) : 0.0;
    best           = std::max(best, deriv(t).norm());
  }
  return best;
}

/// Curve whose nu is the sampled speed bound inflated by 1%.
inline ReferenceCurve make_curve(std::string name,
  std::size_t dim,
  ReferenceCurve::CurveFn eval,
  ReferenceCurve::CurveFn deriv,
  double horizon,
  ReferenceCurve::CurveFn accel = {})
{
  if (!(horizon >= 0)) { throw ValidationError("curve horizon must be non-negative"); }
  ReferenceCurve c{std::move(name), dim, std::move(eval), std::move(deriv), std::move(accel), 0.0, horizon};
  c.nu = kVelocityBoundMargin * sampled_speed_bound(c.deriv, horizon);
  return c;
}

inline ReferenceCurve constant_curve(const Vector & point, double horizon = 40)
{
  const auto n = point.size();
  ReferenceCurve c{"constant",
    static_cast<std::size_t>(n),
    [point](double) { return point; },
    [n](double) { return Vector(Vector::Zero(n)); },
    [n](double) { return Vector(Vector::Zero(n)); },
    0.0,
    horizon};
  return c;
}

/// \f$ (2\cos(t/2)\cos t,\ 2\cos(t/2)\sin t,\ \cos(t/10)) \f$.
inline ReferenceCurve curve_gamma1(double horizon = 40)
{
  auto eval = [](double t) {
    Vector g(3);
    g << 2 * std::cos(t / 2) * std::cos(t), 2 * std::cos(t / 2) * std::sin(t), std::cos(t / 10);
    return g;
  };
  auto deriv = [](double t) {
    const double ch = std::cos(t / 2), sh = std::sin(t / 2), c = std::cos(t), s = std::sin(t);
    Vector g(3);
    g << -sh * c - 2 * ch * s, -sh * s + 2 * ch * c, -std::sin(t / 10) / 10;
    return g;
  };
  auto accel = [](double t) {
    const double ch = std::cos(t / 2), sh = std::sin(t / 2), c = std::cos(t), s = std::sin(t);
    Vector g(3);
    g << 2 * sh * s - 2.5 * ch * c, -2.5 * ch * s - 2 * sh * c, -std::cos(t / 10) / 100;
    return g;
  };
  return make_curve("gamma1", 3, eval, deriv, horizon, accel);
}

/// \f$ (3 - e^{1-t},\ e^{-t^2},\ 0) \f$; its velocity vanishes as t grows.
inline ReferenceCurve curve_gamma2(double horizon = 40)
{
  auto eval = [](double t) {
    Vector g(3);
    g << 3 - std::exp(1 - t), std::exp(-t * t), 0.0;
    return g;
  };
  auto deriv = [](double t) {
    Vector g(3);
    g << std::exp(1 - t), -2 * t * std::exp(-t * t), 0.0;
    return g;
  };
  auto accel = [](double t) {
    Vector g(3);
    g << -std::exp(1 - t), (4 * t * t - 2) * std::exp(-t * t), 0.0;
    return g;
  };
  return make_curve("gamma2", 3, eval, deriv, horizon, accel);
}

/// Heading rate of a planar motion: (x' y'' - y' x'') / (x'^2 + y'^2).
///
/// The denominator uses velocities; a position-based denominator does not yield a heading that the
/// unicycle can follow.
inline double planar_heading_rate(const Vector & vel, const Vector & acc, double * denominator = nullptr)
{
  const double den = vel[0] * vel[0] + vel[1] * vel[1];
  if (denominator) { *denominator = den; }
  return (vel[0] * acc[1] - vel[1] * acc[0]) / den;
}

namespace detail {

/// Heading samples on a uniform grid with cubic Hermite interpolation.
struct HeadingTable
{
  double step{0};
  std::vector<double> theta;
  std::vector<double> rate;

  double operator()(double t) const
  {
    if (t < 0 || t > step * static_cast<double>(theta.size() - 1) * (1 + 1e-12)) {
      throw UsageError("admissible curve evaluated outside its integration horizon (t = "
                       + std::to_string(t) + ")");
    }
    const double s = t / step;
    auto k         = static_cast<std::size_t>(std::floor(s));
    if (k + 1 >= theta.size()) { k = theta.size() - 2; }
    const double u = s - static_cast<double>(k);
    const double h00 = 2 * u * u * u - 3 * u * u + 1, h10 = u * u * u - 2 * u * u + u;
    const double h01 = -2 * u * u * u + 3 * u * u, h11 = u * u * u - u * u;
    return h00 * theta[k] + h10 * step * rate[k] + h01 * theta[k + 1] + h11 * step * rate[k + 1];
  }
};

}  // namespace detail

/**
 * @brief Unicycle-admissible curve sharing the planar motion of `base`.
 *
 * Position components follow `base`; the heading integrates the planar heading rate with classical
 * fourth-order steps of size `step`, starting from `heading0`.
 */
inline ReferenceCurve curve_gamma3_admissible(
  const ReferenceCurve & base, double heading0, double horizon, double step = 1e-4)
{
  if (base.dim < 2) { throw StructuralError("admissible curve needs a planar base"); }
  if (!(step > 0) || !(horizon > 0)) { throw ValidationError("step and horizon must be positive"); }

  auto rate_at = [&base](double t) {
    double den      = 0;
    const double om = planar_heading_rate(base.deriv(t), base.acceleration(t), &den);
    if (!(den >= 1e-8)) {
      throw DegenerateCurveError("planar speed vanishes near t = " + std::to_string(t));
    }
    return om;
  };

  const auto steps = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  auto table       = std::make_shared<detail::HeadingTable>();
  table->step      = step;
  table->theta.resize(steps + 1);
  table->rate.resize(steps + 1);
  double theta = heading0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t   = step * static_cast<double>(k);
    const double k1  = rate_at(t);
    table->theta[k]  = theta;
    table->rate[k]   = k1;
    if (k == steps) { break; }
    const double k2 = rate_at(t + step / 2);
    const double k4 = rate_at(t + step);
    // the rate does not depend on theta, so k3 == k2
    theta += step / 6 * (k1 + 4 * k2 + k4);
  }

  const ReferenceCurve b = base;
  auto eval = [b, table](double t) {
    const Vector p = b.eval(t);
    Vector g(3);
    g << p[0], p[1], (*table)(t);
    return g;
  };
  auto deriv = [b](double t) {
    const Vector v = b.deriv(t);
    Vector g(3);
    g << v[0], v[1], planar_heading_rate(v, b.acceleration(t));
    return g;
  };
  return make_curve("gamma3", 3, eval, deriv, horizon);
}

/// Admissible companion of gamma1, headed along its initial velocity.
inline ReferenceCurve curve_gamma3(double horizon = 40)
{
  const auto base = curve_gamma1(horizon);
  const Vector v0 = base.deriv(0.0);
  return curve_gamma3_admissible(base, std::atan2(v0[1], v0[0]), horizon);
}

/// \f$ (\cos(t/4),\ t/4,\ \sin(t/4),\ 0,\ 0,\ 0) \f$, unbounded in the second component.
inline ReferenceCurve curve_gamma4_underwater(double horizon = 40)
{
  auto eval = [](double t) {
    Vector g = Vector::Zero(6);
    g[0]     = std::cos(t / 4);
    g[1]     = t / 4;
    g[2]     = std::sin(t / 4);
    return g;
  };
  auto deriv = [](double t) {
    Vector g = Vector::Zero(6);
    g[0]     = -std::sin(t / 4) / 4;
    g[1]     = 0.25;
    g[2]     = std::cos(t / 4) / 4;
    return g;
  };
  auto accel = [](double t) {
    Vector g = Vector::Zero(6);
    g[0]     = -std::cos(t / 4) / 16;
    g[2]     = -std::sin(t / 4) / 16;
    return g;
  };
  return make_curve("gamma4_underwater", 6, eval, deriv, horizon, accel);
}

/// \f$ (5\sin(t/4),\ 5\sin(t/4)\cos(t/4),\ 0,\ 0) \f$.
inline ReferenceCurve curve_gamma4_car(double horizon = 60)
{
  auto eval = [](double t) {
    Vector g = Vector::Zero(4);
    g[0]     = 5 * std::sin(t / 4);
    g[1]     = 5 * std::sin(t / 4) * std::cos(t / 4);
    return g;
  };
  auto deriv = [](double t) {
    Vector g = Vector::Zero(4);
    g[0]     = 1.25 * std::cos(t / 4);
    g[1]     = 1.25 * std::cos(t / 2);
    return g;
  };
  auto accel = [](double t) {
    Vector g = Vector::Zero(4);
    g[0]     = -0.3125 * std::sin(t / 4);
    g[1]     = -0.625 * std::sin(t / 2);
    return g;
  };
  return make_curve("gamma4_car", 4, eval, deriv, horizon, accel);
}

/**
 * @brief Curve from closed-form component expressions in `t`.
 */
inline ReferenceCurve curve_from_expressions(const std::vector<std::string> & components, double horizon = 40)
{
  if (components.empty()) { throw UsageError("expression curve needs at least one component"); }
  std::vector<Expression> exprs;
  exprs.reserve(components.size());
  for (const auto & c : components) { exprs.push_back(Expression::parse(c)); }
  const auto n = static_cast<Eigen::Index>(exprs.size());
  auto eval    = [exprs, n](double t) {
    Vector g(n);
    for (Eigen::Index i = 0; i < n; ++i) { g[i] = exprs[static_cast<std::size_t>(i)](t); }
    return g;
  };
  auto deriv = [exprs, n](double t) {
    Vector g(n);
    for (Eigen::Index i = 0; i < n; ++i) { g[i] = exprs[static_cast<std::size_t>(i)].evaluate(t).d; }
    return g;
  };
  return make_curve("expr", static_cast<std::size_t>(n), eval, deriv, horizon);
}

inline const std::vector<std::string> & curve_names()
{
  static const std::vector<std::string> names{"gamma1", "gamma2", "gamma3", "gamma4_underwater", "gamma4_car"};
  return names;
}

/// Registry lookup; gamma3 is integrated one time unit past `horizon`.
inline ReferenceCurve curve_by_name(const std::string & name, double horizon)
{
  if (name == "gamma1") { return curve_gamma1(horizon); }
  if (name == "gamma2") { return curve_gamma2(horizon); }
  if (name == "gamma3") {
    auto c    = curve_gamma3(horizon + 1);
    c.horizon = horizon + 1;
    return c;
  }
  if (name == "gamma4_underwater") { return curve_gamma4_underwater(horizon); }
  if (name == "gamma4_car") { return curve_gamma4_car(horizon); }
  throw UsageError("unknown curve '" + name + "'");
}

/**
 * @brief Registry name, or component expressions separated by ';' (optionally prefixed "expr:").
 */
inline ReferenceCurve parse_curve(const std::string & spec, double horizon)
{
  const auto & names = curve_names();
  if (std::find(names.begin(), names.end(), spec) != names.end()) { return curve_by_name(spec, horizon); }
  std::string body = spec.rfind("expr:", 0) == 0 ? spec.substr(5) : spec;
  if (body.find(';') == std::string::npos && spec.rfind("expr:", 0) != 0) {
    throw UsageError("unknown curve '" + spec + "'");
  }
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto end = body.find(';', start);
    parts.push_back(body.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) { break; }
    start = end + 1;
  }
  return curve_from_expressions(parts, horizon);
}

}  // namespace osctrack

#endif  // OSCTRACK__CURVES_HPP_
