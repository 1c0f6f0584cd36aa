#ifndef OSCTRACK__CERTIFY_HPP_
#define OSCTRACK__CERTIFY_HPP_

/**
 * @file
 * @brief Quantitative bounds behind the exponential tube convergence.
 *
 * Given tube radii \f$ \nu/\alpha < \rho' < \rho < \delta < \delta' < r \f$, sup bounds of the fields
 * and their Lie derivatives on the \f$ \delta' \f$-tube, and a target rate \f$ \lambda \f$, this
 * module computes the control-magnitude constants \f$ C_1, C_2 \f$, the remainder constant
 * \f$ \sigma \f$ and the sampling thresholds \f$ \varepsilon_{1,2,3} \f$. It also checks the growth
 * bound and the Volterra remainder bound on simulated intervals.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "osctrack/controller.hpp"
#include "osctrack/curves.hpp"
#include "osctrack/integrator.hpp"

namespace osctrack {

/// Inflation applied to sampled sup bounds.
inline constexpr double kSupBoundInflation = 1.1;

/// Floor for Lipschitz constants of (locally) constant fields.
inline constexpr double kLipschitzFloor = 1e-12;

struct SupBounds
{
  double M1{0};  ///< sup |f_i|
  double M2{0};  ///< sup |L_{f_j} f_i|
  double M3{0};  ///< (1/6) sup sum |L_{f_k} L_{f_j} f_i|
  double L{kLipschitzFloor};
  double mu{0};  ///< sup |F^{-1}|
  std::string provenance{"empirical"};
};

/// Closed-form bounds where the scenario admits them (currently the unicycle).
inline std::optional<SupBounds> analytic_bounds(const std::string & scenario)
{
  if (scenario == "unicycle") { return SupBounds{1.0, 1.0, 1.0 / 6.0, 1.0, 1.0, "analytic"}; }
  return std::nullopt;
}

/// Uniform samples of the tube \f$ \bigcup_t B_{radius}(\gamma(t)) \f$, t uniform in [0, horizon].
inline std::vector<Vector> sample_tube(
  const ReferenceCurve & curve, double radius, double horizon, std::size_t count, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  const auto n = static_cast<Eigen::Index>(curve.dim);
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    // half the points on an even time grid, half at random times
    const double t = (k % 2 == 0 && count > 1)
                     ? horizon * static_cast<double>(k) / static_cast<double>(count - 1)
                     : horizon * uniform(rng);
    Vector dir(n);
    for (Eigen::Index i = 0; i < n; ++i) { dir[i] = normal(rng); }
    const double norm = dir.norm();
    if (norm == 0.0) { dir = Vector::Unit(n, 0); } else { dir /= norm; }
    const double rad = radius * std::pow(uniform(rng), 1.0 / static_cast<double>(n));
    out.push_back(curve(t) + rad * dir);
  }
  return out;
}

/// Uniform samples of the box [lo, hi], plus its corners when the dimension is small.
inline std::vector<Vector> sample_box(const Vector & lo, const Vector & hi, std::size_t count, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform;
  const auto n = lo.size();
  std::vector<Vector> out;
  out.reserve(count + (std::size_t{1} << std::min<Eigen::Index>(n, 8)));
  for (std::size_t k = 0; k < count; ++k) {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) { x[i] = lo[i] + (hi[i] - lo[i]) * uniform(rng); }
    out.push_back(x);
  }
  if (n <= 8) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      Vector x(n);
      for (Eigen::Index i = 0; i < n; ++i) { x[i] = (mask >> i) & 1u ? hi[i] : lo[i]; }
      out.push_back(x);
    }
  }
  return out;
}

/**
 * @brief Sampled sup bounds of the fields and their Lie derivatives, inflated by 10%.
 *
 * Second Lie derivatives use a central difference of \f$ Df_i f_j \f$ along \f$ f_k \f$. `mu` is left
 * at zero. L is floored at 1e-12 so that constant fields keep the growth bound finite.
 */
inline SupBounds estimate_field_bounds(const ControlSystem & sys, const std::vector<Vector> & samples)
{
  if (samples.empty()) { throw UsageError("estimate_sup_bounds: empty sample set"); }
  const std::size_t m = sys.m();
  double M1 = 0, M2 = 0, M3 = 0, L = 0;
  std::vector<Vector> f(m);
  std::vector<Matrix> J(m);
  for (const auto & x : samples) {
    if (!sys.contains(x)) {
      throw CertificationError("tube sample " + detail::format_state(x) + " lies outside the domain");
    }
    for (std::size_t i = 0; i < m; ++i) {
      f[i] = sys.field(i)(x);
      J[i] = sys.field(i).jacobian(x);
      M1   = std::max(M1, f[i].norm());
      Eigen::JacobiSVD<Matrix> js(J[i]);
      L = std::max(L, js.singularValues().maxCoeff());
    }
    double third = 0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        // L_{f_j} f_i = Df_i f_j
        M2 = std::max(M2, (J[i] * f[j]).norm());
        const auto & fi = sys.field(i);
        const auto & fj = sys.field(j);
        auto lie        = [&](const Vector & y) -> Vector { return fi.jacobian(y) * fj(y); };
        for (std::size_t k = 0; k < m; ++k) {
          const double vn = f[k].norm();
          if (vn == 0.0) { continue; }
          const double h = 1e-5 * std::max(1.0, x.norm()) / vn;
          third += ((lie(x + h * f[k]) - lie(x - h * f[k])) / (2 * h)).norm();
        }
      }
    }
    M3 = std::max(M3, third / 6);
  }
  SupBounds b;
  b.M1         = kSupBoundInflation * M1;
  b.M2         = kSupBoundInflation * M2;
  b.M3         = kSupBoundInflation * M3;
  b.L          = std::max(kLipschitzFloor, kSupBoundInflation * L);
  b.mu         = 0;
  b.provenance = "empirical";
  return b;
}

/**
 * @brief Field bounds plus \f$ \mu = \sup |F^{-1}| \f$ on a set of states.
 *
 * Throws CertificationError if a sample is outside the domain or F is singular there.
 */
inline SupBounds estimate_sup_bounds(
  const ControlSystem & sys, const BracketScheme & scheme, const std::vector<Vector> & samples)
{
  SupBounds b = estimate_field_bounds(sys, samples);
  GainColumns cols(sys, scheme);
  double mu = 0;
  for (const auto & x : samples) {
    const Matrix F = cols.evaluate(x);
    if (GainColumns::is_singular(F)) {
      throw CertificationError("gain matrix singular in tube at " + detail::format_state(x));
    }
    Eigen::JacobiSVD<Matrix> svd(F);
    mu = std::max(mu, 1.0 / svd.singularValues().minCoeff());
  }
  b.mu = kSupBoundInflation * mu;
  return b;
}

/// Sup bounds on 10^4 samples of the delta'-tube around `curve` over [0, horizon].
inline SupBounds estimate_sup_bounds(const ControlSystem & sys,
  const BracketScheme & scheme,
  const ReferenceCurve & curve,
  double delta_prime,
  double horizon,
  std::size_t count  = 10000,
  std::uint64_t seed = 1)
{
  return estimate_sup_bounds(sys, scheme, sample_tube(curve, delta_prime, horizon, count, seed));
}

struct CertificateInputs
{
  double r{std::numeric_limits<double>::infinity()};
  double rho{0};
  double rho_prime{0};
  double delta{0};
  double delta_prime{0};
  double mu{0};
  double nu{0};
  double M1{0};
  double M2{0};
  double M3{0};
  double L{kLipschitzFloor};
  double lambda{0};
  std::string provenance{"empirical"};

  static CertificateInputs from_bounds(const SupBounds & b, double nu, double rho_prime, double rho, double delta,
    double delta_prime, double lambda, double r = std::numeric_limits<double>::infinity())
  {
    return CertificateInputs{r, rho, rho_prime, delta, delta_prime, b.mu, nu, b.M1, b.M2, b.M3, b.L, lambda, b.provenance};
  }

  void validate(double alpha) const
  {
    if (!(nu >= 0)) { throw ValidationError("nu must be non-negative"); }
    if (!(nu / alpha < rho_prime && rho_prime < rho && rho < delta && delta < delta_prime && delta_prime < r)) {
      throw ValidationError("radii must satisfy nu/alpha < rho' < rho < delta < delta' < r");
    }
    if (!(mu > 0 && M1 > 0 && M2 >= 0 && M3 >= 0 && L > 0)) {
      throw ValidationError("sup bounds must be positive (M2, M3 may vanish)");
    }
    if (!(lambda > 0 && lambda < alpha - nu / rho_prime)) {
      throw ValidationError("lambda must lie in (0, alpha - nu/rho')");
    }
  }
};

struct Certificate
{
  double C1{0};
  double C2{0};
  double sigma{0};
  double d{0};
  double eps1{0};
  double eps2{0};
  double eps3{0};
  double eps_hat{0};
  double lambda{0};
  double lambda1{0};  ///< continuous-time rate lambda / 2
  std::size_t iterations{0};
  bool certified{false};
  std::string failure;
  std::string provenance;
};

/// Constants that do not depend on epsilon, plus sigma(epsilon) and the thresholds.
class CertificateCalculator
{
public:
  CertificateCalculator(const BracketScheme & scheme, double alpha, const CertificateInputs & in)
      : in_(in), alpha_(alpha)
  {
    if (scheme.has_degree2()) {
      throw UnsupportedSchemeError("certification covers degree-one schemes only");
    }
    in_.validate(alpha);
    in_.L = std::max(in_.L, kLipschitzFloor);

    const double am = alpha * in_.mu;
    double k23      = 0;
    for (const auto & p : scheme.s2) { k23 += std::pow(static_cast<double>(p.kappa), 2.0 / 3.0); }
    C1_ = am * std::sqrt(static_cast<double>(scheme.s1.size()));
    C2_ = 4 * std::sqrt(std::numbers::pi * in_.mu * alpha) * std::pow(k23, 0.75);

    // sum over fields j1 of (sum over pairs (j2, j1) of kappa^{-2/3})^{3/4}
    std::size_t m = 0;
    for (auto j : scheme.s1) { m = std::max(m, j + 1); }
    for (const auto & p : scheme.s2) { m = std::max({m, p.first + 1, p.second + 1}); }
    double pair_sum = 0;
    for (std::size_t j1 = 0; j1 < m; ++j1) {
      double inner = 0;
      for (const auto & p : scheme.s2) {
        if (p.second == j1) { inner += std::pow(static_cast<double>(p.kappa), -2.0 / 3.0); }
      }
      if (inner > 0) { pair_sum += std::pow(inner, 0.75); }
    }
    sigma_first_ = 2 * std::pow(am, 1.5) * std::sqrt(static_cast<double>(scheme.s1.size())) * pair_sum;

    d_ = std::min(in_.delta_prime - in_.delta, (in_.rho - in_.rho_prime) / 2);

    const double inf  = std::numeric_limits<double>::infinity();
    const double eps1a = in_.nu > 0 ? (in_.rho - in_.rho_prime) / (2 * in_.nu) : inf;
    // positive root s of C1 s^2 + C2 s = ln(dL/M1 + 1)/L, eps = s^2 / delta'
    const double ell = std::log1p(d_ * in_.L / in_.M1) / in_.L;
    const double s1  = 2 * ell / (C2_ + std::sqrt(C2_ * C2_ + 4 * C1_ * ell));
    eps1_            = std::min(eps1a, s1 * s1 / in_.delta_prime);

    // eps3 = (1/delta') (sqrt(C2^2/(4 C1^2) + 1/L) - C2/(2 C1))^2
    if (C1_ > 0) {
      const double p = C2_ / (2 * C1_);
      const double s = (1 / in_.L) / (std::sqrt(p * p + 1 / in_.L) + p);
      eps3_          = s * s / in_.delta_prime;
    } else {
      eps3_ = 0;
    }
  }

  double C1() const { return C1_; }
  double C2() const { return C2_; }
  double d() const { return d_; }
  double eps1() const { return eps1_; }
  double eps3() const { return eps3_; }

  double sigma(double eps) const
  {
    const double am = alpha_ * in_.mu;
    const double s  = std::sqrt(eps * in_.delta_prime);
    return in_.M2 * (sigma_first_ + 0.5 * s * am * am) + in_.M3 * std::pow(C2_ + C1_ * s, 3);
  }

  /// min of the two expressions that bound epsilon through the contraction requirement.
  double eps2(double sigma) const
  {
    const double rate  = in_.lambda + in_.nu / in_.rho_prime;
    const double second = 1 / rate;
    if (!(sigma > 0)) { return second; }
    const double q = (alpha_ - in_.lambda) / sigma - in_.nu / (sigma * in_.rho_prime);
    return std::min(q * q / in_.delta_prime, second);
  }

  double threshold(double eps) const { return std::min({eps1_, eps2(sigma(eps)), eps3_}); }

private:
  CertificateInputs in_;
  double alpha_;
  double C1_{0}, C2_{0}, sigma_first_{0}, d_{0}, eps1_{0}, eps3_{0};
};

/**
 * @brief Certificate for (system, scheme, alpha) under `inputs`.
 *
 * sigma grows with epsilon, so the threshold map is non-increasing in epsilon. Starting at eps1 the
 * map is iterated downward until it yields an epsilon no larger than its own threshold (at most 20
 * passes), then refined by bisection to the fixed point eps_hat = min(eps1, eps2(sigma(eps_hat)), eps3).
 * A failed search is reported in the certificate, not thrown.
 */
inline Certificate bound_constants(
  const ControlSystem & sys, const BracketScheme & scheme, const ControllerParams & params, const CertificateInputs & inputs)
{
  params.validate();
  scheme.validate(sys.n(), sys.m());
  CertificateCalculator calc(scheme, params.alpha, inputs);

  Certificate c;
  c.C1         = calc.C1();
  c.C2         = calc.C2();
  c.d          = calc.d();
  c.eps1       = calc.eps1();
  c.eps3       = calc.eps3();
  c.lambda     = inputs.lambda;
  c.lambda1    = inputs.lambda / 2;
  c.provenance = inputs.provenance;

  auto fail = [&](std::string why) {
    c.certified = false;
    c.failure   = std::move(why);
    c.sigma     = calc.sigma(std::isfinite(c.eps1) ? c.eps1 : 0.0);
    c.eps2      = calc.eps2(c.sigma);
    c.eps_hat   = 0;
    return c;
  };

  if (!(c.eps1 > 0) || !std::isfinite(c.eps1)) { return fail("eps1 is not a positive finite number"); }
  if (!(c.eps3 > 0)) { return fail("eps3 is not positive"); }

  double hi = std::numeric_limits<double>::infinity();  // smallest epsilon known to violate
  double lo = c.eps1;
  bool found = false;
  for (std::size_t it = 0; it < 20; ++it) {
    c.iterations   = it + 1;
    const double g = calc.threshold(lo);
    if (!(g > 0) || !std::isfinite(g)) { return fail("threshold map produced a non-positive value"); }
    if (g >= lo) {
      found = true;
      break;
    }
    hi = lo;
    lo = g;
  }
  if (!found) { return fail("sigma-epsilon iteration did not settle in 20 passes"); }
  if (std::isfinite(hi)) {
    for (int k = 0; k < 200 && hi - lo > 1e-14 * hi; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (calc.threshold(mid) >= mid) { lo = mid; } else { hi = mid; }
    }
  }
  c.eps_hat   = lo;
  c.sigma     = calc.sigma(lo);
  c.eps2      = calc.eps2(c.sigma);
  c.eps_hat   = std::min({c.eps1, c.eps2, c.eps3, lo});
  c.certified = true;
  return c;
}

/// \f$ C_1 |e| + C_2 \sqrt{|e| / \varepsilon} \f$, the bound on \f$ \max_t \sum_i |u_i| \f$.
inline double control_magnitude_bound(const Certificate & c, double error_norm, double epsilon)
{
  return c.C1 * error_norm + c.C2 / std::sqrt(epsilon) * std::sqrt(error_norm);
}

/// Max over a uniform grid of [t0, t0 + eps] of \f$ \sum_i |u_i(t)| \f$ with frozen coefficients.
inline double interval_control_sup(
  const OscillatingFeedback & law, const Vector & coeffs, double t0, std::size_t samples = 2000)
{
  const double eps = law.params().epsilon;
  double best      = 0;
  for (std::size_t k = 0; k <= samples; ++k) {
    const double t = t0 + eps * static_cast<double>(k) / static_cast<double>(samples);
    best           = std::max(best, law.control(t, coeffs).cwiseAbs().sum());
  }
  return best;
}

struct VolterraReport
{
  Vector residual;
  double residual_norm{0};
  double bound{0};
  double margin{0};
  double scaled{0};  ///< |R| / (eps^{3/2} |x0 - gamma0|^{3/2})
  bool holds{true};
};

/**
 * @brief Compares the simulated endpoint of one interval with the averaged step.
 *
 * \f$ R = x(\varepsilon) - x^0 + \varepsilon\alpha(x^0 - \gamma^0) \f$ is checked against
 * \f$ \sigma \varepsilon^{3/2} |x^0 - \gamma^0|^{3/2} \f$.
 */
inline VolterraReport volterra_residual(
  const Trajectory & one_interval, const Vector & gamma0, double alpha, double epsilon, double sigma)
{
  if (one_interval.size() < 2) { throw UsageError("volterra_residual: interval has fewer than two points"); }
  const Vector & x0 = one_interval.states.front();
  const Vector & xe = one_interval.states.back();
  VolterraReport r;
  const double e0  = (x0 - gamma0).norm();
  r.residual       = xe - x0 + epsilon * alpha * (x0 - gamma0);
  r.residual_norm  = r.residual.norm();
  const double den = std::pow(epsilon, 1.5) * std::pow(e0, 1.5);
  r.bound          = sigma * den;
  r.margin         = r.bound - r.residual_norm;
  r.scaled         = den > 0 ? r.residual_norm / den : 0.0;
  r.holds          = r.residual_norm <= r.bound + 1e-12;
  return r;
}

struct GrowthReport
{
  double max_violation{-std::numeric_limits<double>::infinity()};  ///< max of lhs - rhs
  double min_margin{std::numeric_limits<double>::infinity()};      ///< min of rhs - lhs
  bool holds{true};
};

/// \f$ (M/L)(e^{U L t} - 1) \f$, with the \f$ L \to 0 \f$ limit \f$ M U t \f$.
inline double growth_bound(double M, double L, double U, double t)
{
  if (L <= 0) { return M * U * t; }
  return M / L * std::expm1(U * L * t);
}

/**
 * @brief Checks \f$ |x(t) - x(0)| \le (M/L)(e^{ULt} - 1) \f$ at every recorded point of one interval.
 */
inline GrowthReport lemma1_growth_check(const Trajectory & one_interval, double M1, double L, double U, double slack = 1e-8)
{
  GrowthReport r;
  if (one_interval.empty()) { return r; }
  const double t0   = one_interval.times.front();
  const Vector & x0 = one_interval.states.front();
  for (std::size_t k = 0; k < one_interval.size(); ++k) {
    const double lhs = (one_interval.states[k] - x0).norm();
    const double rhs = growth_bound(M1, L, U, one_interval.times[k] - t0);
    r.max_violation  = std::max(r.max_violation, lhs - rhs);
    r.min_margin     = std::min(r.min_margin, rhs - lhs);
  }
  r.holds = r.max_violation <= slack;
  return r;
}

}  // namespace osctrack

#endif  // OSCTRACK__CERTIFY_HPP_
