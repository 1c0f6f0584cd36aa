#ifndef OSCTRACK__SYSTEMS_HPP_
#define OSCTRACK__SYSTEMS_HPP_

/**
 * @file
 * @brief Driftless control-affine systems, Lie brackets and the bracket-generating matrix.
 *
 * A system is \f$ \dot x = \sum_i u_i f_i(x) \f$ with \f$ m < n \f$ fields. A BracketScheme picks
 * which fields and brackets span \f$ \mathbb{R}^n \f$; the matrix built from those columns is the
 * gain matrix used by the feedback law.
 */

#include <Eigen/Core>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "osctrack/errors.hpp"

namespace osctrack {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace detail {

inline std::string format_state(const Vector & x)
{
  std::ostringstream os;
  os.precision(10);
  os << '(';
  for (Eigen::Index i = 0; i < x.size(); ++i) { os << (i ? ", " : "") << x[i]; }
  os << ')';
  return os.str();
}

}  // namespace detail

/// Central finite-difference Jacobian of `f` at `x` with step `h * max(1, |x|)`.
inline Matrix finite_difference_jacobian(
  const std::function<Vector(const Vector &)> & f, const Vector & x, double h = 1e-6)
{
  const double step = h * std::max(1.0, x.norm());
  const auto n      = x.size();
  Matrix J(n, n);
  Vector xp = x, xm = x;
  for (Eigen::Index k = 0; k < n; ++k) {
    xp[k]    = x[k] + step;
    xm[k]    = x[k] - step;
    J.col(k) = (f(xp) - f(xm)) / (2 * step);
    xp[k]    = x[k];
    xm[k]    = x[k];
  }
  return J;
}

/**
 * @brief Smooth vector field on \f$ \mathbb{R}^n \f$ together with its Jacobian.
 */
struct VectorField
{
  using EvalFn     = std::function<Vector(const Vector &)>;
  using JacobianFn = std::function<Matrix(const Vector &)>;

  std::size_t dim{0};
  EvalFn eval;
  JacobianFn jacobian;

  Vector operator()(const Vector & x) const { return eval(x); }
};

/// Field with an analytic Jacobian.
inline VectorField make_field(std::size_t dim, VectorField::EvalFn eval, VectorField::JacobianFn jac)
{
  if (dim == 0) { throw StructuralError("vector field dimension must be positive"); }
  return VectorField{dim, std::move(eval), std::move(jac)};
}

/// Field whose Jacobian falls back to central differences (h = 1e-6 max(1, |x|)).
inline VectorField make_field(std::size_t dim, VectorField::EvalFn eval)
{
  auto jac = [eval](const Vector & x) { return finite_difference_jacobian(eval, x, 1e-6); };
  return make_field(dim, std::move(eval), std::move(jac));
}

/**
 * @brief Lie bracket \f$ [f, g](x) = Dg(x) f(x) - Df(x) g(x) \f$ from the supplied Jacobians.
 */
inline Vector lie_bracket(const VectorField & f, const VectorField & g, const Vector & x)
{
  if (f.dim != g.dim || static_cast<std::size_t>(x.size()) != f.dim) {
    throw StructuralError("lie_bracket: dimension mismatch");
  }
  return g.jacobian(x) * f(x) - f.jacobian(x) * g(x);
}

/**
 * @brief The bracket \f$ [f, g] \f$ as a field of its own.
 *
 * Its Jacobian is a central difference (h = 1e-5) of the analytic-Jacobian bracket, i.e. second
 * derivatives of f and g are obtained by differencing their first-order Jacobians.
 */
inline VectorField bracket_field(const VectorField & f, const VectorField & g)
{
  if (f.dim != g.dim) { throw StructuralError("bracket_field: dimension mismatch"); }
  auto eval = [f, g](const Vector & x) { return lie_bracket(f, g, x); };
  auto jac  = [eval](const Vector & x) { return finite_difference_jacobian(eval, x, 1e-5); };
  return VectorField{f.dim, eval, jac};
}

/**
 * @brief Driftless control-affine system \f$ \dot x = \sum_{i=1}^m u_i f_i(x) \f$.
 */
class ControlSystem
{
public:
  using DomainFn = std::function<bool(const Vector &)>;

  ControlSystem(std::string name, std::vector<VectorField> fields, DomainFn domain = {})
      : name_(std::move(name)), fields_(std::move(fields)), domain_(std::move(domain))
  {
    if (fields_.empty()) { throw StructuralError("control system needs at least one field"); }
    n_ = fields_.front().dim;
    for (const auto & f : fields_) {
      if (f.dim != n_) { throw StructuralError("all fields of a system must share one dimension"); }
    }
    if (fields_.size() >= n_) {
      throw StructuralError("control system must be underactuated (m < n)");
    }
  }

  const std::string & name() const { return name_; }
  std::size_t n() const { return n_; }
  std::size_t m() const { return fields_.size(); }
  const VectorField & field(std::size_t i) const { return fields_.at(i); }
  const std::vector<VectorField> & fields() const { return fields_; }

  bool contains(const Vector & x) const
  {
    if (static_cast<std::size_t>(x.size()) != n_) { return false; }
    if (!x.allFinite()) { return false; }
    return !domain_ || domain_(x);
  }

  void require_in_domain(const Vector & x) const
  {
    if (static_cast<std::size_t>(x.size()) != n_) {
      throw StructuralError("state has dimension " + std::to_string(x.size()) + ", system expects "
                            + std::to_string(n_));
    }
    if (!contains(x)) {
      throw DomainError("state " + detail::format_state(x) + " lies outside the domain of " + name_);
    }
  }

  /// Drift-free velocity \f$ \sum_i u_i f_i(x) \f$.
  Vector velocity(const Vector & x, const Vector & u) const
  {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      if (u[static_cast<Eigen::Index>(i)] != 0.0) {
        v += u[static_cast<Eigen::Index>(i)] * fields_[i](x);
      }
    }
    return v;
  }

private:
  std::string name_;
  std::vector<VectorField> fields_;
  DomainFn domain_;
  std::size_t n_{0};
};

/// Domain-checked bracket of two fields of `sys`.
inline Vector lie_bracket(
  const ControlSystem & sys, const VectorField & f, const VectorField & g, const Vector & x)
{
  if (f.dim != sys.n() || g.dim != sys.n()) {
    throw StructuralError("lie_bracket: field dimension differs from system dimension");
  }
  sys.require_in_domain(x);
  return lie_bracket(f, g, x);
}

/// First-order bracket \f$ [f_{first}, f_{second}] \f$ with its oscillation multiplier.
struct BracketPair
{
  std::size_t first{0};
  std::size_t second{0};
  unsigned kappa{1};
};

/**
 * @brief Second-degree column \f$ [[f_{j_1}, f_{j_2}], f_{j_1}] \f$ driven at frequencies k1, k2.
 *
 * `indices` lists the triple as written (j1, j2, j3); only j3 == j1 is supported.
 */
struct NestedTriple
{
  std::array<std::size_t, 3> indices{0, 1, 0};
  unsigned k1{1};
  unsigned k2{2};

  std::size_t outer() const { return indices[0]; }
  std::size_t inner() const { return indices[1]; }
};

/**
 * @brief Choice of spanning columns: fields in `s1`, brackets in `s2`, nested brackets in `degree2`.
 *
 * Field indices are zero-based. Column order (and coefficient order) is s1, then s2, then degree2.
 */
struct BracketScheme
{
  std::vector<std::size_t> s1;
  std::vector<BracketPair> s2;
  std::vector<NestedTriple> degree2;

  std::size_t size() const { return s1.size() + s2.size() + degree2.size(); }
  bool has_degree2() const { return !degree2.empty(); }

  /// Largest trigonometric multiplier (kappa, k1 or k2) appearing in the controls.
  unsigned max_frequency() const
  {
    unsigned k = 0;
    for (const auto & p : s2) { k = std::max(k, p.kappa); }
    for (const auto & t : degree2) { k = std::max({k, t.k1, t.k2}); }
    return k;
  }

  void validate(std::size_t n, std::size_t m) const
  {
    if (size() != n) {
      throw StructuralError("scheme declares " + std::to_string(size()) + " columns for n = "
                            + std::to_string(n));
    }
    std::set<std::size_t> seen_s1;
    for (auto j : s1) {
      if (j >= m) { throw StructuralError("s1 index out of range"); }
      if (!seen_s1.insert(j).second) { throw StructuralError("s1 indices must be distinct"); }
    }
    std::set<unsigned> kappas;
    for (const auto & p : s2) {
      if (p.first >= m || p.second >= m) { throw StructuralError("s2 index out of range"); }
      if (p.first == p.second) { throw StructuralError("s2 pair must use two distinct fields"); }
      if (p.kappa == 0) { throw ValidationError("kappa must be a positive integer"); }
      if (!kappas.insert(p.kappa).second) {
        throw ValidationError("kappa values must be pairwise distinct");
      }
    }
    for (const auto & t : degree2) {
      if (t.indices[2] != t.indices[0]) {
        throw UnsupportedSchemeError("only [[f_j1, f_j2], f_j1] second-degree columns are supported");
      }
      if (t.outer() >= m || t.inner() >= m || t.outer() == t.inner()) {
        throw StructuralError("degree-2 triple index out of range");
      }
      if (t.k1 == 0 || t.k2 == 0) { throw ValidationError("k1, k2 must be positive integers"); }
      if (t.k1 == t.k2) { throw ValidationError("degree-2 frequencies require k2 != k1"); }
    }
  }
};

/**
 * @brief Column fields of the gain matrix for a (system, scheme) pair.
 *
 * Built once; the bracket fields are reused across evaluations.
 */
class GainColumns
{
public:
  GainColumns(const ControlSystem & sys, const BracketScheme & scheme) : sys_(sys), scheme_(scheme)
  {
    scheme_.validate(sys_.n(), sys_.m());
    for (auto j : scheme_.s1) { columns_.push_back(sys_.field(j)); }
    for (const auto & p : scheme_.s2) {
      columns_.push_back(bracket_field(sys_.field(p.first), sys_.field(p.second)));
    }
    for (const auto & t : scheme_.degree2) {
      auto inner = bracket_field(sys_.field(t.outer()), sys_.field(t.inner()));
      columns_.push_back(bracket_field(inner, sys_.field(t.outer())));
    }
  }

  const ControlSystem & system() const { return sys_; }
  const BracketScheme & scheme() const { return scheme_; }
  const std::vector<VectorField> & columns() const { return columns_; }

  /// Unchecked evaluation of all columns.
  Matrix evaluate(const Vector & x) const
  {
    const auto n = static_cast<Eigen::Index>(sys_.n());
    Matrix F(n, n);
    for (std::size_t k = 0; k < columns_.size(); ++k) {
      F.col(static_cast<Eigen::Index>(k)) = columns_[k](x);
    }
    return F;
  }

  /// Evaluation with domain check and singularity test.
  Matrix operator()(const Vector & x) const
  {
    sys_.require_in_domain(x);
    Matrix F = evaluate(x);
    require_nonsingular(F, x);
    return F;
  }

  /// Throws RankConditionError when the smallest singular value is below 1e-12 of the largest
  /// column norm.
  static void require_nonsingular(const Matrix & F, const Vector & x)
  {
    if (is_singular(F)) {
      throw RankConditionError("gain matrix is singular at x = " + detail::format_state(x));
    }
  }

  static bool is_singular(const Matrix & F)
  {
    if (!F.allFinite()) { return true; }
    const double scale = F.colwise().norm().maxCoeff();
    if (scale == 0.0) { return true; }
    Eigen::JacobiSVD<Matrix> svd(F);
    return svd.singularValues().minCoeff() < 1e-12 * scale;
  }

private:
  ControlSystem sys_;
  BracketScheme scheme_;
  std::vector<VectorField> columns_;
};

/**
 * @brief Gain matrix \f$ F(x) \f$ with columns in scheme order.
 *
 * Throws DomainError outside the domain and RankConditionError if F(x) is singular.
 */
inline Matrix build_gain_matrix(const ControlSystem & sys, const BracketScheme & scheme, const Vector & x)
{
  return GainColumns(sys, scheme)(x);
}

struct RankSample
{
  double sigma_min{0};
  double sigma_max{0};
  double column_scale{0};
  bool singular{false};
  bool near_singular{false};
};

struct RankReport
{
  std::vector<RankSample> samples;
  double min_sigma{std::numeric_limits<double>::infinity()};
  double max_condition{0};
  bool ok{true};             ///< no sample singular and no sample outside the domain
  bool near_singular{false}; ///< some sample has condition number above the near-singular bound
  std::size_t outside_domain{0};
};

/// Condition number above which a sample is flagged as near-singular.
inline constexpr double kNearSingularCondition = 1e8;

/**
 * @brief Evaluates the rank condition on a finite sample of states.
 */
inline RankReport check_rank_condition(
  const ControlSystem & sys, const BracketScheme & scheme, const std::vector<Vector> & samples)
{
  if (samples.empty()) { throw UsageError("check_rank_condition: empty sample list"); }
  GainColumns cols(sys, scheme);
  RankReport report;
  for (const auto & x : samples) {
    RankSample s;
    if (!sys.contains(x)) {
      ++report.outside_domain;
      s.singular = true;
      report.ok  = false;
      report.samples.push_back(s);
      continue;
    }
    const Matrix F = cols.evaluate(x);
    if (!F.allFinite()) {
      s.singular = s.near_singular = true;
    } else {
      Eigen::JacobiSVD<Matrix> svd(F);
      s.sigma_min    = svd.singularValues().minCoeff();
      s.sigma_max    = svd.singularValues().maxCoeff();
      s.column_scale = F.colwise().norm().maxCoeff();
      s.singular     = s.sigma_min < 1e-12 * s.column_scale;
      const double cond =
        s.sigma_min > 0 ? s.sigma_max / s.sigma_min : std::numeric_limits<double>::infinity();
      s.near_singular     = s.singular || cond > kNearSingularCondition;
      report.max_condition = std::max(report.max_condition, cond);
    }
    report.min_sigma = std::min(report.min_sigma, s.sigma_min);
    report.ok        = report.ok && !s.singular;
    report.near_singular = report.near_singular || s.near_singular;
    report.samples.push_back(s);
  }
  return report;
}

}  // namespace osctrack

#endif  // OSCTRACK__SYSTEMS_HPP_
