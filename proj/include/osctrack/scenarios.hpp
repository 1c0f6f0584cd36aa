#ifndef OSCTRACK__SCENARIOS_HPP_
#define OSCTRACK__SCENARIOS_HPP_

/**
 * @file
 * @brief Example systems: unicycle, 3D underwater vehicle, rear-wheel driving car.
 */

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "osctrack/controller.hpp"
#include "osctrack/curves.hpp"

namespace osctrack {

struct Scenario
{
  std::string name;
  ControlSystem system;
  BracketScheme scheme;
  ControllerParams default_params;
  std::string default_curve;
  Vector default_x0;
  double horizon{40};
  double rho{0.5};  ///< reporting tube radius
};

/// x' = u1 (cos x3, sin x3, 0) + u2 (0, 0, 1).
inline Scenario unicycle()
{
  auto f1 = make_field(
    3,
    [](const Vector & x) {
      Vector v(3);
      v << std::cos(x[2]), std::sin(x[2]), 0.0;
      return v;
    },
    [](const Vector & x) {
      Matrix J = Matrix::Zero(3, 3);
      J(0, 2)  = -std::sin(x[2]);
      J(1, 2)  = std::cos(x[2]);
      return J;
    });
  auto f2 = make_field(
    3, [](const Vector &) { return Vector(Vector::Unit(3, 2)); }, [](const Vector &) { return Matrix(Matrix::Zero(3, 3)); });

  BracketScheme scheme;
  scheme.s1 = {0, 1};
  scheme.s2 = {{0, 1, 1}};

  Vector x0(3);
  x0 << 1.0, 0.0, 0.0;
  return Scenario{"unicycle", ControlSystem("unicycle", {f1, f2}), scheme, {15.0, 0.1}, "gamma1", x0, 40.0, 0.5};
}

/**
 * @brief Kinematic underwater vehicle: position (x1, x2, x3) and Euler angles (x4, x5, x6).
 *
 * Domain |x5| < pi/2. Brackets [f1, f3], [f1, f4] with kappa = 1, 2.
 */
inline Scenario underwater_vehicle()
{
  auto f1 = make_field(
    6,
    [](const Vector & x) {
      Vector v   = Vector::Zero(6);
      const double c5 = std::cos(x[4]), s5 = std::sin(x[4]);
      v[0] = c5 * std::cos(x[5]);
      v[1] = c5 * std::sin(x[5]);
      v[2] = -s5;
      return v;
    },
    [](const Vector & x) {
      Matrix J = Matrix::Zero(6, 6);
      const double c5 = std::cos(x[4]), s5 = std::sin(x[4]), c6 = std::cos(x[5]), s6 = std::sin(x[5]);
      J(0, 4) = -s5 * c6;
      J(1, 4) = -s5 * s6;
      J(2, 4) = -c5;
      J(0, 5) = -c5 * s6;
      J(1, 5) = c5 * c6;
      return J;
    });
  auto f2 = make_field(
    6, [](const Vector &) { return Vector(Vector::Unit(6, 3)); }, [](const Vector &) { return Matrix(Matrix::Zero(6, 6)); });
  auto f3 = make_field(
    6,
    [](const Vector & x) {
      Vector v = Vector::Zero(6);
      const double c4 = std::cos(x[3]), s4 = std::sin(x[3]), sec5 = 1 / std::cos(x[4]);
      v[3] = s4 * std::tan(x[4]);
      v[4] = c4;
      v[5] = s4 * sec5;
      return v;
    },
    [](const Vector & x) {
      Matrix J = Matrix::Zero(6, 6);
      const double c4 = std::cos(x[3]), s4 = std::sin(x[3]), t5 = std::tan(x[4]), sec5 = 1 / std::cos(x[4]);
      J(3, 3) = c4 * t5;
      J(4, 3) = -s4;
      J(5, 3) = c4 * sec5;
      J(3, 4) = s4 * sec5 * sec5;
      J(5, 4) = s4 * sec5 * t5;
      return J;
    });
  auto f4 = make_field(
    6,
    [](const Vector & x) {
      Vector v = Vector::Zero(6);
      const double c4 = std::cos(x[3]), s4 = std::sin(x[3]), sec5 = 1 / std::cos(x[4]);
      v[3] = c4 * std::tan(x[4]);
      v[4] = -s4;
      v[5] = c4 * sec5;
      return v;
    },
    [](const Vector & x) {
      Matrix J = Matrix::Zero(6, 6);
      const double c4 = std::cos(x[3]), s4 = std::sin(x[3]), t5 = std::tan(x[4]), sec5 = 1 / std::cos(x[4]);
      J(3, 3) = -s4 * t5;
      J(4, 3) = -c4;
      J(5, 3) = -s4 * sec5;
      J(3, 4) = c4 * sec5 * sec5;
      J(5, 4) = c4 * sec5 * t5;
      return J;
    });

  BracketScheme scheme;
  scheme.s1 = {0, 1, 2, 3};
  scheme.s2 = {{0, 2, 1}, {0, 3, 2}};

  Vector x0(6);
  x0 << 0.0, 0.0, -1.0, std::numbers::pi / 4, std::numbers::pi / 4, std::numbers::pi / 4;
  auto domain = [](const Vector & x) { return std::abs(x[4]) < std::numbers::pi / 2; };
  return Scenario{"underwater",
    ControlSystem("underwater", {f1, f2, f3, f4}, domain),
    scheme,
    {15.0, 0.1},
    "gamma4_underwater",
    x0,
    40.0,
    0.5};
}

/**
 * @brief Rear-wheel driving car: rear wheel (x1, x2), steering angle x3, body orientation x4.
 *
 * Degree two: columns f1, f2, [f1, f2], [[f1, f2], f1]. Oscillator multipliers k12, k1, k2 default
 * to 3, 1, 2 so that all three are distinct.
 */
inline Scenario rear_wheel_car(unsigned k12 = 3, unsigned k1 = 1, unsigned k2 = 2)
{
  auto f1 = make_field(
    4,
    [](const Vector & x) {
      Vector v(4);
      v << std::cos(x[3]), std::sin(x[3]), 0.0, std::tan(x[2]);
      return v;
    },
    [](const Vector & x) {
      Matrix J           = Matrix::Zero(4, 4);
      const double sec3 = 1 / std::cos(x[2]);
      J(0, 3)            = -std::sin(x[3]);
      J(1, 3)            = std::cos(x[3]);
      J(3, 2)            = sec3 * sec3;
      return J;
    });
  auto f2 = make_field(
    4, [](const Vector &) { return Vector(Vector::Unit(4, 2)); }, [](const Vector &) { return Matrix(Matrix::Zero(4, 4)); });

  BracketScheme scheme;
  scheme.s1      = {0, 1};
  scheme.s2      = {{0, 1, k12}};
  scheme.degree2 = {NestedTriple{{0, 1, 0}, k1, k2}};

  Vector x0(4);
  x0 << 8.0, 0.0, 0.0, 0.0;
  auto domain = [](const Vector & x) { return std::abs(x[2]) < std::numbers::pi / 2; };
  return Scenario{"car", ControlSystem("car", {f1, f2}, domain), scheme, {5.0, 0.5}, "gamma4_car", x0, 60.0, 1.0};
}

inline const std::vector<std::string> & scenario_names()
{
  static const std::vector<std::string> names{"unicycle", "underwater", "car"};
  return names;
}

inline Scenario scenario_by_name(const std::string & name)
{
  if (name == "unicycle") { return unicycle(); }
  if (name == "underwater") { return underwater_vehicle(); }
  if (name == "car") { return rear_wheel_car(); }
  throw UsageError("unknown scenario '" + name + "'");
}

}  // namespace osctrack

#endif  // OSCTRACK__SCENARIOS_HPP_
