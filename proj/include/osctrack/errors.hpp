#ifndef OSCTRACK__ERRORS_HPP_
#define OSCTRACK__ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace osctrack {

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent shapes: dimension mismatch, bad index, wrong column count.
class StructuralError : public Error
{
public:
  using Error::Error;
};

/// A state lies outside the domain of the control system.
class DomainError : public Error
{
public:
  using Error::Error;
};

/// The bracket-generating matrix is singular at a state.
class RankConditionError : public Error
{
public:
  using Error::Error;
};

/// Invalid parameter values (non-positive gains, broken radius ordering, ...).
class ValidationError : public Error
{
public:
  using Error::Error;
};

/// Caller misuse: empty inputs, mismatched horizons, unknown names.
class UsageError : public Error
{
public:
  using Error::Error;
};

class UnsupportedSchemeError : public Error
{
public:
  using Error::Error;
};

/// The heading-rate denominator of an admissible-curve construction vanished.
class DegenerateCurveError : public Error
{
public:
  using Error::Error;
};

/// A simulation terminated before reaching its horizon.
class SimulationError : public Error
{
public:
  using Error::Error;
};

class CertificationError : public Error
{
public:
  using Error::Error;
};

}  // namespace osctrack

#endif  // OSCTRACK__ERRORS_HPP_
