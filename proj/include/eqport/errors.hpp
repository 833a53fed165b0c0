#pragma once

#include <stdexcept>
#include <string>

namespace eqport {

/// Base for every error the engine raises. `kind()` is the stable tag written
/// into machine-readable error output.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

/// A caller-visible precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "precondition"; }
};

/// The requested operation does not apply to the classified regime.
class RegimeMismatch : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
  const char* kind() const noexcept override { return "regime_mismatch"; }
};

/// H^{-1}(z) was requested for z >= H(inf).
class NoSolution : public Error {
 public:
  NoSolution(double z, double h_infinity)
      : Error("no solution: z=" + std::to_string(z) +
              " is not below H(inf)=" + std::to_string(h_infinity)),
        z_(z),
        h_infinity_(h_infinity) {}
  const char* kind() const noexcept override { return "no_solution"; }
  double z() const noexcept { return z_; }
  double h_infinity() const noexcept { return h_infinity_; }

 private:
  double z_;
  double h_infinity_;
};

/// T0 is not an admissible family index.
class MembershipError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
  const char* kind() const noexcept override { return "membership"; }
};

/// The market carries no opportunity at all (integral of |lambda|^2 is 0); the
/// only equilibrium is the trivial one.
class ZeroOpportunity : public PreconditionError {
 public:
  ZeroOpportunity()
      : PreconditionError(
            "integral of |lambda|^2 over [0,T] is zero: the trivial strategy "
            "pi = 0 is the only equilibrium") {}
  const char* kind() const noexcept override { return "zero_opportunity"; }
};

/// A numerical routine did not reach its tolerance.
class NumericError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numeric"; }
};

/// Text input (spec string, CSV, config file) could not be parsed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  const char* kind() const noexcept override { return "parse"; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace eqport
