#pragma once

// Error taxonomy shared by the library and the CLI. Each class carries a
// stable kind string so callers can dispatch without RTTI gymnastics.

#include <stdexcept>
#include <string>

namespace pcat {

class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what)
      : Error("DimensionMismatch", what) {}
};

struct Singular : Error {
  explicit Singular(const std::string& what) : Error("Singular", what) {}
};

struct NonDiagonalizable : Error {
  explicit NonDiagonalizable(const std::string& what)
      : Error("NonDiagonalizable", what) {}
};

struct TimeOutOfRange : Error {
  explicit TimeOutOfRange(const std::string& what)
      : Error("TimeOutOfRange", what) {}
};

struct VanishingDenominator : Error {
  explicit VanishingDenominator(const std::string& what)
      : Error("VanishingDenominator", what) {}
};

struct VanishingTrace : Error {
  explicit VanishingTrace(const std::string& what)
      : Error("VanishingTrace", what) {}
};

struct ApproximationFailure : Error {
  explicit ApproximationFailure(const std::string& what)
      : Error("ApproximationFailure", what) {}
};

struct EmptyWithinBounds : Error {
  explicit EmptyWithinBounds(const std::string& what)
      : Error("EmptyWithinBounds", what) {}
};

struct PositiveBmax : Error {
  explicit PositiveBmax(const std::string& what)
      : Error("PositiveBmax", what) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error("ParseError", what) {}
};

}  // namespace pcat
