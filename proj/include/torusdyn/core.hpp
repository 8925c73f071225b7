#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace torusdyn {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class ErrorKind {
  InvalidArgument,
  OutOfInjectivityRadius,
  EmptyRequest,
  OutsideDisk,
  Orientation,
  Degenerate,
  InversionFailure,
  DegenerateFit,
  NotInS,
  InsufficientFamily,
  IncompletePermutation,
  ChainBroken,
  Sampling,
  ConstructionFailure,
  Config,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::OutOfInjectivityRadius: return "out-of-injectivity-radius";
    case ErrorKind::EmptyRequest: return "empty-request";
    case ErrorKind::OutsideDisk: return "outside-disk";
    case ErrorKind::Orientation: return "orientation";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::InversionFailure: return "inversion-failure";
    case ErrorKind::DegenerateFit: return "degenerate-fit";
    case ErrorKind::NotInS: return "not-in-S";
    case ErrorKind::InsufficientFamily: return "insufficient-family";
    case ErrorKind::IncompletePermutation: return "incomplete-permutation";
    case ErrorKind::ChainBroken: return "chain-broken";
    case ErrorKind::Sampling: return "sampling";
    case ErrorKind::ConstructionFailure: return "construction-failure";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

/// Every failure raised by the library carries a kind so callers (and the
/// CLI exit-code logic) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace torusdyn
