#pragma once

#include <stdexcept>
#include <string>

namespace jbt {

// All library failures derive from this; the CLI maps subclasses to exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidParameters : Error { using Error::Error; };
struct PoleAt : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct ParameterPole : Error { using Error::Error; };
struct EndpointMismatch : Error { using Error::Error; };
struct DivergentLimit : Error { using Error::Error; };
struct ExtrapolationUnstable : Error { using Error::Error; };

struct DegenerateDenominator : Error {
  DegenerateDenominator(const std::string& what, int k_, int endpoint_)
      : Error(what), k(k_), endpoint(endpoint_) {}
  int k;
  int endpoint;
};

struct DegenerateSpectralPoint : Error { using Error::Error; };
struct ExceptionalParameter : Error { using Error::Error; };
struct OnSpectrum : Error { using Error::Error; };
struct SingularMatrix : Error { using Error::Error; };

}  // namespace jbt
