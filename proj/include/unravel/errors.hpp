#pragma once

#include <stdexcept>
#include <string>

namespace unravel {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};
struct NonHermitianInteraction : Error {
  using Error::Error;
};
struct NonPositiveHbar : Error {
  using Error::Error;
};
struct InvalidRate : Error {
  using Error::Error;
};
struct AllZeroAmplitudes : Error {
  using Error::Error;
};
struct InvalidInitialSpec : Error {
  using Error::Error;
};
struct EmptyEnsemble : Error {
  using Error::Error;
};
struct GridMismatch : Error {
  using Error::Error;
};
struct MixedTimes : Error {
  using Error::Error;
};
struct MetadataMismatch : Error {
  using Error::Error;
};
struct InsufficientSamples : Error {
  using Error::Error;
};
struct NonHermitianObservable : Error {
  using Error::Error;
};
struct EigenFailure : Error {
  using Error::Error;
};
struct InvalidDensityMatrix : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace unravel
