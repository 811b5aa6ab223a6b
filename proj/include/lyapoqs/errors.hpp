#pragma once

#include <stdexcept>
#include <string>

namespace lyapoqs {

enum class ErrorKind {
  InvalidArgument,
  Config,
  NonHermitianInput,
  SiteOutOfRange,
  BosonicWideBand,
  BosonicMuAboveBand,
  BosonicDivergence,
  QuadratureNonConvergence,
  ScanHorizonExceeded,
  DegenerateSpectrum,
  NonUniqueNESS,
  IllConditioned,
  NearDefective,
  RegimeRejected,
  DarkStatePresent,
  ComplexHamiltonian,
  NotEquilibrium,
  NotTridiagonal,
  NotSingleSite,
  RecurrenceHorizon,
  DimensionTooLarge,
  TooManySites,
  NonFermionic,
  UnsupportedLevel,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Errors caused by the caller's input rather than by the numerics.
bool is_input_error(ErrorKind kind);

}  // namespace lyapoqs
