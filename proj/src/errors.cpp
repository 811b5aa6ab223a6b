#include "lyapoqs/errors.hpp"

namespace lyapoqs {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Config: return "Config";
    case ErrorKind::NonHermitianInput: return "NonHermitianInput";
    case ErrorKind::SiteOutOfRange: return "SiteOutOfRange";
    case ErrorKind::BosonicWideBand: return "BosonicWideBand";
    case ErrorKind::BosonicMuAboveBand: return "BosonicMuAboveBand";
    case ErrorKind::BosonicDivergence: return "BosonicDivergence";
    case ErrorKind::QuadratureNonConvergence: return "QuadratureNonConvergence";
    case ErrorKind::ScanHorizonExceeded: return "ScanHorizonExceeded";
    case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorKind::NonUniqueNESS: return "NonUniqueNESS";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::NearDefective: return "NearDefective";
    case ErrorKind::RegimeRejected: return "RegimeRejected";
    case ErrorKind::DarkStatePresent: return "DarkStatePresent";
    case ErrorKind::ComplexHamiltonian: return "ComplexHamiltonian";
    case ErrorKind::NotEquilibrium: return "NotEquilibrium";
    case ErrorKind::NotTridiagonal: return "NotTridiagonal";
    case ErrorKind::NotSingleSite: return "NotSingleSite";
    case ErrorKind::RecurrenceHorizon: return "RecurrenceHorizon";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::TooManySites: return "TooManySites";
    case ErrorKind::NonFermionic: return "NonFermionic";
    case ErrorKind::UnsupportedLevel: return "UnsupportedLevel";
  }
  return "Unknown";
}

bool is_input_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::Config:
    case ErrorKind::NonHermitianInput:
    case ErrorKind::SiteOutOfRange:
    case ErrorKind::BosonicWideBand:
    case ErrorKind::BosonicMuAboveBand:
    case ErrorKind::NotTridiagonal:
    case ErrorKind::NotSingleSite:
    case ErrorKind::ComplexHamiltonian:
    case ErrorKind::TooManySites:
    case ErrorKind::NonFermionic:
    case ErrorKind::UnsupportedLevel:
    case ErrorKind::NotEquilibrium:
      return true;
    default:
      return false;
  }
}

}  // namespace lyapoqs
