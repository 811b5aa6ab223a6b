#pragma once

#include <functional>
#include <vector>

#include "lyapoqs/quadrature.hpp"
#include "lyapoqs/spectral.hpp"

namespace lyapoqs {

// Real-frequency window holding every feature of an integrand. Outside
// [lo, hi] the integrand is analytic and free of poles in the half-planes
// used for contour rotation.
struct FrequencyWindow {
  double lo = -1.0;
  double hi = 1.0;
  std::vector<double> breaks;
  bool left_tail = false;
  bool right_tail = false;
};

// `poles` are complex frequencies where the integrand is singular (for a
// resolvent (lambda + i w)^-1 this is w = i lambda); `extra` are additional
// real break points.
FrequencyWindow make_window(const std::vector<BathAttachment>& baths, const std::vector<cplx>& poles,
                            const std::vector<double>& extra = {});

// f(z) e^{i z phase}; f is evaluated at complex z on the tails.
struct PhasedPiece {
  double phase = 0.0;
  std::function<void(cplx, CVector&)> eval;
  // Coefficient c of a c/w tail as w -> -inf (zero phase only). The
  // logarithmic divergence is regularized by dropping c ln(cutoff).
  CVector left_log;
};

struct SpectralIntegrand {
  int dim = 0;
  // Full real-axis integrand including phase factors; when empty the pieces
  // are summed instead.
  VectorFn core;
  std::vector<PhasedPiece> pieces;
};

// int dw/2pi of the integrand over the real line.
CVector integrate_frequency(const FrequencyWindow& window, const SpectralIntegrand& integrand,
                            const QuadOptions& opt = {}, QuadStats* stats = nullptr);

}  // namespace lyapoqs
