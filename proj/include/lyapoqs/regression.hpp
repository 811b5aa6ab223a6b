#pragma once

#include <string>
#include <vector>

#include "lyapoqs/lyapunov.hpp"

namespace lyapoqs {

// C(t + tau_k, t) for tau_k >= 0. Negative lags follow from
// C(t, t + tau) = C(t + tau, t)^dag.
struct TwoTimeCorrelation {
  double t = 0.0;
  std::vector<double> taus;
  std::vector<CMatrix> values;
  std::string convention = "C(t+tau,t); C(t,t+tau) = C(t+tau,t)^dag";
  std::vector<std::string> warnings;
};

TwoTimeCorrelation two_time_first_markov(const OpenSystem& sys, const NonHermitianSystem& nh, const CMatrix& c0,
                                         double t, const std::vector<double>& taus, const QuadOptions& opt = {});

// Level-I regression from the equal-time matrix c_t at base time c_t.t.
TwoTimeCorrelation two_time_level1(const OpenSystem& sys, const NonHermitianSystem& nh, const CorrelationMatrix& c_t,
                                   const std::vector<double>& taus, const QuadOptions& opt = {});

// e^{-G tau} C(t)
TwoTimeCorrelation naive_qme_regression(const NonHermitianSystem& nh, const CorrelationMatrix& c_t,
                                        const std::vector<double>& taus);

// eps^2 int dw/2pi e^{i w tau} (G + i w)^-1 F(w) (G^dag - i w)^-1
TwoTimeCorrelation ness_fourier(const OpenSystem& sys, const NonHermitianSystem& nh, const std::vector<double>& taus,
                                const QuadOptions& opt = {});

// Dispatch by level; level II throws UnsupportedLevel.
TwoTimeCorrelation two_time(Level level, const OpenSystem& sys, const NonHermitianSystem& nh, const CMatrix& c0,
                            double t, const std::vector<double>& taus, const QuadOptions& opt = {});

}  // namespace lyapoqs
