#include "lyapoqs/regression.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "lyapoqs/errors.hpp"

namespace lyapoqs {

namespace {

void check_taus(const std::vector<double>& taus) {
  for (double tau : taus)
    if (!(tau >= 0.0)) throw Error(ErrorKind::InvalidArgument, "lags must be non-negative");
}

}  // namespace

TwoTimeCorrelation two_time_first_markov(const OpenSystem& sys, const NonHermitianSystem& nh, const CMatrix& c0,
                                         double t, const std::vector<double>& taus, const QuadOptions& opt) {
  check_taus(taus);
  TwoTimeCorrelation out;
  out.t = t;
  out.taus = taus;
  for (double tau : taus) out.values.push_back(first_markov_two_time(sys, nh, c0, t + tau, t, opt));
  if (!sys.baths.empty()) {
    const TauEstimate est = estimate_tau_B(sys, MarkovKernel::B1, default_tau_tolerance(sys));
    double tau_b = 0.0;
    for (double x : est.tau) tau_b = std::max(tau_b, x);
    if (t < tau_b) out.warnings.push_back(fmt::format("base time {} is not beyond the bath memory time {:.3g}", t, tau_b));
  }
  return out;
}

TwoTimeCorrelation two_time_level1(const OpenSystem& sys, const NonHermitianSystem& nh, const CorrelationMatrix& c_t,
                                   const std::vector<double>& taus, const QuadOptions& opt) {
  check_taus(taus);
  TwoTimeCorrelation out;
  out.t = c_t.t;
  out.taus = taus;
  const double e2 = nh.epsilon * nh.epsilon;
  for (double tau : taus) {
    CMatrix c = drift_propagator(nh, tau) * c_t.c;
    if (tau > 0.0) {
      ResolventIntegral spec;
      spec.core_terms = {{1.0, tau, {DriftFn::Phi, tau}, {DriftFn::Res}}};
      spec.terms = {{1.0, tau, {DriftFn::Res}, {DriftFn::Res}}, {-1.0, 0.0, {DriftFn::ExpRes, tau}, {DriftFn::Res}}};
      c += e2 * integrate_resolvent(sys, nh, spec, opt);
    }
    out.values.push_back(c);
  }
  return out;
}

TwoTimeCorrelation naive_qme_regression(const NonHermitianSystem& nh, const CorrelationMatrix& c_t,
                                        const std::vector<double>& taus) {
  check_taus(taus);
  TwoTimeCorrelation out;
  out.t = c_t.t;
  out.taus = taus;
  for (double tau : taus) out.values.push_back(drift_propagator(nh, tau) * c_t.c);
  return out;
}

TwoTimeCorrelation ness_fourier(const OpenSystem& sys, const NonHermitianSystem& nh, const std::vector<double>& taus,
                                const QuadOptions& opt) {
  check_taus(taus);
  require_unique_ness(nh);
  TwoTimeCorrelation out;
  out.t = std::numeric_limits<double>::infinity();
  out.taus = taus;
  const double e2 = nh.epsilon * nh.epsilon;
  for (double tau : taus) {
    ResolventIntegral spec;
    spec.terms = {{1.0, tau, {DriftFn::Res}, {DriftFn::Res}}};
    out.values.push_back(e2 * integrate_resolvent(sys, nh, spec, opt));
  }
  return out;
}

TwoTimeCorrelation two_time(Level level, const OpenSystem& sys, const NonHermitianSystem& nh, const CMatrix& c0,
                            double t, const std::vector<double>& taus, const QuadOptions& opt) {
  switch (level) {
    case Level::FirstMarkov:
      return two_time_first_markov(sys, nh, c0, t, taus, opt);
    case Level::LevelI: {
      const auto ct = solve_differential(Level::LevelI, sys, nh, c0, {t}, opt);
      return two_time_level1(sys, nh, ct.front(), taus, opt);
    }
    case Level::LevelII:
      break;
  }
  throw Error(ErrorKind::UnsupportedLevel, "two-time correlations are not defined at level II");
}

}  // namespace lyapoqs
