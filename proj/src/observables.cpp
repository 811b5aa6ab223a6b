#include "lyapoqs/observables.hpp"

#include <cmath>

#include <fmt/format.h>

#include "lyapoqs/errors.hpp"
#include "lyapoqs/frequency.hpp"
#include "lyapoqs/perturbative.hpp"

namespace lyapoqs {

double bond_current(const OpenSystem& sys, const CorrelationMatrix& c, int p) {
  require_real_tridiagonal(sys.h());
  const int n = sys.n_sites();
  if (p < 0 || p >= n - 1) throw Error(ErrorKind::SiteOutOfRange, fmt::format("bond {} out of range", p));
  return -2.0 * sys.h()(p, p + 1).real() * c.c(p, p + 1).imag();
}

std::vector<double> bond_currents(const OpenSystem& sys, const CorrelationMatrix& c) {
  std::vector<double> out;
  for (int p = 0; p + 1 < sys.n_sites(); ++p) out.push_back(bond_current(sys, c, p));
  return out;
}

double pert_current_formula(const OpenSystem& sys, const NonHermitianSystem& nh, int p, double threshold) {
  require_real_tridiagonal(sys.h());
  const int n = sys.n_sites();
  if (p < 0 || p >= n - 1) throw Error(ErrorKind::SiteOutOfRange, fmt::format("bond {} out of range", p));
  const PertRegime reg = check_pert_regime(sys, nh, threshold);
  if (!reg.accepted)
    throw Error(ErrorKind::RegimeRejected, fmt::format("weak-coupling margin {:.3g} below {:.3g}", reg.min_margin, threshold));
  const RMatrix phi = real_eigenvectors(sys.hamiltonian);
  const RVector& w = sys.hamiltonian.omega;
  double total = 0.0;
  for (int a = 0; a < n; ++a) {
    double den = 0.0, num = 0.0;
    for (const auto& bl : sys.baths) {
      const double jl = bl.spectral(w(a));
      den += phi(bl.site, a) * phi(bl.site, a) * jl;
      if (bl.site > p || jl == 0.0) continue;
      const double nl = occupation_function(bl, w(a));
      for (const auto& bm : sys.baths) {
        const double jm = bm.spectral(w(a));
        if (jm == 0.0) continue;
        num += phi(bl.site, a) * phi(bl.site, a) * phi(bm.site, a) * phi(bm.site, a) * jl * jm *
               (nl - occupation_function(bm, w(a)));
      }
    }
    if (num == 0.0) continue;
    if (!(den > 0.0)) throw Error(ErrorKind::DarkStatePresent, fmt::format("mode {} is decoupled from every bath", a));
    total += num / den;
  }
  return nh.epsilon * nh.epsilon * total;
}

double dimensionless_conductance(const SystemHamiltonian& h, int r, int s) {
  const int n = h.n();
  if (r < 0 || r >= n || s < 0 || s >= n) throw Error(ErrorKind::SiteOutOfRange, "site out of range");
  if (!h.real) throw Error(ErrorKind::ComplexHamiltonian, "a real symmetric Hamiltonian is required");
  double w = 0.0;
  for (int a = 0; a < n; ++a) {
    const double pr = std::norm(h.phi(r, a)), ps = std::norm(h.phi(s, a));
    if (pr + ps > 0.0) w += pr * ps / (pr + ps);
  }
  return w;
}

double dimensionless_conductance(const OpenSystem& sys, int r, int s) {
  return dimensionless_conductance(sys.hamiltonian, r, s);
}

double tridiagonal_identity_residual(const SystemHamiltonian& h) {
  const CMatrix hm = h.phi * h.omega.cast<cplx>().asDiagonal() * h.phi.adjoint();
  require_real_tridiagonal(hm, 1e-10 * std::max(1.0, max_abs(hm)));
  const RMatrix phi = real_eigenvectors(h);
  const int n = h.n();
  double worst = 0.0;
  for (int p = 0; p + 1 < n; ++p) {
    const double g = hm(p, p + 1).real();
    if (g == 0.0) continue;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double partial = 0.0;
        for (int k = 0; k <= p; ++k) partial += phi(k, a) * phi(k, b);
        const double lhs = phi(p, a) * phi(p + 1, b) - phi(p, b) * phi(p + 1, a);
        worst = std::max(worst, std::abs(lhs - (h.omega(b) - h.omega(a)) / g * partial));
      }
  }
  return worst;
}

OpenSystem resonant_level_system(const ResonantLevelParams& p, double epsilon) {
  CMatrix h(1, 1);
  h(0, 0) = p.eps0;
  std::vector<BathAttachment> baths = {
      {0, SpectralFunction::wide_band(p.gamma_l), p.beta_l, p.mu_l, Statistics::Fermionic},
      {0, SpectralFunction::wide_band(p.gamma_r), p.beta_r, p.mu_r, Statistics::Fermionic}};
  return build_system(h, std::move(baths), epsilon, Statistics::Fermionic);
}

ResonantLevelRecord resonant_level_suite(const ResonantLevelParams& p, const std::vector<double>& taus,
                                         const QuadOptions& opt) {
  if (!(p.gamma_l >= 0.0 && p.gamma_r >= 0.0 && p.gamma_l + p.gamma_r > 0.0))
    throw Error(ErrorKind::InvalidArgument, "resonant level needs non-negative widths with a positive sum");
  const OpenSystem sys = resonant_level_system(p);
  const auto& bl = sys.baths[0];
  const auto& br = sys.baths[1];
  const double half = 0.5 * (p.gamma_l + p.gamma_r);
  const std::vector<cplx> poles = {cplx(p.eps0, half), cplx(p.eps0, -half)};
  const FrequencyWindow win = make_window(sys.baths, poles, {p.eps0});
  auto lorentz = [&](cplx z) { return 1.0 / ((z - p.eps0) * (z - p.eps0) + half * half); };

  ResonantLevelRecord rec;
  {
    SpectralIntegrand in;
    in.dim = 2;
    PhasedPiece piece;
    piece.eval = [&](cplx z, CVector& out) {
      const cplx nl = occupation_continued(bl, z), nr = occupation_continued(br, z);
      out(0) = (p.gamma_l * nl + p.gamma_r * nr) * lorentz(z);
      out(1) = p.gamma_l * p.gamma_r * (nl - nr) * lorentz(z);
    };
    in.pieces.push_back(piece);
    const CVector r = integrate_frequency(win, in, opt);
    rec.occupation = r(0).real();
    rec.current = r(1).real();
  }
  rec.taus = taus;
  for (double tau : taus) {
    if (tau < 0.0) throw Error(ErrorKind::InvalidArgument, "lags must be non-negative");
    SpectralIntegrand in;
    in.dim = 1;
    PhasedPiece piece;
    piece.phase = tau;
    piece.eval = [&](cplx z, CVector& out) {
      out(0) = (p.gamma_l * occupation_continued(bl, z) + p.gamma_r * occupation_continued(br, z)) * lorentz(z);
    };
    in.pieces.push_back(piece);
    rec.two_time_exact.push_back(integrate_frequency(win, in, opt)(0));
    rec.two_time_naive.push_back(std::exp(cplx(-half, p.eps0) * tau) * rec.occupation);
  }
  return rec;
}

std::vector<double> bath_current_single_site(const OpenSystem& sys, const std::vector<double>& q1_per_bath,
                                             double occupation) {
  if (sys.n_sites() != 1) throw Error(ErrorKind::NotSingleSite, "single-site bath currents need N = 1");
  if (!sys.all_wide_band()) throw Error(ErrorKind::InvalidArgument, "single-site bath currents need wide-band baths");
  if (q1_per_bath.size() != sys.baths.size())
    throw Error(ErrorKind::InvalidArgument, "one source term per bath is required");
  const double e2 = sys.epsilon * sys.epsilon;
  std::vector<double> out;
  for (std::size_t b = 0; b < sys.baths.size(); ++b) {
    const double gamma = std::get<WideBand>(sys.baths[b].spectral.shape()).gamma;
    out.push_back(e2 * (q1_per_bath[b] - gamma * occupation));
  }
  return out;
}

std::vector<double> bath_currents(Level level, const OpenSystem& sys, const NonHermitianSystem& nh,
                                  const CorrelationMatrix& c, const QuadOptions& opt) {
  const double e2 = nh.epsilon * nh.epsilon;
  std::vector<double> out;
  for (std::size_t b = 0; b < sys.baths.size(); ++b) {
    OpenSystem one = sys;
    one.baths = {sys.baths[b]};
    const CMatrix vb = build_v(one, opt);
    CMatrix q;
    switch (level) {
      case Level::FirstMarkov:
      case Level::LevelI:
        q = build_Q1_bath(sys, nh, static_cast<int>(b), opt);
        break;
      case Level::LevelII:
        q = build_Q2(one, opt);
        break;
    }
    const cplx loss = (vb.conjugate() * c.c + c.c * vb.transpose()).trace();
    out.push_back(e2 * (q.trace() - loss).real());
  }
  return out;
}

}  // namespace lyapoqs
