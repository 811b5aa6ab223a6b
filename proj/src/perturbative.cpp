#include "lyapoqs/perturbative.hpp"

#include <cmath>

#include <fmt/format.h>

#include "lyapoqs/errors.hpp"
#include "lyapoqs/special.hpp"

namespace lyapoqs {

CMatrix to_eigenbasis(const SystemHamiltonian& h, const CMatrix& c) {
  return h.phi.transpose() * c * h.phi.conjugate();
}

CMatrix to_site_basis(const SystemHamiltonian& h, const CMatrix& y) {
  return h.phi.conjugate() * y * h.phi.transpose();
}

EigenbasisRates build_eigenbasis_rates(const OpenSystem& sys, const NonHermitianSystem& nh, const QuadOptions& opt) {
  const int n = sys.n_sites();
  const auto& hs = sys.hamiltonian;
  EigenbasisRates r;
  r.f_diag = RVector::Zero(n);
  r.F_diag = RVector::Zero(n);
  for (const auto& b : sys.baths)
    for (int a = 0; a < n; ++a) {
      const double w2 = std::norm(hs.phi(b.site, a));
      r.f_diag(a) += w2 * b.spectral(hs.omega(a));
      r.F_diag(a) += w2 * bath_noise(b, hs.omega(a));
    }
  r.v_e = nh.v_e;
  r.q_e = to_eigenbasis(hs, build_Q2(sys, opt));
  const double e2 = nh.epsilon * nh.epsilon;
  r.w.resize(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      r.w(a, b) = -kI * (hs.omega(a) - hs.omega(b)) + e2 * (std::conj(r.v_e(a, a)) + r.v_e(b, b));
  return r;
}

PertRegime check_pert_regime(const OpenSystem& sys, const NonHermitianSystem& nh, double threshold) {
  if (sys.hamiltonian.degenerate)
    throw Error(ErrorKind::DegenerateSpectrum, "perturbative forms require a non-degenerate spectrum");
  const int n = sys.n_sites();
  const double e2 = nh.epsilon * nh.epsilon;
  PertRegime reg;
  reg.threshold = threshold;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      PairMargin p{a, b, 0.0, true};
      const double gap = std::abs(sys.hamiltonian.omega(a) - sys.hamiltonian.omega(b));
      const double width = e2 * std::abs(nh.v_e(a, a) + std::conj(nh.v_e(b, b)));
      p.margin = width > 0.0 ? gap / width : std::numeric_limits<double>::infinity();
      p.accepted = p.margin >= threshold;
      reg.min_margin = std::min(reg.min_margin, p.margin);
      reg.accepted = reg.accepted && p.accepted;
      reg.pairs.push_back(p);
    }
  return reg;
}

namespace {

void require_regime(const OpenSystem& sys, const NonHermitianSystem& nh, double threshold) {
  const PertRegime reg = check_pert_regime(sys, nh, threshold);
  if (reg.accepted) return;
  for (const auto& p : reg.pairs)
    if (!p.accepted)
      throw Error(ErrorKind::RegimeRejected,
                  fmt::format("modes {} and {} violate the weak-coupling condition (margin {:.3g} < {:.3g})", p.alpha,
                              p.nu, p.margin, threshold));
}

void require_no_dark(const EigenbasisRates& r) {
  for (int a = 0; a < r.f_diag.size(); ++a)
    if (!(r.f_diag(a) > 0.0))
      throw Error(ErrorKind::DarkStatePresent, fmt::format("mode {} is decoupled from every bath", a));
}

}  // namespace

std::vector<CMatrix> pert_dynamics(const OpenSystem& sys, const NonHermitianSystem& nh, const CMatrix& y0,
                                   const std::vector<double>& times, const QuadOptions& opt, double threshold) {
  const int n = sys.n_sites();
  if (y0.rows() != n || y0.cols() != n) throw Error(ErrorKind::InvalidArgument, "initial matrix has wrong size");
  require_regime(sys, nh, threshold);
  const EigenbasisRates r = build_eigenbasis_rates(sys, nh, opt);
  require_no_dark(r);
  const double e2 = nh.epsilon * nh.epsilon;
  const RVector rate = e2 * r.f_diag;
  const RVector occ = r.F_diag.cwiseQuotient(r.f_diag);
  std::vector<CMatrix> out;
  out.reserve(times.size());
  for (double t : times) {
    CMatrix y(n, n);
    for (int a = 0; a < n; ++a) {
      const double ea = std::exp(-rate(a) * t);
      y(a, a) = y0(a, a) * ea + occ(a) * (1.0 - ea);
    }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        if (a == b) continue;
        const cplx pre = kI * e2 / (sys.hamiltonian.omega(a) - sys.hamiltonian.omega(b));
        const cplx ew = std::exp(-r.w(a, b) * t);
        const cplx ca = r.v_e(b, a);             // multiplies Y_aa
        const cplx cb = std::conj(r.v_e(a, b));  // multiplies Y_bb
        const double ea = std::exp(-rate(a) * t), eb = std::exp(-rate(b) * t);
        cplx val = y0(a, b) * ew;
        val += pre * (r.q_e(a, b) - cb * occ(b) - ca * occ(a)) * (1.0 - ew);
        val -= pre * (cb * (y0(b, b) - occ(b)) * (eb - ew) + ca * (y0(a, a) - occ(a)) * (ea - ew));
        y(a, b) = val;
      }
    out.push_back(y);
  }
  return out;
}

CMatrix pert_ness(const OpenSystem& sys, const NonHermitianSystem& nh, const QuadOptions& opt, double threshold) {
  require_unique_ness(nh);
  require_regime(sys, nh, threshold);
  const int n = sys.n_sites();
  const EigenbasisRates r = build_eigenbasis_rates(sys, nh, opt);
  require_no_dark(r);
  const double e2 = nh.epsilon * nh.epsilon;
  const RVector occ = r.F_diag.cwiseQuotient(r.f_diag);
  CMatrix y = CMatrix::Zero(n, n);
  for (int a = 0; a < n; ++a) y(a, a) = occ(a);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const cplx pre = kI * e2 / (sys.hamiltonian.omega(a) - sys.hamiltonian.omega(b));
      y(a, b) = pre * (r.q_e(a, b) - std::conj(r.v_e(a, b)) * occ(b) - r.v_e(b, a) * occ(a));
    }
  return y;
}

RMatrix real_eigenvectors(const SystemHamiltonian& h, double tol) {
  if (!h.real) throw Error(ErrorKind::ComplexHamiltonian, "a real symmetric Hamiltonian is required");
  if (h.phi.imag().cwiseAbs().maxCoeff() > tol)
    throw Error(ErrorKind::ComplexHamiltonian, "eigenvectors are not real");
  return h.phi.real();
}

RMatrix im_offdiag_ness(const OpenSystem& sys, const NonHermitianSystem& nh) {
  const RMatrix phi = real_eigenvectors(sys.hamiltonian);
  const RVector& w = sys.hamiltonian.omega;
  const int n = sys.n_sites();
  const double e2 = nh.epsilon * nh.epsilon;
  // term(a, b) = sum_{l,m} Phi_ma^2 Phi_la Phi_lb J_l J_m (n_l - n_m) / sum_l Phi_la^2 J_l, all at w_a
  auto term = [&](int a, int b) {
    double num = 0.0, den = 0.0;
    for (const auto& bl : sys.baths) {
      const double jl = bl.spectral(w(a));
      if (jl == 0.0) continue;
      const double nl = occupation_function(bl, w(a));
      den += phi(bl.site, a) * phi(bl.site, a) * jl;
      for (const auto& bm : sys.baths) {
        const double jm = bm.spectral(w(a));
        if (jm == 0.0) continue;
        const double nm = occupation_function(bm, w(a));
        num += phi(bm.site, a) * phi(bm.site, a) * phi(bl.site, a) * phi(bl.site, b) * jl * jm * (nl - nm);
      }
    }
    if (!(den > 0.0)) throw Error(ErrorKind::DarkStatePresent, fmt::format("mode {} is decoupled from every bath", a));
    return num / den;
  };
  RMatrix im = RMatrix::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b) im(a, b) = 0.5 * e2 / (w(a) - w(b)) * (term(a, b) + term(b, a));
  return im;
}

double gibbs_check(const OpenSystem& sys, const NonHermitianSystem& nh, double beta, double mu,
                   const QuadOptions& opt) {
  for (const auto& b : sys.baths)
    if (std::abs(b.beta - beta) > 1e-14 * std::max(1.0, beta) || std::abs(b.mu - mu) > 1e-14 * std::max(1.0, std::abs(mu)))
      throw Error(ErrorKind::NotEquilibrium, "all baths must share the requested temperature and chemical potential");
  const CorrelationMatrix c = solve_ness(Level::LevelII, sys, nh, opt);
  const CMatrix y = to_eigenbasis(sys.hamiltonian, c.c);
  double dev = 0.0;
  for (int a = 0; a < sys.n_sites(); ++a) {
    const double x = beta * (sys.hamiltonian.omega(a) - mu);
    const double occ = sys.statistics == Statistics::Fermionic ? fermi_factor(x) : bose_factor(x);
    dev = std::max(dev, std::abs(y(a, a).real() - occ));
  }
  return dev;
}

}  // namespace lyapoqs
