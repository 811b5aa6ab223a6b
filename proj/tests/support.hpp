#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "lyapoqs/model.hpp"
#include "lyapoqs/observables.hpp"

namespace testsupport {

using namespace lyapoqs;

inline double fermi(double beta, double mu, double w) {
  const double x = beta * (w - mu);
  return x > 0 ? std::exp(-x) / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
}

// Plain column-stacked vec solve of G C + C G^dag = R.
inline CMatrix kron_solve(const CMatrix& g, const CMatrix& r) {
  const int n = static_cast<int>(g.rows());
  const CMatrix id = CMatrix::Identity(n, n);
  CMatrix k = CMatrix::Zero(n * n, n * n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      const cplx gc = std::conj(g(j, l));
      if (j == l) k.block(j * n, l * n, n, n) += g;
      if (gc != cplx(0.0)) k.block(j * n, l * n, n, n) += gc * id;
    }
  const CVector x = k.partialPivLu().solve(Eigen::Map<const CVector>(r.data(), n * n));
  return Eigen::Map<const CMatrix>(x.data(), n, n);
}

inline CMatrix random_hermitian(std::mt19937_64& rng, int n, bool real = false) {
  std::normal_distribution<double> g;
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), real ? 0.0 : g(rng));
  return 0.5 * (a + a.adjoint());
}

struct ChainSpec {
  int n = 4;
  double epsilon = 0.1;
  bool wide = false;
  bool two_ends = true;
};

inline OpenSystem random_chain(std::mt19937_64& rng, const ChainSpec& s) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> onsite(s.n), hopping(s.n - 1);
  for (auto& x : onsite) x = u(rng);
  for (auto& x : hopping) x = 1.0 + 0.4 * u(rng);
  auto spec = [&]() {
    return s.wide ? SpectralFunction::wide_band(1.0 + 0.3 * u(rng))
                  : SpectralFunction::lorentzian(1.0 + 0.3 * u(rng), 0.5 * u(rng), 2.5 + u(rng));
  };
  std::vector<BathAttachment> baths = {{0, spec(), 1.0 + 0.5 * u(rng), 0.5 * u(rng), Statistics::Fermionic}};
  if (s.two_ends) baths.push_back({s.n - 1, spec(), 2.0 + 0.5 * u(rng), 0.5 * u(rng), Statistics::Fermionic});
  return build_system(tridiagonal_hamiltonian(onsite, hopping), baths, s.epsilon, Statistics::Fermionic);
}

// Same system with compactly supported baths lying far above their chemical
// potential, so n(w) J(w) vanishes identically.
inline OpenSystem with_empty_baths(const OpenSystem& sys) {
  std::vector<BathAttachment> baths = sys.baths;
  for (auto& b : baths) {
    b.spectral = SpectralFunction::tabulated({-4.0, -3.0, 3.0, 4.0}, {0.0, 1.0, 1.0, 0.0});
    b.mu = -60.0;
    b.beta = 10.0;
  }
  return build_system(sys.h(), baths, sys.epsilon, sys.statistics);
}

// Resonant level by direct quadrature, w = eps0 + (Gamma/2) tan(theta).
struct LevelOracle {
  ResonantLevelParams p;
  double gamma() const { return p.gamma_l + p.gamma_r; }
  double n_eff(double w) const {
    return (p.gamma_l * fermi(p.beta_l, p.mu_l, w) + p.gamma_r * fermi(p.beta_r, p.mu_r, w)) / gamma();
  }
  double omega(double th) const { return p.eps0 + 0.5 * gamma() * std::tan(th); }

  template <class F>
  static double quad(F f) {
    double err = 0.0;
    const double h = 0.5 * M_PI;
    double s = 0.0;
    // Split at the centre so steep Fermi edges are resolved.
    s += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -h, 0.0, 15, 1e-12, &err);
    s += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, h, 15, 1e-12, &err);
    return s;
  }
  double occupation() const {
    return quad([&](double th) { return n_eff(omega(th)); }) / M_PI;
  }
  double current() const {
    const double pref = p.gamma_l * p.gamma_r / gamma();
    return pref / M_PI * quad([&](double th) {
             const double w = omega(th);
             return fermi(p.beta_l, p.mu_l, w) - fermi(p.beta_r, p.mu_r, w);
           });
  }
  // <c^dag(tau) c> = int dw/2pi e^{i w tau} A(w) n_eff(w), A = Gamma / ((w - eps0)^2 + Gamma^2/4).
  cplx two_time(double tau) const {
    if (tau == 0.0) return occupation();
    const double hg = 0.5 * gamma();
    auto weight = [&](double w) {
      return gamma() / ((w - p.eps0) * (w - p.eps0) + hg * hg) * n_eff(w) / (2.0 * M_PI);
    };
    boost::math::quadrature::ooura_fourier_cos<double> fc(1e-13);
    boost::math::quadrature::ooura_fourier_sin<double> fs(1e-13);
    const auto even = [&](double w) { return weight(w) + weight(-w); };
    const auto odd = [&](double w) { return weight(w) - weight(-w); };
    const double re = fc.integrate(even, tau).first;
    const double im = fs.integrate(odd, tau).first;
    return {re, im};
  }
};

}  // namespace testsupport
