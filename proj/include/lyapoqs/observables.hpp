#pragma once

#include <vector>

#include "lyapoqs/lyapunov.hpp"

namespace lyapoqs {

struct CurrentReport {
  std::vector<double> bond;  // p -> p+1, p = 0..N-2
  std::vector<double> bath;  // into the system, one per bath
  Level level = Level::LevelI;
  double epsilon = 0.0;
  double regime_margin = std::numeric_limits<double>::infinity();
};

// Particle current from site p to p+1 of a nearest-neighbour chain:
// -2 g_p Im C_{p,p+1}.
double bond_current(const OpenSystem& sys, const CorrelationMatrix& c, int p);
std::vector<double> bond_currents(const OpenSystem& sys, const CorrelationMatrix& c);

// Weak-coupling steady current through bond p from eigenvector amplitudes at
// the bath sites. Baths at the two chain ends give the p-independent
// two-terminal expression.
double pert_current_formula(const OpenSystem& sys, const NonHermitianSystem& nh, int p, double threshold = 10.0);

// W(r, s) = sum_a Phi_ra^2 Phi_sa^2 / (Phi_ra^2 + Phi_sa^2)
double dimensionless_conductance(const OpenSystem& sys, int r, int s);
double dimensionless_conductance(const SystemHamiltonian& h, int r, int s);

// max over bonds, mode pairs of
// |Phi_pa Phi_{p+1,n} - Phi_pn Phi_{p+1,a} - (w_n - w_a)/g_p sum_{k<=p} Phi_ka Phi_kn|
double tridiagonal_identity_residual(const SystemHamiltonian& h);

struct ResonantLevelParams {
  double eps0 = 0.0;
  double gamma_l = 1.0;
  double gamma_r = 1.0;
  double beta_l = 1.0;
  double beta_r = 1.0;
  double mu_l = 0.0;
  double mu_r = 0.0;
};

struct ResonantLevelRecord {
  double occupation = 0.0;
  double current = 0.0;  // from the left bath into the right bath
  std::vector<double> taus;
  std::vector<cplx> two_time_exact;  // <c^dag(tau) c> at the steady state
  std::vector<cplx> two_time_naive;
};

// Closed-form steady state of one level between two wide-band fermionic baths.
ResonantLevelRecord resonant_level_suite(const ResonantLevelParams& p, const std::vector<double>& taus = {},
                                         const QuadOptions& opt = {});
// The same configuration as an OpenSystem at eps = 1.
OpenSystem resonant_level_system(const ResonantLevelParams& p, double epsilon = 1.0);

// Single site, wide-band baths: I_l = eps^2 (Q1^(l) - Gamma_l <n>).
std::vector<double> bath_current_single_site(const OpenSystem& sys, const std::vector<double>& q1_per_bath,
                                             double occupation);

// Particle flow from each bath into the system, from the bath terms of the
// Lyapunov equation at the given level: eps^2 Tr(Q^(b) - v_b^* C - C v_b^T).
std::vector<double> bath_currents(Level level, const OpenSystem& sys, const NonHermitianSystem& nh,
                                  const CorrelationMatrix& c, const QuadOptions& opt = {});

}  // namespace lyapoqs
