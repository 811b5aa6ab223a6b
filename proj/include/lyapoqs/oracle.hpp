#pragma once

#include <vector>

#include "lyapoqs/lyapunov.hpp"

namespace lyapoqs {

// Uniform midpoint grid; the coupling of mode r to the system site is
// eps * kappa_r with 2 pi kappa_r^2 / d_omega = J(omega_r).
struct DiscretizedBath {
  int site = 0;
  RVector omega;
  RVector kappa;
  RVector occupation;
  double d_omega = 0.0;
  double recurrence_time() const { return 2.0 * kPi / d_omega; }
};

DiscretizedBath discretize_bath(const BathAttachment& bath, int modes, double omega_min, double omega_max);
// One bath per attachment, all on the same grid.
std::vector<DiscretizedBath> discretize_baths(const OpenSystem& sys, int modes, double omega_min, double omega_max);

struct ExactEvolveOptions {
  int dense_limit = 2000;   // above this, rows are propagated by Chebyshev expansion
  int max_dimension = 20000;
  bool enforce_recurrence = true;
};

// System block of C_tot(t) = conj(U) C_tot(0) U^T, U = e^{-i H_tot t}.
std::vector<CorrelationMatrix> exact_gaussian_evolve(const OpenSystem& sys, const std::vector<DiscretizedBath>& baths,
                                                     const CMatrix& c0, const std::vector<double>& times,
                                                     const ExactEvolveOptions& opt = {});

// Full C_tot(t) on the dense path, for invariance checks.
std::vector<CMatrix> exact_gaussian_evolve_total(const OpenSystem& sys, const std::vector<DiscretizedBath>& baths,
                                                 const CMatrix& c0, const std::vector<double>& times);

// Fock space with Jordan-Wigner ordering by site index: basis state k has
// site l occupied when bit l of k is set.
struct FockOperators {
  int sites = 0;
  std::vector<CMatrix> annihilate;  // c_l
};

FockOperators fock_operators(int sites);

// Density matrix of the Gaussian state with correlation matrix c.
CMatrix gaussian_density_matrix(const FockOperators& ops, const CMatrix& c);
CMatrix extract_correlation(const FockOperators& ops, const CMatrix& rho);

struct RedfieldResult {
  std::vector<CMatrix> rho;
  std::vector<CorrelationMatrix> c;
  std::vector<double> trace_defect;
  std::vector<double> min_eig;
};

// Redfield master equation with the level-II coefficients.
RedfieldResult redfield_fock_evolve(const OpenSystem& sys, const NonHermitianSystem& nh, const CMatrix& rho0,
                                    const std::vector<double>& times, const QuadOptions& opt = {});

}  // namespace lyapoqs
