#pragma once

#include <vector>

#include "lyapoqs/lyapunov.hpp"

namespace lyapoqs {

// Mode correlations Y_an = <b_a^dag b_n> with b_a = sum_l conj(Phi_la) c_l,
// i.e. Y = Phi^T C conj(Phi) and C = conj(Phi) Y Phi^T.
CMatrix to_eigenbasis(const SystemHamiltonian& h, const CMatrix& c);
CMatrix to_site_basis(const SystemHamiltonian& h, const CMatrix& y);

struct EigenbasisRates {
  RVector f_diag;  // sum_l |Phi_la|^2 J_l(w_a)
  RVector F_diag;  // same with J_l n_l
  CMatrix v_e;     // Phi^dag v Phi
  CMatrix q_e;     // Phi^T Q2 conj(Phi)
  CMatrix w;       // damping of Y_an
};

EigenbasisRates build_eigenbasis_rates(const OpenSystem& sys, const NonHermitianSystem& nh,
                                       const QuadOptions& opt = {});

struct PairMargin {
  int alpha = 0;
  int nu = 0;
  double margin = 0.0;
  bool accepted = true;
};

struct PertRegime {
  std::vector<PairMargin> pairs;  // alpha < nu
  double min_margin = std::numeric_limits<double>::infinity();
  double threshold = 10.0;
  bool accepted = true;
};

PertRegime check_pert_regime(const OpenSystem& sys, const NonHermitianSystem& nh, double threshold = 10.0);

// Eigenbasis matrices Y(t). Throws RegimeRejected or DarkStatePresent.
std::vector<CMatrix> pert_dynamics(const OpenSystem& sys, const NonHermitianSystem& nh, const CMatrix& y0,
                                   const std::vector<double>& times, const QuadOptions& opt = {},
                                   double threshold = 10.0);
CMatrix pert_ness(const OpenSystem& sys, const NonHermitianSystem& nh, const QuadOptions& opt = {},
                  double threshold = 10.0);

// Im Y_an(inf) from the bath amplitudes alone; requires real eigenvectors.
RMatrix im_offdiag_ness(const OpenSystem& sys, const NonHermitianSystem& nh);

// max_a |Y_aa(inf) - n(w_a)| of the level-II steady state.
double gibbs_check(const OpenSystem& sys, const NonHermitianSystem& nh, double beta, double mu,
                   const QuadOptions& opt = {});

// Eigenvectors with the phase removed; throws ComplexHamiltonian if impossible.
RMatrix real_eigenvectors(const SystemHamiltonian& h, double tol = 1e-12);

}  // namespace lyapoqs
