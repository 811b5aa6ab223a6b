#pragma once

#include <vector>

#include "lyapoqs/model.hpp"
#include "lyapoqs/quadrature.hpp"

namespace lyapoqs {

// G = S diag(lambda) S^-1 with unit-norm columns of S.
struct DriftSpectrum {
  CVector lambda;
  CMatrix s;
  CMatrix s_inv;
  double cond = 1.0;
  double residual = 0.0;
  bool near_defective = false;
};

DriftSpectrum decompose_drift(const CMatrix& g);

struct NonHermitianSystem {
  double epsilon = 0.0;
  CMatrix v;
  CMatrix h_nh;        // H - i eps^2 v
  CMatrix g;           // -i conj(h_nh)
  DriftSpectrum g_eig;
  CMatrix lamb_shift;  // without the eps^2 factor
  CMatrix v_e;         // Phi^dag v Phi
  CMatrix g_e;         // Phi^T G conj(Phi) = -iD + eps^2 conj(v_e)
};

// Per-site sums of J(w) + i J^H(w) evaluated at every eigenfrequency: entry
// (l, a) belongs to site l and mode a.
CMatrix site_response(const OpenSystem& sys, const QuadOptions& opt = {});

CMatrix build_v(const OpenSystem& sys, const QuadOptions& opt = {});
CMatrix build_lamb_shift(const OpenSystem& sys, const QuadOptions& opt = {});
NonHermitianSystem build_nonhermitian(const OpenSystem& sys, const QuadOptions& opt = {});

std::vector<int> dark_states(const OpenSystem& sys, const NonHermitianSystem& nh, double tol = 1e-10);
bool ness_unique(const NonHermitianSystem& nh, double tol = 1e-12);
// Throws NonUniqueNESS when ness_unique is false.
void require_unique_ness(const NonHermitianSystem& nh, double tol = 1e-12);

}  // namespace lyapoqs
