#pragma once

#include <string>
#include <vector>

#include "lyapoqs/spectral.hpp"
#include "lyapoqs/types.hpp"

namespace lyapoqs {

struct SystemHamiltonian {
  CMatrix h;
  CMatrix phi;    // columns are eigenvectors
  RVector omega;  // ascending
  bool real = false;
  bool degenerate = false;
  double min_gap = 0.0;

  int n() const { return static_cast<int>(h.rows()); }
};

// Eigenvalues ascending; inside a degenerate cluster columns are ordered by
// the index of their largest-magnitude component, and every column is
// rephased so that component is real and positive.
SystemHamiltonian diagonalize(const CMatrix& h);

struct OpenSystem {
  SystemHamiltonian hamiltonian;
  std::vector<BathAttachment> baths;
  double epsilon = 0.1;
  Statistics statistics = Statistics::Fermionic;
  std::vector<std::string> warnings;

  int n_sites() const { return hamiltonian.n(); }
  const CMatrix& h() const { return hamiltonian.h; }
  bool all_wide_band() const;
};

OpenSystem build_system(const CMatrix& h, std::vector<BathAttachment> baths, double epsilon, Statistics statistics);

CMatrix tridiagonal_hamiltonian(const std::vector<double>& onsite, const std::vector<double>& hopping);

// Throws NotTridiagonal unless H is real symmetric nearest-neighbour.
void require_real_tridiagonal(const CMatrix& h, double tol = 1e-12);

}  // namespace lyapoqs
