#include "lyapoqs/nonhermitian.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "lyapoqs/errors.hpp"

namespace lyapoqs {

DriftSpectrum decompose_drift(const CMatrix& g) {
  DriftSpectrum d;
  Eigen::ComplexEigenSolver<CMatrix> es(g);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::IllConditioned, "eigen-decomposition of G failed");
  d.lambda = es.eigenvalues();
  d.s = es.eigenvectors();
  for (int k = 0; k < d.s.cols(); ++k) d.s.col(k).normalize();
  Eigen::JacobiSVD<CMatrix> svd(d.s);
  const auto& sv = svd.singularValues();
  d.cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  d.near_defective = !(d.cond <= 1e8);
  if (!d.near_defective) d.s_inv = d.s.partialPivLu().inverse();
  d.residual = max_abs(g * d.s - d.s * d.lambda.asDiagonal());
  return d;
}

CMatrix site_response(const OpenSystem& sys, const QuadOptions& opt) {
  const int n = sys.n_sites();
  const RVector& w = sys.hamiltonian.omega;
  CMatrix r = CMatrix::Zero(n, n);
  for (const auto& b : sys.baths)
    for (int a = 0; a < n; ++a) r(b.site, a) += cplx(b.spectral(w(a)), hilbert_transform(b.spectral, w(a), opt));
  return r;
}

CMatrix build_v(const OpenSystem& sys, const QuadOptions& opt) {
  const int n = sys.n_sites();
  if (sys.all_wide_band()) {
    CMatrix v = CMatrix::Zero(n, n);
    for (const auto& b : sys.baths) v(b.site, b.site) += 0.5 * std::get<WideBand>(b.spectral.shape()).gamma;
    return v;
  }
  const CMatrix& phi = sys.hamiltonian.phi;
  const CMatrix r = site_response(sys, opt);
  // v_lm = 1/2 sum_a r(l, a) Phi_la conj(Phi_ma)
  return 0.5 * r.cwiseProduct(phi) * phi.adjoint();
}

CMatrix build_lamb_shift(const OpenSystem& sys, const QuadOptions& opt) {
  const int n = sys.n_sites();
  const CMatrix& phi = sys.hamiltonian.phi;
  const RVector& w = sys.hamiltonian.omega;
  RMatrix jh = RMatrix::Zero(n, n);
  for (const auto& b : sys.baths) {
    if (b.spectral.is_wide_band()) continue;
    for (int a = 0; a < n; ++a) jh(b.site, a) += hilbert_transform(b.spectral, w(a), opt);
  }
  // (J^H_l + J^H_m)/4 weighted by Phi_la conj(Phi_ma)
  const CMatrix left = jh.cast<cplx>().cwiseProduct(phi);
  CMatrix ls = 0.25 * (left * phi.adjoint() + phi * left.adjoint());
  return hermitian_part(ls);
}

NonHermitianSystem build_nonhermitian(const OpenSystem& sys, const QuadOptions& opt) {
  NonHermitianSystem nh;
  const double e2 = sys.epsilon * sys.epsilon;
  nh.epsilon = sys.epsilon;
  nh.v = build_v(sys, opt);
  nh.h_nh = sys.h() - kI * e2 * nh.v;
  nh.g = -kI * nh.h_nh.conjugate();
  nh.g_eig = decompose_drift(nh.g);
  nh.lamb_shift = build_lamb_shift(sys, opt);
  const CMatrix& phi = sys.hamiltonian.phi;
  nh.v_e = phi.adjoint() * nh.v * phi;
  nh.g_e = phi.transpose() * nh.g * phi.conjugate();
  return nh;
}

std::vector<int> dark_states(const OpenSystem& sys, const NonHermitianSystem& nh, double tol) {
  (void)nh;
  std::vector<int> sites;
  for (const auto& b : sys.baths)
    if (b.spectral.peak() > 0.0) sites.push_back(b.site);
  std::vector<int> dark;
  const CMatrix& phi = sys.hamiltonian.phi;
  for (int a = 0; a < sys.n_sites(); ++a) {
    bool detached = true;
    for (int l : sites)
      if (std::abs(phi(l, a)) >= tol) detached = false;
    if (detached) dark.push_back(a);
  }
  return dark;
}

bool ness_unique(const NonHermitianSystem& nh, double tol) {
  if (nh.g_eig.lambda.size() == 0) return false;
  return nh.g_eig.lambda.real().minCoeff() > tol * std::max(1.0, max_abs(nh.g));
}

void require_unique_ness(const NonHermitianSystem& nh, double tol) {
  if (!ness_unique(nh, tol))
    throw Error(ErrorKind::NonUniqueNESS,
                fmt::format("steady state is not unique: min Re(lambda) = {:.3e}", nh.g_eig.lambda.real().minCoeff()));
}

}  // namespace lyapoqs
