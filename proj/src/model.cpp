#include "lyapoqs/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "lyapoqs/errors.hpp"

namespace lyapoqs {

namespace {

int largest_component(const CVector& v) {
  int idx = 0;
  double best = -1.0;
  for (int i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best * (1.0 + 1e-10)) {
      best = a;
      idx = i;
    }
  }
  return idx;
}

}  // namespace

SystemHamiltonian diagonalize(const CMatrix& h) {
  const int n = static_cast<int>(h.rows());
  if (n == 0 || h.cols() != n) throw Error(ErrorKind::InvalidArgument, "hamiltonian must be a non-empty square matrix");
  const double scale = std::max(1.0, max_abs(h));
  if (hermiticity_defect(h) > 1e-12 * scale)
    throw Error(ErrorKind::NonHermitianInput,
                fmt::format("hamiltonian is not Hermitian (defect {:.3e})", hermiticity_defect(h)));

  SystemHamiltonian out;
  out.h = hermitian_part(h);
  out.real = out.h.imag().cwiseAbs().maxCoeff() == 0.0;
  CMatrix vecs;
  RVector vals;
  if (out.real) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(out.h.real());
    vals = es.eigenvalues();
    vecs = es.eigenvectors().cast<cplx>();
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(out.h);
    vals = es.eigenvalues();
    vecs = es.eigenvectors();
  }

  const double tol = 1e-9 * std::max(1.0, max_abs(out.h));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> cluster(n, 0);
  for (int i = 1; i < n; ++i) cluster[i] = cluster[i - 1] + (vals(i) - vals(i - 1) >= tol ? 1 : 0);
  std::vector<int> lead(n);
  for (int i = 0; i < n; ++i) lead[i] = largest_component(vecs.col(i));
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (cluster[a] != cluster[b]) return cluster[a] < cluster[b];
    return lead[a] < lead[b];
  });

  out.phi.resize(n, n);
  out.omega.resize(n);
  for (int k = 0; k < n; ++k) {
    CVector v = vecs.col(order[k]);
    const cplx c = v(lead[order[k]]);
    v *= std::conj(c) / std::abs(c);
    if (out.real) v = v.real().cast<cplx>();
    out.phi.col(k) = v;
    out.omega(k) = vals(order[k]);
  }
  out.min_gap = std::numeric_limits<double>::infinity();
  for (int i = 1; i < n; ++i) out.min_gap = std::min(out.min_gap, out.omega(i) - out.omega(i - 1));
  out.degenerate = n > 1 && out.min_gap < tol;
  return out;
}

bool OpenSystem::all_wide_band() const {
  return std::all_of(baths.begin(), baths.end(), [](const BathAttachment& b) { return b.spectral.is_wide_band(); });
}

OpenSystem build_system(const CMatrix& h, std::vector<BathAttachment> baths, double epsilon, Statistics statistics) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw Error(ErrorKind::InvalidArgument, fmt::format("epsilon must lie in (0, 1], got {}", epsilon));
  OpenSystem sys;
  sys.hamiltonian = diagonalize(h);
  sys.epsilon = epsilon;
  sys.statistics = statistics;
  const int n = sys.n_sites();
  for (const auto& b : baths) {
    if (b.site < 0 || b.site >= n)
      throw Error(ErrorKind::SiteOutOfRange, fmt::format("bath site {} outside [0, {})", b.site, n));
    if (!(b.beta > 0.0) || !std::isfinite(b.beta))
      throw Error(ErrorKind::InvalidArgument, fmt::format("bath beta must be positive, got {}", b.beta));
    if (!std::isfinite(b.mu)) throw Error(ErrorKind::InvalidArgument, "bath mu must be finite");
    if (b.statistics != statistics)
      throw Error(ErrorKind::InvalidArgument, "all baths must share the system statistics");
    if (statistics == Statistics::Bosonic) {
      if (b.spectral.is_wide_band()) throw Error(ErrorKind::BosonicWideBand, "wide-band bosonic baths are not supported");
      if (b.spectral.support_min() <= 0.0 && b.spectral(0.0) != 0.0)
        throw Error(ErrorKind::InvalidArgument, "bosonic spectral functions must vanish at omega = 0");
      double inf = b.spectral.support_min();
      if (const auto* t = std::get_if<Tabulated>(&b.spectral.shape())) {
        std::size_t i = 0;
        while (i < t->values.size() && t->values[i] == 0.0) ++i;
        if (i < t->values.size()) inf = i > 0 ? t->omega[i - 1] : t->omega[0];
      }
      if (!(b.mu < inf))
        throw Error(ErrorKind::BosonicMuAboveBand,
                    fmt::format("bosonic mu={} must lie below the bath support (inf {})", b.mu, inf));
    }
  }
  sys.baths = std::move(baths);
  if (epsilon == 1.0 && (statistics != Statistics::Fermionic || !sys.all_wide_band()))
    sys.warnings.push_back("epsilon = 1 is only controlled for wide-band fermionic baths");
  return sys;
}

CMatrix tridiagonal_hamiltonian(const std::vector<double>& onsite, const std::vector<double>& hopping) {
  const int n = static_cast<int>(onsite.size());
  if (n == 0 || static_cast<int>(hopping.size()) != n - 1)
    throw Error(ErrorKind::InvalidArgument, "tridiagonal hamiltonian needs N onsite and N-1 hopping values");
  CMatrix h = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) h(i, i) = onsite[i];
  for (int i = 0; i + 1 < n; ++i) h(i, i + 1) = h(i + 1, i) = hopping[i];
  return h;
}

void require_real_tridiagonal(const CMatrix& h, double tol) {
  const int n = static_cast<int>(h.rows());
  const double scale = std::max(1.0, max_abs(h));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (std::abs(h(i, j).imag()) > tol * scale)
        throw Error(ErrorKind::NotTridiagonal, "hamiltonian must be real for the chain formulas");
      if (std::abs(i - j) > 1 && std::abs(h(i, j)) > tol * scale)
        throw Error(ErrorKind::NotTridiagonal, fmt::format("nonzero element ({}, {}) outside the tridiagonal band", i, j));
    }
}

}  // namespace lyapoqs
