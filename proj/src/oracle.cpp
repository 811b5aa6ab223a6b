#include "lyapoqs/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "lyapoqs/errors.hpp"

namespace lyapoqs {

DiscretizedBath discretize_bath(const BathAttachment& bath, int modes, double omega_min, double omega_max) {
  if (modes < 1 || !(omega_max > omega_min))
    throw Error(ErrorKind::InvalidArgument, "bath discretization needs modes >= 1 and omega_max > omega_min");
  DiscretizedBath d;
  d.site = bath.site;
  d.d_omega = (omega_max - omega_min) / modes;
  d.omega.resize(modes);
  d.kappa.resize(modes);
  d.occupation.resize(modes);
  for (int r = 0; r < modes; ++r) {
    const double w = omega_min + (r + 0.5) * d.d_omega;
    const double j = bath.spectral(w);
    d.omega(r) = w;
    d.kappa(r) = std::sqrt(std::max(j, 0.0) * d.d_omega / (2.0 * kPi));
    d.occupation(r) = j > 0.0 ? occupation_function(bath, w) : 0.0;
  }
  return d;
}

std::vector<DiscretizedBath> discretize_baths(const OpenSystem& sys, int modes, double omega_min, double omega_max) {
  std::vector<DiscretizedBath> out;
  for (const auto& b : sys.baths) out.push_back(discretize_bath(b, modes, omega_min, omega_max));
  return out;
}

namespace {

struct TotalLayout {
  int n = 0;
  int total = 0;
  std::vector<int> offset;  // first index of each bath block
};

TotalLayout layout(const OpenSystem& sys, const std::vector<DiscretizedBath>& baths, int max_dim) {
  TotalLayout l;
  l.n = sys.n_sites();
  l.total = l.n;
  for (const auto& b : baths) {
    if (b.site < 0 || b.site >= l.n) throw Error(ErrorKind::SiteOutOfRange, "discretized bath site out of range");
    l.offset.push_back(l.total);
    l.total += static_cast<int>(b.omega.size());
  }
  if (l.total > max_dim)
    throw Error(ErrorKind::DimensionTooLarge, fmt::format("total dimension {} exceeds {}", l.total, max_dim));
  return l;
}

CMatrix total_hamiltonian(const OpenSystem& sys, const std::vector<DiscretizedBath>& baths, const TotalLayout& l) {
  CMatrix h = CMatrix::Zero(l.total, l.total);
  h.topLeftCorner(l.n, l.n) = sys.h();
  for (std::size_t b = 0; b < baths.size(); ++b) {
    const auto& d = baths[b];
    for (int r = 0; r < d.omega.size(); ++r) {
      const int i = l.offset[b] + r;
      h(i, i) = d.omega(r);
      h(d.site, i) = h(i, d.site) = sys.epsilon * d.kappa(r);
    }
  }
  return h;
}

void check_times(const std::vector<DiscretizedBath>& baths, const std::vector<double>& times, bool enforce) {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1]))
      throw Error(ErrorKind::InvalidArgument, "time grid must be ascending and non-negative");
  if (!enforce || times.empty()) return;
  for (const auto& b : baths)
    if (times.back() > 0.5 * b.recurrence_time())
      throw Error(ErrorKind::RecurrenceHorizon,
                  fmt::format("time {} exceeds half the recurrence time {:.4g}", times.back(), 0.5 * b.recurrence_time()));
}

// conj(X)^T C0 X with C0 = blockdiag(c0, diag(occupations)).
CMatrix system_block(const CMatrix& x, const CMatrix& c0, const std::vector<DiscretizedBath>& baths,
                     const TotalLayout& l) {
  CMatrix c = x.topRows(l.n).adjoint() * c0 * x.topRows(l.n);
  for (std::size_t b = 0; b < baths.size(); ++b) {
    const int m = static_cast<int>(baths[b].omega.size());
    const auto block = x.middleRows(l.offset[b], m);
    c.noalias() += block.adjoint() * baths[b].occupation.cast<cplx>().asDiagonal() * block;
  }
  return c;
}

// Rows of e^{-i H t} restricted to the system, transposed: X = e^{-i conj(H) t} E_S.
class ChebyshevPropagator {
 public:
  ChebyshevPropagator(const OpenSystem& sys, const std::vector<DiscretizedBath>& baths, const TotalLayout& l)
      : sys_(sys), baths_(baths), l_(l), hbar_(sys.h().conjugate()) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(sys.h(), Eigen::EigenvaluesOnly);
    double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    double coupling = 0.0;
    for (const auto& b : baths) {
      lo = std::min(lo, b.omega.minCoeff());
      hi = std::max(hi, b.omega.maxCoeff());
      coupling += b.kappa.squaredNorm();
    }
    const double pad = sys.epsilon * std::sqrt(coupling) + 1e-6 * std::max(1.0, hi - lo);
    lo -= pad;
    hi += pad;
    center_ = 0.5 * (hi + lo);
    half_ = 0.5 * (hi - lo);
  }

  void apply(const CMatrix& x, CMatrix& y) const {
    y.resize(x.rows(), x.cols());
    y.topRows(l_.n).noalias() = hbar_ * x.topRows(l_.n);
    y.bottomRows(l_.total - l_.n).setZero();
    for (std::size_t b = 0; b < baths_.size(); ++b) {
      const auto& d = baths_[b];
      const int m = static_cast<int>(d.omega.size());
      const int off = l_.offset[b];
      const RVector k = sys_.epsilon * d.kappa;
      y.middleRows(off, m) = d.omega.cast<cplx>().asDiagonal() * x.middleRows(off, m);
      y.middleRows(off, m).noalias() += k.cast<cplx>() * x.row(d.site);
      y.row(d.site).noalias() += k.cast<cplx>().transpose() * x.middleRows(off, m);
    }
  }

  // x <- e^{-i conj(H) dt} x
  void step(CMatrix& x, double dt) const {
    if (dt == 0.0) return;
    const double arg = half_ * dt;
    auto scaled = [&](const CMatrix& in, CMatrix& out) {
      apply(in, out);
      out = (out - center_ * in) / half_;
    };
    CMatrix t_prev = x, t_cur, t_next, tmp;
    scaled(t_prev, t_cur);
    CMatrix acc = std::cyl_bessel_j(0.0, arg) * t_prev;
    const int kmax = static_cast<int>(arg + 10.0 * std::cbrt(arg) + 40.0);
    cplx phase = -kI;
    for (int k = 1; k <= kmax; ++k) {
      const double jk = std::cyl_bessel_j(static_cast<double>(k), arg);
      acc += 2.0 * phase * jk * t_cur;
      if (k > arg && std::abs(jk) < 1e-17) break;
      scaled(t_cur, tmp);
      t_next = 2.0 * tmp - t_prev;
      t_prev.swap(t_cur);
      t_cur.swap(t_next);
      phase *= -kI;
    }
    x = std::exp(-kI * center_ * dt) * acc;
  }

 private:
  const OpenSystem& sys_;
  const std::vector<DiscretizedBath>& baths_;
  const TotalLayout& l_;
  CMatrix hbar_;
  double center_ = 0.0;
  double half_ = 1.0;
};

}  // namespace

std::vector<CorrelationMatrix> exact_gaussian_evolve(const OpenSystem& sys, const std::vector<DiscretizedBath>& baths,
                                                     const CMatrix& c0, const std::vector<double>& times,
                                                     const ExactEvolveOptions& opt) {
  const TotalLayout l = layout(sys, baths, opt.max_dimension);
  if (c0.rows() != l.n || c0.cols() != l.n) throw Error(ErrorKind::InvalidArgument, "initial correlation matrix has wrong size");
  check_times(baths, times, opt.enforce_recurrence);
  std::vector<CorrelationMatrix> out;
  if (l.total <= opt.dense_limit) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(total_hamiltonian(sys, baths, l));
    const CMatrix& v = es.eigenvectors();
    // X = e^{-i conj(H) t} E_S = conj(V) e^{-i D t} V^T E_S
    const CMatrix vt_s = v.topRows(l.n).transpose();
    for (double t : times) {
      CVector ph(l.total);
      for (int k = 0; k < l.total; ++k) ph(k) = std::exp(-kI * es.eigenvalues()(k) * t);
      const CMatrix x = v.conjugate() * (ph.asDiagonal() * vt_s);
      out.push_back(make_correlation(system_block(x, c0, baths, l), t));
    }
    return out;
  }
  ChebyshevPropagator prop(sys, baths, l);
  CMatrix x = CMatrix::Zero(l.total, l.n);
  x.topRows(l.n).setIdentity();
  double t_prev = 0.0;
  for (double t : times) {
    // Short steps keep the Bessel arguments moderate.
    double remaining = t - t_prev;
    const int pieces = std::max(1, static_cast<int>(std::ceil(remaining / 5.0)));
    for (int i = 0; i < pieces; ++i) prop.step(x, remaining / pieces);
    t_prev = t;
    out.push_back(make_correlation(system_block(x, c0, baths, l), t));
  }
  return out;
}

std::vector<CMatrix> exact_gaussian_evolve_total(const OpenSystem& sys, const std::vector<DiscretizedBath>& baths,
                                                 const CMatrix& c0, const std::vector<double>& times) {
  const TotalLayout l = layout(sys, baths, 20000);
  check_times(baths, times, false);
  CMatrix ctot = CMatrix::Zero(l.total, l.total);
  ctot.topLeftCorner(l.n, l.n) = c0;
  for (std::size_t b = 0; b < baths.size(); ++b)
    for (int r = 0; r < baths[b].omega.size(); ++r) ctot(l.offset[b] + r, l.offset[b] + r) = baths[b].occupation(r);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(total_hamiltonian(sys, baths, l));
  const CMatrix& v = es.eigenvectors();
  std::vector<CMatrix> out;
  for (double t : times) {
    CVector ph(l.total);
    for (int k = 0; k < l.total; ++k) ph(k) = std::exp(-kI * es.eigenvalues()(k) * t);
    const CMatrix u = v * ph.asDiagonal() * v.adjoint();
    out.push_back(u.conjugate() * ctot * u.transpose());
  }
  return out;
}

FockOperators fock_operators(int sites) {
  if (sites < 1 || sites > 6) throw Error(ErrorKind::TooManySites, "Fock-space oracle supports 1 to 6 sites");
  FockOperators ops;
  ops.sites = sites;
  const int dim = 1 << sites;
  for (int l = 0; l < sites; ++l) {
    CMatrix c = CMatrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) {
      if (!(k & (1 << l))) continue;
      const int sign = (std::popcount(static_cast<unsigned>(k & ((1 << l) - 1))) % 2) ? -1 : 1;
      c(k ^ (1 << l), k) = sign;
    }
    ops.annihilate.push_back(c);
  }
  return ops;
}

CMatrix gaussian_density_matrix(const FockOperators& ops, const CMatrix& c) {
  const int n = ops.sites;
  const int dim = 1 << n;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(c));
  const CMatrix& w = es.eigenvectors();
  CMatrix rho = CMatrix::Identity(dim, dim);
  const CMatrix id = CMatrix::Identity(dim, dim);
  for (int k = 0; k < n; ++k) {
    const double p = std::clamp(es.eigenvalues()(k), 0.0, 1.0);
    CMatrix d = CMatrix::Zero(dim, dim);
    for (int j = 0; j < n; ++j) d += w(j, k) * ops.annihilate[j];
    const CMatrix nk = d.adjoint() * d;
    rho = rho * (p * nk + (1.0 - p) * (id - nk));
  }
  return rho;
}

CMatrix extract_correlation(const FockOperators& ops, const CMatrix& rho) {
  const int n = ops.sites;
  CMatrix c(n, n);
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m) c(l, m) = (ops.annihilate[l].adjoint() * ops.annihilate[m] * rho).trace();
  return c;
}

RedfieldResult redfield_fock_evolve(const OpenSystem& sys, const NonHermitianSystem& nh, const CMatrix& rho0,
                                    const std::vector<double>& times, const QuadOptions& opt) {
  if (sys.statistics != Statistics::Fermionic)
    throw Error(ErrorKind::NonFermionic, "the Fock-space oracle is fermionic only");
  const int n = sys.n_sites();
  const FockOperators ops = fock_operators(n);
  const int dim = 1 << n;
  if (rho0.rows() != dim || rho0.cols() != dim) throw Error(ErrorKind::InvalidArgument, "rho0 has wrong dimension");
  if (hermiticity_defect(rho0) > 1e-12 || std::abs(rho0.trace() - 1.0) > 1e-12)
    throw Error(ErrorKind::InvalidArgument, "rho0 must be Hermitian with unit trace");
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1]))
      throw Error(ErrorKind::InvalidArgument, "time grid must be ascending and non-negative");

  const double e2 = nh.epsilon * nh.epsilon;
  const CMatrix q2 = build_Q2(sys, opt);
  const CMatrix& v = nh.v;
  const CMatrix loss = e2 * (v + v.adjoint() - q2.transpose());
  const CMatrix gain = e2 * q2.transpose();
  const CMatrix k = sys.h() + e2 * (v - v.adjoint()) / (2.0 * kI);

  const auto& c = ops.annihilate;
  std::vector<CMatrix> cd(n);
  for (int l = 0; l < n; ++l) cd[l] = c[l].adjoint();
  CMatrix kf = CMatrix::Zero(dim, dim), anti = CMatrix::Zero(dim, dim);
  std::vector<CMatrix> jump_loss(n, CMatrix::Zero(dim, dim)), jump_gain(n, CMatrix::Zero(dim, dim));
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m) {
      kf += k(l, m) * cd[l] * c[m];
      anti += loss(l, m) * cd[l] * c[m] + gain(l, m) * c[m] * cd[l];
      jump_loss[l] += loss(l, m) * c[m];  // sum_m A_lm c_m rho c_l^dag
      jump_gain[m] += gain(l, m) * cd[l];  // sum_l B_lm c_l^dag rho c_m
    }
  const CMatrix keff = kf - 0.5 * kI * anti;

  using State = std::vector<double>;
  auto rhs = [&](const State& x, State& dx, double) {
    Eigen::Map<const CMatrix> rho(reinterpret_cast<const cplx*>(x.data()), dim, dim);
    Eigen::Map<CMatrix> d(reinterpret_cast<cplx*>(dx.data()), dim, dim);
    const CMatrix kr = keff * rho;
    d = -kI * kr + kI * kr.adjoint();  // rho Hermitian
    for (int l = 0; l < n; ++l) {
      d.noalias() += jump_loss[l] * rho * cd[l];
      d.noalias() += jump_gain[l] * rho * c[l];
    }
  };

  namespace odeint = boost::numeric::odeint;
  State x(2 * dim * dim);
  Eigen::Map<CMatrix>(reinterpret_cast<cplx*>(x.data()), dim, dim) = rho0;
  auto stepper = odeint::make_controlled(1e-10, 1e-10, odeint::runge_kutta_dopri5<State>());
  RedfieldResult res;
  double t_prev = 0.0;
  const double dt0 = 1e-3 / std::max(1.0, max_abs(keff));
  for (double t : times) {
    if (t > t_prev) odeint::integrate_adaptive(stepper, rhs, x, t_prev, t, dt0);
    t_prev = t;
    const CMatrix rho = Eigen::Map<const CMatrix>(reinterpret_cast<const cplx*>(x.data()), dim, dim);
    res.rho.push_back(rho);
    res.c.push_back(make_correlation(extract_correlation(ops, rho), t));
    res.trace_defect.push_back(std::abs(rho.trace() - 1.0));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(rho), Eigen::EigenvaluesOnly);
    res.min_eig.push_back(es.eigenvalues().minCoeff());
  }
  return res;
}

}  // namespace lyapoqs
