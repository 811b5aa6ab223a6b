#include "lyapoqs/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "lyapoqs/errors.hpp"
#include "lyapoqs/frequency.hpp"

namespace lyapoqs {

namespace {

// e^z - 1 without cancellation for small |z|.
cplx cexpm1(cplx z) {
  const double x = z.real(), y = z.imag();
  const double s = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

// (1 - e^{-d t}) / d with the t limit for small d t.
cplx relax_factor(cplx d, double t) {
  const cplx x = d * t;
  if (std::abs(x) < 1e-8) return t * (1.0 - 0.5 * x);
  return -cexpm1(-x) / d;
}

bool needs_log(const ResolventTerm& term) {
  return term.phase == 0.0 && ((term.left.kind == DriftFn::One && term.right.kind == DriftFn::Res) ||
                               (term.left.kind == DriftFn::Res && term.right.kind == DriftFn::One));
}

// Coefficient of 1/w of e^{iw0} f_left conj(f_right) as w -> -inf.
cplx log_kappa(const ResolventTerm& term) {
  return term.left.kind == DriftFn::One ? kI : -kI;
}

RVector asymptotic_noise(const OpenSystem& sys) {
  RVector f = RVector::Zero(sys.n_sites());
  for (const auto& b : sys.baths)
    if (b.spectral.is_wide_band() && b.statistics == Statistics::Fermionic)
      f(b.site) += std::get<WideBand>(b.spectral.shape()).gamma;
  return f;
}

struct Workspace {
  const OpenSystem* sys;
  const NonHermitianSystem* nh;
  std::vector<int> sites;  // sites carrying baths
  bool eigen_path;
  int n;
  std::map<double, CMatrix> props;  // e^{-G t} for the matrix path
};

CVector site_noise(const Workspace& ws, cplx z) {
  CVector f = CVector::Zero(ws.n);
  for (const auto& b : ws.sys->baths) f(b.site) += bath_noise_continued(b, z);
  return f;
}

CMatrix drift_matrix(Workspace& ws, const DriftFn& fn, cplx z) {
  const CMatrix& g = ws.nh->g;
  const int n = ws.n;
  const CMatrix id = CMatrix::Identity(n, n);
  switch (fn.kind) {
    case DriftFn::One:
      return id;
    case DriftFn::Res:
      return (g + kI * z * id).partialPivLu().inverse();
    case DriftFn::LamRes:
      return g * (g + kI * z * id).partialPivLu().inverse();
    case DriftFn::ExpRes: {
      auto it = ws.props.find(fn.t);
      if (it == ws.props.end()) it = ws.props.emplace(fn.t, CMatrix((-g * fn.t).exp())).first;
      return it->second * (g + kI * z * id).partialPivLu().inverse();
    }
    case DriftFn::Phi: {
      CMatrix aug = CMatrix::Zero(2 * n, 2 * n);
      aug.topLeftCorner(n, n) = -(g + kI * z * id) * fn.t;
      aug.topRightCorner(n, n) = id * fn.t;
      const CMatrix e = aug.exp();
      return e.topRightCorner(n, n);
    }
  }
  return id;
}

// Pieces leave the e^{i z phase} factor to the frequency engine.
void eval_terms(Workspace& ws, const std::vector<const ResolventTerm*>& terms, cplx z, bool with_phase, CVector& out) {
  const int n = ws.n;
  const CVector f = site_noise(ws, z);
  out.setZero(n * n);
  Eigen::Map<CMatrix> y(out.data(), n, n);
  if (ws.eigen_path) {
    const auto& eig = ws.nh->g_eig;
    CMatrix w = CMatrix::Zero(n, n);
    for (int l : ws.sites) {
      if (f(l) == 0.0) continue;
      w.noalias() += f(l) * eig.s_inv.col(l) * eig.s_inv.col(l).adjoint();
    }
    CVector p(n), q(n);
    for (const auto* t : terms) {
      for (int a = 0; a < n; ++a) {
        p(a) = drift_fn(t->left, eig.lambda(a), z);
        q(a) = std::conj(drift_fn(t->right, eig.lambda(a), std::conj(z)));
      }
      const cplx c = with_phase ? t->coef * std::exp(kI * z * t->phase) : t->coef;
      y.noalias() += c * (p.asDiagonal() * w * q.asDiagonal());
    }
  } else {
    const CMatrix fm = f.asDiagonal();
    for (const auto* t : terms) {
      const CMatrix l = drift_matrix(ws, t->left, z);
      const CMatrix r = drift_matrix(ws, t->right, std::conj(z));
      const cplx c = with_phase ? t->coef * std::exp(kI * z * t->phase) : t->coef;
      y.noalias() += c * (l * fm * r.adjoint());
    }
  }
}

}  // namespace

const char* to_string(Level level) {
  switch (level) {
    case Level::FirstMarkov: return "first";
    case Level::LevelI: return "l1";
    case Level::LevelII: return "l2";
  }
  return "?";
}

CorrelationMatrix make_correlation(const CMatrix& c, double t) {
  CorrelationMatrix out;
  out.hermiticity_defect = hermiticity_defect(c);
  out.c = hermitian_part(c);
  out.t = t;
  if (out.c.size() > 0) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(out.c, Eigen::EigenvaluesOnly);
    out.min_eig = es.eigenvalues().minCoeff();
    out.max_eig = es.eigenvalues().maxCoeff();
  }
  return out;
}

double positivity_defect(const CorrelationMatrix& c, Statistics stats) {
  double d = std::max(0.0, -c.min_eig);
  if (stats == Statistics::Fermionic) d = std::max(d, c.max_eig - 1.0);
  return d;
}

cplx drift_fn(const DriftFn& f, cplx lambda, cplx w) {
  const cplx d = lambda + kI * w;
  switch (f.kind) {
    case DriftFn::One: return 1.0;
    case DriftFn::Res: return 1.0 / d;
    case DriftFn::ExpRes: return std::exp(-lambda * f.t) / d;
    case DriftFn::LamRes: return lambda / d;
    case DriftFn::Phi: return relax_factor(d, f.t);
  }
  return 0.0;
}

CMatrix integrate_resolvent(const OpenSystem& sys, const NonHermitianSystem& nh, const ResolventIntegral& spec,
                            const QuadOptions& opt, QuadStats* stats) {
  const int n = sys.n_sites();
  Workspace ws{&sys, &nh, {}, !nh.g_eig.near_defective, n, {}};
  for (const auto& b : sys.baths)
    if (std::find(ws.sites.begin(), ws.sites.end(), b.site) == ws.sites.end()) ws.sites.push_back(b.site);
  std::sort(ws.sites.begin(), ws.sites.end());
  if (ws.sites.empty() || spec.terms.empty()) return CMatrix::Zero(n, n);

  std::vector<cplx> poles;
  for (int a = 0; a < n; ++a) poles.push_back(kI * nh.g_eig.lambda(a));
  std::vector<double> extra(sys.hamiltonian.omega.data(), sys.hamiltonian.omega.data() + n);
  const FrequencyWindow win = make_window(sys.baths, poles, extra);

  SpectralIntegrand in;
  in.dim = n * n;
  std::vector<const ResolventTerm*> core;
  for (const auto& t : spec.core_terms.empty() ? spec.terms : spec.core_terms) core.push_back(&t);
  in.core = [&ws, core](double w, CVector& out) { eval_terms(ws, core, cplx(w, 0.0), true, out); };

  std::map<double, std::vector<const ResolventTerm*>> groups;
  for (const auto& t : spec.terms) groups[t.phase].push_back(&t);

  const RVector finf = asymptotic_noise(sys);
  for (const auto& [phase, list] : groups) {
    PhasedPiece piece;
    piece.phase = phase;
    piece.eval = [&ws, list](cplx z, CVector& out) { eval_terms(ws, list, z, false, out); };
    if (spec.regularize_log && phase == 0.0 && finf.cwiseAbs().maxCoeff() > 0.0) {
      CMatrix c = CMatrix::Zero(n, n);
      CMatrix winf;
      if (ws.eigen_path) {
        winf = CMatrix::Zero(n, n);
        for (int l = 0; l < n; ++l)
          if (finf(l) != 0.0) winf += finf(l) * nh.g_eig.s_inv.col(l) * nh.g_eig.s_inv.col(l).adjoint();
      } else {
        winf = finf.cast<cplx>().asDiagonal();
      }
      for (const auto* t : list)
        if (needs_log(*t)) c += t->coef * log_kappa(*t) * winf;
      piece.left_log = Eigen::Map<CVector>(c.data(), n * n);
    }
    in.pieces.push_back(std::move(piece));
  }

  const CVector flat = integrate_frequency(win, in, opt, stats);
  const CMatrix y = Eigen::Map<const CMatrix>(flat.data(), n, n);
  if (ws.eigen_path) return nh.g_eig.s * y * nh.g_eig.s.adjoint();
  return y;
}

CMatrix drift_propagator(const NonHermitianSystem& nh, double t) {
  const auto& e = nh.g_eig;
  if (!e.near_defective) {
    CVector d(e.lambda.size());
    for (int a = 0; a < d.size(); ++a) d(a) = std::exp(-e.lambda(a) * t);
    return e.s * d.asDiagonal() * e.s_inv;
  }
  return CMatrix((-nh.g * t).exp());
}

CMatrix build_C_xi_two_time(const OpenSystem& sys, const NonHermitianSystem& nh, double t, double tau,
                            const QuadOptions& opt) {
  if (t < 0.0 || tau < 0.0) throw Error(ErrorKind::InvalidArgument, "times must be non-negative");
  const int n = sys.n_sites();
  if (t == 0.0) return CMatrix::Zero(n, n);
  ResolventIntegral spec;
  spec.core_terms = {{-kI, tau, {DriftFn::One}, {DriftFn::Phi, t}}};
  spec.terms = {{-kI, tau, {DriftFn::One}, {DriftFn::Res}}, {kI, tau + t, {DriftFn::One}, {DriftFn::ExpRes, t}}};
  spec.regularize_log = tau == 0.0;
  return integrate_resolvent(sys, nh, spec, opt);
}

CMatrix build_C_xi(const OpenSystem& sys, const NonHermitianSystem& nh, double t, const QuadOptions& opt) {
  return build_C_xi_two_time(sys, nh, t, 0.0, opt);
}

CMatrix build_Q_first_markov(const OpenSystem& sys, const NonHermitianSystem& nh, double t, const QuadOptions& opt) {
  const CMatrix cx = build_C_xi(sys, nh, t, opt);
  return hermitian_part(kI * (cx - cx.adjoint()));
}

CMatrix build_Q1(const OpenSystem& sys, const NonHermitianSystem& nh, const QuadOptions& opt, QuadStats* stats) {
  // R F + F R^dag = R (G F + F G^dag) R^dag decays as 1/w^2.
  ResolventIntegral spec;
  spec.terms = {{1.0, 0.0, {DriftFn::LamRes}, {DriftFn::Res}}, {1.0, 0.0, {DriftFn::Res}, {DriftFn::LamRes}}};
  return hermitian_part(integrate_resolvent(sys, nh, spec, opt, stats));
}

CMatrix build_Q1_bath(const OpenSystem& sys, const NonHermitianSystem& nh, int bath, const QuadOptions& opt) {
  if (bath < 0 || bath >= static_cast<int>(sys.baths.size()))
    throw Error(ErrorKind::InvalidArgument, fmt::format("bath index {} out of range", bath));
  OpenSystem one = sys;
  one.baths = {sys.baths[bath]};
  return build_Q1(one, nh, opt);
}

CMatrix build_Q2(const OpenSystem& sys, const QuadOptions& opt) {
  if (sys.hamiltonian.degenerate)
    throw Error(ErrorKind::DegenerateSpectrum, "level-II source requires a non-degenerate spectrum");
  const int n = sys.n_sites();
  const CMatrix& phi = sys.hamiltonian.phi;
  const RVector& w = sys.hamiltonian.omega;
  CMatrix fq = CMatrix::Zero(n, n);
  for (const auto& b : sys.baths)
    for (int a = 0; a < n; ++a) fq(b.site, a) += cplx(bath_noise(b, w(a)), -bath_noise_hilbert(b, w(a), opt));
  const CMatrix a = fq.cwiseProduct(phi.conjugate());
  const CMatrix half = 0.5 * a * phi.transpose();
  return half + half.adjoint();
}

InhomogeneitySource build_Q(Level level, const OpenSystem& sys, const NonHermitianSystem& nh, const QuadOptions& opt) {
  InhomogeneitySource src;
  src.level = level;
  switch (level) {
    case Level::FirstMarkov: {
      const OpenSystem* ps = &sys;
      const NonHermitianSystem* pn = &nh;
      src.of_time = [ps, pn, opt](double t) { return build_Q_first_markov(*ps, *pn, t, opt); };
      break;
    }
    case Level::LevelI:
      src.constant = build_Q1(sys, nh, opt);
      break;
    case Level::LevelII:
      src.constant = build_Q2(sys, opt);
      break;
  }
  return src;
}

double lyapunov_residual(const CMatrix& g, const CMatrix& c, const CMatrix& q, double eps) {
  return max_abs(g * c + c * g.adjoint() - eps * eps * q);
}

CMatrix solve_algebraic_schur(const CMatrix& g, const CMatrix& rhs) {
  const int n = static_cast<int>(g.rows());
  Eigen::ComplexSchur<CMatrix> schur(g);
  const CMatrix& u = schur.matrixU();
  const CMatrix& tm = schur.matrixT();
  const CMatrix f = u.adjoint() * rhs * u;
  CMatrix y = CMatrix::Zero(n, n);
  // T y_j + sum_{k >= j} conj(T_jk) y_k = f_j, solved from the last column.
  for (int j = n - 1; j >= 0; --j) {
    CVector r = f.col(j);
    for (int k = j + 1; k < n; ++k) r -= std::conj(tm(j, k)) * y.col(k);
    CMatrix a = tm;
    a.diagonal().array() += std::conj(tm(j, j));
    y.col(j) = a.triangularView<Eigen::Upper>().solve(r);
  }
  return u * y * u.adjoint();
}

CMatrix solve_algebraic_kronecker(const CMatrix& g, const CMatrix& rhs) {
  const int n = static_cast<int>(g.rows());
  const CMatrix id = CMatrix::Identity(n, n);
  CMatrix k = CMatrix::Zero(n * n, n * n);
  // vec(G C) = (I kron G) vec C; vec(C G^dag) = (conj(G) kron I) vec C.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      k.block(i * n, j * n, n, n) += (i == j ? g : CMatrix::Zero(n, n));
      k.block(i * n, j * n, n, n) += std::conj(g(i, j)) * id;
    }
  const CVector x = k.partialPivLu().solve(Eigen::Map<const CVector>(rhs.data(), n * n));
  return Eigen::Map<const CMatrix>(x.data(), n, n);
}

CorrelationMatrix solve_algebraic(const CMatrix& g, const CMatrix& q, double eps, SolveInfo* info) {
  const int n = static_cast<int>(g.rows());
  if (g.cols() != n || q.rows() != n || q.cols() != n)
    throw Error(ErrorKind::InvalidArgument, "solve_algebraic: dimension mismatch");
  const DriftSpectrum d = decompose_drift(g);
  const double gscale = std::max(1.0, max_abs(g));
  if (!(d.lambda.real().minCoeff() > 1e-12 * gscale))
    throw Error(ErrorKind::NonUniqueNESS,
                fmt::format("G has an eigenvalue with Re <= 0 ({:.3e}); no unique steady state", d.lambda.real().minCoeff()));
  const CMatrix rhs = eps * eps * q;
  const double bound = 1e-10 * std::max(1.0, eps * eps * max_abs(q));
  std::string method;
  CMatrix c;
  double res = std::numeric_limits<double>::infinity();
  if (!d.near_defective) {
    const CMatrix qt = d.s_inv * rhs * d.s_inv.adjoint();
    CMatrix y(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) y(a, b) = qt(a, b) / (d.lambda(a) + std::conj(d.lambda(b)));
    c = hermitian_part(d.s * y * d.s.adjoint());
    res = lyapunov_residual(g, c, q, eps);
    method = "eigen";
  }
  if (!(res <= bound) && n <= 64) {
    c = hermitian_part(solve_algebraic_kronecker(g, rhs));
    res = lyapunov_residual(g, c, q, eps);
    method = "kronecker";
  }
  if (!(res <= bound)) {
    CMatrix cs = hermitian_part(solve_algebraic_schur(g, rhs));
    const double rs = lyapunov_residual(g, cs, q, eps);
    if (rs < res) {
      c = cs;
      res = rs;
      method = "schur";
    }
  }
  if (!(res <= bound))
    throw Error(ErrorKind::IllConditioned,
                fmt::format("algebraic Lyapunov residual {:.3e} exceeds {:.3e}", res, bound));
  CorrelationMatrix out = make_correlation(c);
  if (info) {
    info->method = method;
    info->residual = res;
    info->hermiticity_defect = out.hermiticity_defect;
  }
  return out;
}

std::vector<CorrelationMatrix> evolve_constant_source(const NonHermitianSystem& nh, const CMatrix& q,
                                                      const CMatrix& c0, const std::vector<double>& times,
                                                      SolveInfo* info) {
  const int n = static_cast<int>(nh.g.rows());
  const double e2 = nh.epsilon * nh.epsilon;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1]))
      throw Error(ErrorKind::InvalidArgument, "time grid must be ascending and non-negative");
  std::vector<CorrelationMatrix> out;
  out.reserve(times.size());
  const auto& e = nh.g_eig;
  if (!e.near_defective) {
    const CMatrix c0t = e.s_inv * c0 * e.s_inv.adjoint();
    const CMatrix qt = e.s_inv * q * e.s_inv.adjoint();
    for (double t : times) {
      CMatrix y(n, n);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const cplx d = e.lambda(a) + std::conj(e.lambda(b));
          y(a, b) = std::exp(-d * t) * c0t(a, b) + e2 * qt(a, b) * relax_factor(d, t);
        }
      out.push_back(make_correlation(e.s * y * e.s.adjoint(), t));
    }
    if (info) info->method = "eigen";
  } else {
    namespace odeint = boost::numeric::odeint;
    using State = std::vector<double>;
    const CMatrix g = nh.g;
    const CMatrix src = e2 * q;
    auto rhs = [&g, &src, n](const State& x, State& dx, double) {
      Eigen::Map<const CMatrix> c(reinterpret_cast<const cplx*>(x.data()), n, n);
      Eigen::Map<CMatrix> dc(reinterpret_cast<cplx*>(dx.data()), n, n);
      dc = -(g * c + c * g.adjoint()) + src;
    };
    State x(2 * n * n);
    Eigen::Map<CMatrix>(reinterpret_cast<cplx*>(x.data()), n, n) = c0;
    double t_prev = 0.0;
    auto stepper = odeint::make_controlled(1e-10, 1e-10, odeint::runge_kutta_dopri5<State>());
    const double dt0 = 1e-3 / std::max(1.0, max_abs(g));
    for (double t : times) {
      if (t > t_prev) odeint::integrate_adaptive(stepper, rhs, x, t_prev, t, dt0);
      t_prev = t;
      out.push_back(make_correlation(Eigen::Map<const CMatrix>(reinterpret_cast<const cplx*>(x.data()), n, n), t));
    }
    if (info) info->method = "runge-kutta";
  }
  if (info) {
    for (const auto& c : out) {
      info->hermiticity_defect = std::max(info->hermiticity_defect, c.hermiticity_defect);
    }
    if (info->hermiticity_defect > 1e-8)
      info->warnings.push_back(fmt::format("hermitization removed a defect of {:.3e}", info->hermiticity_defect));
  }
  return out;
}

CMatrix first_markov_two_time(const OpenSystem& sys, const NonHermitianSystem& nh, const CMatrix& c0, double t1,
                              double t2, const QuadOptions& opt, QuadStats* stats) {
  if (t1 < 0.0 || t2 < 0.0) throw Error(ErrorKind::InvalidArgument, "times must be non-negative");
  CMatrix c = drift_propagator(nh, t1) * c0 * drift_propagator(nh, t2).adjoint();
  if (t1 == 0.0 || t2 == 0.0) return c;
  ResolventIntegral spec;
  spec.core_terms = {{1.0, t1 - t2, {DriftFn::Phi, t1}, {DriftFn::Phi, t2}}};
  spec.terms = {{1.0, t1 - t2, {DriftFn::Res}, {DriftFn::Res}},
                {-1.0, t1, {DriftFn::Res}, {DriftFn::ExpRes, t2}},
                {-1.0, -t2, {DriftFn::ExpRes, t1}, {DriftFn::Res}},
                {1.0, 0.0, {DriftFn::ExpRes, t1}, {DriftFn::ExpRes, t2}}};
  const double e2 = nh.epsilon * nh.epsilon;
  return c + e2 * integrate_resolvent(sys, nh, spec, opt, stats);
}

std::vector<CorrelationMatrix> solve_differential(Level level, const OpenSystem& sys, const NonHermitianSystem& nh,
                                                  const CMatrix& c0, const std::vector<double>& times,
                                                  const QuadOptions& opt, SolveInfo* info, QuadStats* stats) {
  const int n = sys.n_sites();
  if (c0.rows() != n || c0.cols() != n) throw Error(ErrorKind::InvalidArgument, "initial correlation matrix has wrong size");
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1]))
      throw Error(ErrorKind::InvalidArgument, "time grid must be ascending and non-negative");
  if (level == Level::FirstMarkov) {
    std::vector<CorrelationMatrix> out;
    for (double t : times) out.push_back(make_correlation(first_markov_two_time(sys, nh, c0, t, t, opt, stats), t));
    if (info) {
      info->method = nh.g_eig.near_defective ? "matrix-function" : "eigen";
      for (const auto& c : out) info->hermiticity_defect = std::max(info->hermiticity_defect, c.hermiticity_defect);
      if (info->hermiticity_defect > 1e-8)
        info->warnings.push_back(fmt::format("hermitization removed a defect of {:.3e}", info->hermiticity_defect));
    }
    return out;
  }
  const CMatrix q = level == Level::LevelI ? build_Q1(sys, nh, opt, stats) : build_Q2(sys, opt);
  return evolve_constant_source(nh, q, c0, times, info);
}

CorrelationMatrix ness_first_markov(const OpenSystem& sys, const NonHermitianSystem& nh, const QuadOptions& opt,
                                    QuadStats* stats) {
  require_unique_ness(nh);
  ResolventIntegral spec;
  spec.terms = {{1.0, 0.0, {DriftFn::Res}, {DriftFn::Res}}};
  const double e2 = nh.epsilon * nh.epsilon;
  return make_correlation(e2 * integrate_resolvent(sys, nh, spec, opt, stats));
}

CorrelationMatrix solve_ness(Level level, const OpenSystem& sys, const NonHermitianSystem& nh, const QuadOptions& opt,
                             SolveInfo* info, QuadStats* stats) {
  require_unique_ness(nh);
  switch (level) {
    case Level::FirstMarkov: {
      auto c = ness_first_markov(sys, nh, opt, stats);
      if (info) info->method = "frequency-integral";
      return c;
    }
    case Level::LevelI:
      return solve_algebraic(nh.g, build_Q1(sys, nh, opt, stats), nh.epsilon, info);
    case Level::LevelII:
      return solve_algebraic(nh.g, build_Q2(sys, opt), nh.epsilon, info);
  }
  throw Error(ErrorKind::UnsupportedLevel, "unknown level");
}

}  // namespace lyapoqs
