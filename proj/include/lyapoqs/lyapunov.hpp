#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lyapoqs/nonhermitian.hpp"

namespace lyapoqs {

enum class Level { FirstMarkov, LevelI, LevelII };

const char* to_string(Level level);

struct CorrelationMatrix {
  CMatrix c;
  double t = 0.0;
  double min_eig = 0.0;
  double max_eig = 0.0;
  double hermiticity_defect = 0.0;  // removed by hermitization
};

// Hermitizes `c` and caches its extreme eigenvalues.
CorrelationMatrix make_correlation(const CMatrix& c, double t = 0.0);

// Fermionic: distance of the spectrum outside [0, 1]; bosonic: below 0.
double positivity_defect(const CorrelationMatrix& c, Statistics stats);

struct InhomogeneitySource {
  Level level = Level::LevelI;
  CMatrix constant;                   // Q1 or Q2
  std::function<CMatrix(double)> of_time;  // Q(t) at first-Markov level
  CMatrix at(double t) const { return of_time ? of_time(t) : constant; }
};

// Scalar function of a drift eigenvalue and frequency, lifted to G.
struct DriftFn {
  enum Kind { One, Res, ExpRes, LamRes, Phi };
  Kind kind = One;
  double t = 0.0;
};
// One: 1; Res: (lambda + i w)^-1; ExpRes: e^{-lambda t} (lambda + i w)^-1;
// LamRes: lambda (lambda + i w)^-1; Phi: (1 - e^{-(lambda + i w) t}) / (lambda + i w).
cplx drift_fn(const DriftFn& f, cplx lambda, cplx w);

// coef e^{i w phase} f_left(G, w) F(w) f_right(G, w)^dag
struct ResolventTerm {
  cplx coef = 1.0;
  double phase = 0.0;
  DriftFn left;
  DriftFn right;
};

struct ResolventIntegral {
  std::vector<ResolventTerm> terms;       // analytic split used on the tails
  std::vector<ResolventTerm> core_terms;  // optional equivalent form for the real window
  bool regularize_log = false;            // drop c ln(cutoff) from 1/w tails
};

// int dw/2pi of the sum of terms, in the site basis (no eps^2 factor).
CMatrix integrate_resolvent(const OpenSystem& sys, const NonHermitianSystem& nh, const ResolventIntegral& spec,
                            const QuadOptions& opt = {}, QuadStats* stats = nullptr);

// e^{-G t}
CMatrix drift_propagator(const NonHermitianSystem& nh, double t);

CMatrix build_C_xi(const OpenSystem& sys, const NonHermitianSystem& nh, double t, const QuadOptions& opt = {});
// C_xi(t + tau, t)
CMatrix build_C_xi_two_time(const OpenSystem& sys, const NonHermitianSystem& nh, double t, double tau,
                            const QuadOptions& opt = {});
CMatrix build_Q_first_markov(const OpenSystem& sys, const NonHermitianSystem& nh, double t,
                             const QuadOptions& opt = {});
CMatrix build_Q1(const OpenSystem& sys, const NonHermitianSystem& nh, const QuadOptions& opt = {},
                 QuadStats* stats = nullptr);
CMatrix build_Q2(const OpenSystem& sys, const QuadOptions& opt = {});
// Contribution of a single bath (by index) to Q1.
CMatrix build_Q1_bath(const OpenSystem& sys, const NonHermitianSystem& nh, int bath, const QuadOptions& opt = {});
InhomogeneitySource build_Q(Level level, const OpenSystem& sys, const NonHermitianSystem& nh,
                            const QuadOptions& opt = {});

struct SolveInfo {
  std::string method;
  double residual = 0.0;
  double hermiticity_defect = 0.0;
  std::vector<std::string> warnings;
};

// G C + C G^dag = eps^2 Q
CorrelationMatrix solve_algebraic(const CMatrix& g, const CMatrix& q, double eps, SolveInfo* info = nullptr);
CMatrix solve_algebraic_schur(const CMatrix& g, const CMatrix& rhs);
CMatrix solve_algebraic_kronecker(const CMatrix& g, const CMatrix& rhs);
double lyapunov_residual(const CMatrix& g, const CMatrix& c, const CMatrix& q, double eps);

std::vector<CorrelationMatrix> solve_differential(Level level, const OpenSystem& sys, const NonHermitianSystem& nh,
                                                  const CMatrix& c0, const std::vector<double>& times,
                                                  const QuadOptions& opt = {}, SolveInfo* info = nullptr,
                                                  QuadStats* stats = nullptr);

// Constant-source dynamics e^{-Gt} C0 e^{-G^dag t} + eps^2 int_0^t e^{-Gs} Q e^{-G^dag s} ds.
std::vector<CorrelationMatrix> evolve_constant_source(const NonHermitianSystem& nh, const CMatrix& q,
                                                      const CMatrix& c0, const std::vector<double>& times,
                                                      SolveInfo* info = nullptr);

// First-Markov C(t1, t2) including the homogeneous part.
CMatrix first_markov_two_time(const OpenSystem& sys, const NonHermitianSystem& nh, const CMatrix& c0, double t1,
                              double t2, const QuadOptions& opt = {}, QuadStats* stats = nullptr);

CorrelationMatrix ness_first_markov(const OpenSystem& sys, const NonHermitianSystem& nh, const QuadOptions& opt = {},
                                    QuadStats* stats = nullptr);

CorrelationMatrix solve_ness(Level level, const OpenSystem& sys, const NonHermitianSystem& nh,
                             const QuadOptions& opt = {}, SolveInfo* info = nullptr, QuadStats* stats = nullptr);

}  // namespace lyapoqs
