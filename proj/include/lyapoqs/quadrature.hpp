#pragma once

#include <functional>
#include <vector>

#include "lyapoqs/types.hpp"

namespace lyapoqs {

struct QuadOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_intervals = 200000;
};

struct QuadStats {
  double error = 0.0;
  long evaluations = 0;
  int intervals = 0;
  bool converged = true;
};

// Vector-valued integrand; `out` is pre-sized to the integrand dimension.
using VectorFn = std::function<void(double, CVector&)>;

struct Segment {
  VectorFn f;
  double a;
  double b;
};

// Adaptive Gauss-Kronrod (7/15) over a union of segments with one global
// error budget. Intervals are refined in order of decreasing error; ties are
// broken by creation order so the result is deterministic.
CVector integrate_segments(const std::vector<Segment>& segments, int dim, const QuadOptions& opt = {},
                           QuadStats* stats = nullptr);

// Integrate over [breaks.front(), breaks.back()] split at every break point.
CVector integrate_vector(const VectorFn& f, const std::vector<double>& breaks, int dim,
                         const QuadOptions& opt = {}, QuadStats* stats = nullptr);

double integrate_scalar(const std::function<double(double)>& f, const std::vector<double>& breaks,
                        const QuadOptions& opt = {}, QuadStats* stats = nullptr);

// Throws QuadratureNonConvergence when stats report failure.
void require_converged(const QuadStats& stats, const char* what);

// Sorted, de-duplicated copy clipped to [lo, hi] with lo and hi included.
std::vector<double> clean_breaks(std::vector<double> pts, double lo, double hi);

}  // namespace lyapoqs
