#include "lyapoqs/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <fmt/format.h>

#include "lyapoqs/errors.hpp"

namespace lyapoqs {

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
  int segment;
  double a;
  double b;
  CVector value;
  double error;
  long id;
};

struct ByError {
  const std::vector<Interval>* pool;
  bool operator()(int x, int y) const {
    const auto& p = (*pool)[x];
    const auto& q = (*pool)[y];
    if (p.error != q.error) return p.error < q.error;
    return p.id > q.id;
  }
};

void gk15(const VectorFn& f, double a, double b, int dim, CVector& kron, double& err, CVector& work) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  CVector gauss = CVector::Zero(dim);
  kron.setZero(dim);
  work.resize(dim);
  f(c, work);
  kron += kWgk[7] * work;
  gauss += kWg[3] * work;
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    f(c - dx, work);
    kron += kWgk[j] * work;
    if (j % 2 == 1) gauss += kWg[j / 2] * work;
    f(c + dx, work);
    kron += kWgk[j] * work;
    if (j % 2 == 1) gauss += kWg[j / 2] * work;
  }
  kron *= h;
  gauss *= h;
  err = dim == 0 ? 0.0 : (kron - gauss).cwiseAbs().maxCoeff();
  if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
}

}  // namespace

CVector integrate_segments(const std::vector<Segment>& segments, int dim, const QuadOptions& opt,
                           QuadStats* stats) {
  std::vector<Interval> pool;
  pool.reserve(256);
  long next_id = 0;
  long evals = 0;
  CVector work;
  auto evaluate = [&](int seg, double a, double b) {
    Interval iv{seg, a, b, CVector(), 0.0, next_id++};
    gk15(segments[seg].f, a, b, dim, iv.value, iv.error, work);
    evals += 15;
    return iv;
  };

  std::priority_queue<int, std::vector<int>, ByError> queue(ByError{&pool});
  CVector total = CVector::Zero(dim);
  double total_err = 0.0;
  for (int s = 0; s < static_cast<int>(segments.size()); ++s) {
    if (!(segments[s].b > segments[s].a)) continue;
    pool.push_back(evaluate(s, segments[s].a, segments[s].b));
    total += pool.back().value;
    total_err += pool.back().error;
    queue.push(static_cast<int>(pool.size()) - 1);
  }

  std::vector<char> active(pool.size(), 1);
  bool converged = true;
  int live = static_cast<int>(pool.size());
  while (!queue.empty()) {
    const double scale = dim == 0 ? 0.0 : total.cwiseAbs().maxCoeff();
    if (total_err <= std::max(opt.abs_tol, opt.rel_tol * scale)) break;
    if (live >= opt.max_intervals) {
      converged = false;
      break;
    }
    const int top = queue.top();
    const double a = pool[top].a;
    const double b = pool[top].b;
    const double mid = 0.5 * (a + b);
    if (!(mid > a && mid < b) || (b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b))) {
      // Cannot refine further; leave the interval as is.
      if (pool[top].error > std::max(opt.abs_tol, opt.rel_tol * scale)) converged = false;
      break;
    }
    queue.pop();
    active[top] = 0;
    total -= pool[top].value;
    total_err -= pool[top].error;
    const int seg = pool[top].segment;
    Interval left = evaluate(seg, a, mid);
    Interval right = evaluate(seg, mid, b);
    total += left.value + right.value;
    total_err += left.error + right.error;
    pool.push_back(std::move(left));
    active.push_back(1);
    queue.push(static_cast<int>(pool.size()) - 1);
    pool.push_back(std::move(right));
    active.push_back(1);
    queue.push(static_cast<int>(pool.size()) - 1);
    ++live;
  }

  // Re-sum in creation order to avoid accumulated cancellation drift.
  CVector result = CVector::Zero(dim);
  double err = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!active[i]) continue;
    result += pool[i].value;
    err += pool[i].error;
  }
  if (!std::isfinite(err)) converged = false;
  if (stats) {
    stats->error += err;
    stats->evaluations += evals;
    stats->intervals += live;
    stats->converged = stats->converged && converged;
  }
  return result;
}

CVector integrate_vector(const VectorFn& f, const std::vector<double>& breaks, int dim, const QuadOptions& opt,
                         QuadStats* stats) {
  std::vector<Segment> segs;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) segs.push_back({f, breaks[i], breaks[i + 1]});
  return integrate_segments(segs, dim, opt, stats);
}

double integrate_scalar(const std::function<double(double)>& f, const std::vector<double>& breaks,
                        const QuadOptions& opt, QuadStats* stats) {
  VectorFn g = [&f](double x, CVector& out) { out(0) = f(x); };
  return integrate_vector(g, breaks, 1, opt, stats)(0).real();
}

void require_converged(const QuadStats& stats, const char* what) {
  if (!stats.converged)
    throw Error(ErrorKind::QuadratureNonConvergence,
                fmt::format("{}: quadrature did not converge (error estimate {:.3e}, {} intervals)", what,
                            stats.error, stats.intervals));
}

std::vector<double> clean_breaks(std::vector<double> pts, double lo, double hi) {
  std::vector<double> out{lo, hi};
  for (double p : pts)
    if (std::isfinite(p) && p > lo && p < hi) out.push_back(p);
  std::sort(out.begin(), out.end());
  std::vector<double> uniq;
  const double tiny = 1e-14 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  for (double p : out)
    if (uniq.empty() || p - uniq.back() > tiny) uniq.push_back(p);
  if (uniq.back() != hi) uniq.back() = hi;
  return uniq;
}

}  // namespace lyapoqs
