#include "lyapoqs/frequency.hpp"

#include <algorithm>
#include <cmath>

namespace lyapoqs {

FrequencyWindow make_window(const std::vector<BathAttachment>& baths, const std::vector<cplx>& poles,
                            const std::vector<double>& extra) {
  std::vector<double> pts = extra;
  FrequencyWindow win;
  for (const auto& b : baths) {
    for (double f : b.spectral.features()) pts.push_back(f);
    if (b.spectral.peak() <= 0.0) continue;
    const double kt = 1.0 / b.beta;
    for (double k : {0.0, 1.0, -1.0, 3.0, -3.0, 10.0, -10.0}) pts.push_back(b.mu + k * kt);
    if (b.spectral.analytic()) {
      win.right_tail = true;
      if (b.statistics == Statistics::Fermionic) win.left_tail = true;
    }
  }
  for (cplx p : poles) {
    const double w = std::abs(p.imag());
    pts.push_back(p.real());
    for (double k : {1.0, 10.0}) {
      pts.push_back(p.real() - k * w);
      pts.push_back(p.real() + k * w);
    }
  }
  if (pts.empty()) pts = {-1.0, 1.0};
  double lo = *std::min_element(pts.begin(), pts.end());
  double hi = *std::max_element(pts.begin(), pts.end());
  const double pad = 0.05 * (hi - lo) + 1e-3 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  lo -= pad;
  hi += pad;
  win.lo = lo;
  win.hi = hi;
  // Decade breaks: on a very wide window every Kronrod node of a single
  // segment can miss a peak near the origin and report a zero error.
  const double reach = std::max(std::abs(lo), std::abs(hi));
  for (double d = 10.0; d < reach; d *= 10.0) {
    pts.push_back(d);
    pts.push_back(-d);
  }
  win.breaks = clean_breaks(pts, lo, hi);
  return win;
}

CVector integrate_frequency(const FrequencyWindow& win, const SpectralIntegrand& in, const QuadOptions& opt,
                            QuadStats* stats) {
  const int dim = in.dim;
  std::vector<Segment> segs;

  VectorFn core = in.core;
  if (!core) {
    core = [&in, dim](double w, CVector& out) {
      out.setZero(dim);
      CVector tmp(dim);
      for (const auto& p : in.pieces) {
        p.eval(cplx(w, 0.0), tmp);
        out += std::exp(kI * (w * p.phase)) * tmp;
      }
    };
  }
  for (std::size_t i = 0; i + 1 < win.breaks.size(); ++i) segs.push_back({core, win.breaks[i], win.breaks[i + 1]});

  const double width = std::max(win.hi - win.lo, 1e-12);
  CVector log_const = CVector::Zero(dim);

  for (const auto& piece : in.pieces) {
    const double s = piece.phase;
    const auto* pp = &piece;
    if (s != 0.0) {
      const double sigma = s > 0 ? 1.0 : -1.0;
      const double L = std::min(1.0 / std::abs(s), width);
      for (int side = 0; side < 2; ++side) {
        if (side == 0 && !win.left_tail) continue;
        if (side == 1 && !win.right_tail) continue;
        const double x0 = side == 0 ? win.lo : win.hi;
        const double sign = side == 0 ? -1.0 : 1.0;
        segs.push_back({[pp, x0, sigma, L, sign, s, dim](double u, CVector& out) {
                          const double y = L * u / (1.0 - u);
                          const double jac = L / ((1.0 - u) * (1.0 - u));
                          const cplx z(x0, sigma * y);
                          pp->eval(z, out);
                          out *= sign * std::exp(kI * z * s) * cplx(0.0, sigma) * jac;
                          if (!std::isfinite(jac) || y > 1e300) out.setZero(dim);
                        },
                        0.0, 1.0});
      }
    } else {
      const bool has_log = piece.left_log.size() == dim;
      if (win.left_tail) {
        const double x0 = win.lo;
        segs.push_back({[pp, x0, width, has_log, dim](double u, CVector& out) {
                          const double x = x0 - width * u / (1.0 - u);
                          const double jac = width / ((1.0 - u) * (1.0 - u));
                          pp->eval(cplx(x, 0.0), out);
                          if (has_log) out -= pp->left_log * (x / (x * x + 1.0));
                          out *= jac;
                          if (!std::isfinite(jac) || !std::isfinite(x)) out.setZero(dim);
                        },
                        0.0, 1.0});
        if (has_log) log_const += piece.left_log * (0.5 * std::log(x0 * x0 + 1.0));
      }
      if (win.right_tail) {
        const double x0 = win.hi;
        segs.push_back({[pp, x0, width, dim](double u, CVector& out) {
                          const double x = x0 + width * u / (1.0 - u);
                          const double jac = width / ((1.0 - u) * (1.0 - u));
                          pp->eval(cplx(x, 0.0), out);
                          out *= jac;
                          if (!std::isfinite(jac) || !std::isfinite(x)) out.setZero(dim);
                        },
                        0.0, 1.0});
      }
    }
  }

  QuadOptions scaled = opt;
  // The result is divided by 2 pi, so tighten the raw absolute target.
  scaled.abs_tol = opt.abs_tol * 2.0 * kPi;
  QuadStats local;
  CVector total = integrate_segments(segs, dim, scaled, &local);
  total += log_const;
  total /= 2.0 * kPi;
  local.error /= 2.0 * kPi;
  if (stats) {
    stats->error += local.error;
    stats->evaluations += local.evaluations;
    stats->intervals += local.intervals;
    stats->converged = stats->converged && local.converged;
  }
  require_converged(local, "frequency integral");
  return total;
}

}  // namespace lyapoqs
