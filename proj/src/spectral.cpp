#include "lyapoqs/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "lyapoqs/errors.hpp"
#include "lyapoqs/frequency.hpp"
#include "lyapoqs/model.hpp"
#include "lyapoqs/special.hpp"

namespace lyapoqs {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double ohmic_xmax(const OhmicExp& o) { return 50.0 + 3.0 * o.power; }

void check_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw Error(ErrorKind::InvalidArgument, fmt::format("{} must be positive and finite, got {}", name, x));
}

}  // namespace

const char* to_string(Statistics s) { return s == Statistics::Fermionic ? "fermion" : "boson"; }

SpectralFunction::SpectralFunction(Shape shape) : shape_(std::move(shape)) {
  std::visit(overloaded{
                 [](const WideBand& w) {
                   if (!(w.gamma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "wide-band gamma must be >= 0");
                 },
                 [](const Lorentzian& l) {
                   if (!(l.gamma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "lorentzian gamma must be >= 0");
                   check_positive(l.width, "lorentzian width");
                 },
                 [](const OhmicExp& o) {
                   if (!(o.coupling >= 0.0)) throw Error(ErrorKind::InvalidArgument, "ohmic coupling must be >= 0");
                   check_positive(o.cutoff, "ohmic cutoff");
                   check_positive(o.power, "ohmic power");
                 },
                 [](const Tabulated& t) {
                   if (t.omega.size() != t.values.size() || t.omega.size() < 2)
                     throw Error(ErrorKind::InvalidArgument, "tabulated spectral function needs >= 2 matching points");
                   for (std::size_t i = 1; i < t.omega.size(); ++i)
                     if (!(t.omega[i] > t.omega[i - 1]))
                       throw Error(ErrorKind::InvalidArgument, "tabulated grid must be strictly increasing");
                   for (double v : t.values)
                     if (!(v >= 0.0) || !std::isfinite(v))
                       throw Error(ErrorKind::InvalidArgument, "tabulated values must be finite and >= 0");
                 },
             },
             shape_);
}

SpectralFunction SpectralFunction::wide_band(double gamma) { return SpectralFunction(WideBand{gamma}); }
SpectralFunction SpectralFunction::lorentzian(double gamma, double center, double width) {
  return SpectralFunction(Lorentzian{gamma, center, width});
}
SpectralFunction SpectralFunction::ohmic_exp(double coupling, double cutoff, double power) {
  return SpectralFunction(OhmicExp{coupling, cutoff, power});
}
SpectralFunction SpectralFunction::tabulated(std::vector<double> omega, std::vector<double> values) {
  return SpectralFunction(Tabulated{std::move(omega), std::move(values)});
}

SpectralFunction SpectralFunction::tabulated_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, fmt::format("cannot open spectral table '{}'", path));
  std::vector<double> w, j;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double a, b;
    if (!(ss >> a >> b)) {
      if (w.empty()) continue;  // header row
      throw Error(ErrorKind::Config, fmt::format("{}:{}: expected two numeric columns", path, lineno));
    }
    w.push_back(a);
    j.push_back(b);
  }
  return tabulated(std::move(w), std::move(j));
}

bool SpectralFunction::analytic() const {
  return std::holds_alternative<WideBand>(shape_) || std::holds_alternative<Lorentzian>(shape_);
}

double SpectralFunction::operator()(double omega) const {
  return std::visit(overloaded{
                        [](const WideBand& w) { return w.gamma; },
                        [omega](const Lorentzian& l) {
                          const double d = omega - l.center;
                          return l.gamma * l.width * l.width / (d * d + l.width * l.width);
                        },
                        [omega](const OhmicExp& o) {
                          if (omega <= 0.0) return 0.0;
                          const double x = omega / o.cutoff;
                          return o.coupling * o.cutoff * std::pow(x, o.power) * std::exp(-x);
                        },
                        [omega](const Tabulated& t) {
                          if (omega < t.omega.front() || omega > t.omega.back()) return 0.0;
                          auto it = std::upper_bound(t.omega.begin(), t.omega.end(), omega);
                          std::size_t i = static_cast<std::size_t>(it - t.omega.begin());
                          if (i >= t.omega.size()) return t.values.back();
                          const double x0 = t.omega[i - 1], x1 = t.omega[i];
                          const double a = (omega - x0) / (x1 - x0);
                          return (1.0 - a) * t.values[i - 1] + a * t.values[i];
                        },
                    },
                    shape_);
}

cplx SpectralFunction::continued(cplx z) const {
  if (z.imag() == 0.0) return (*this)(z.real());
  if (const auto* w = std::get_if<WideBand>(&shape_)) return w->gamma;
  if (const auto* l = std::get_if<Lorentzian>(&shape_)) {
    const cplx d = z - l->center;
    return l->gamma * l->width * l->width / (d * d + l->width * l->width);
  }
  return 0.0;
}

double SpectralFunction::support_min() const {
  return std::visit(overloaded{
                        [](const WideBand&) { return -std::numeric_limits<double>::infinity(); },
                        [](const Lorentzian&) { return -std::numeric_limits<double>::infinity(); },
                        [](const OhmicExp&) { return 0.0; },
                        [](const Tabulated& t) { return t.omega.front(); },
                    },
                    shape_);
}

double SpectralFunction::support_max() const {
  return std::visit(overloaded{
                        [](const WideBand&) { return std::numeric_limits<double>::infinity(); },
                        [](const Lorentzian&) { return std::numeric_limits<double>::infinity(); },
                        [](const OhmicExp&) { return std::numeric_limits<double>::infinity(); },
                        [](const Tabulated& t) { return t.omega.back(); },
                    },
                    shape_);
}

double SpectralFunction::effective_max() const {
  if (const auto* o = std::get_if<OhmicExp>(&shape_)) return o->cutoff * ohmic_xmax(*o);
  return support_max();
}

double SpectralFunction::peak() const {
  return std::visit(overloaded{
                        [](const WideBand& w) { return w.gamma; },
                        [](const Lorentzian& l) { return l.gamma; },
                        [](const OhmicExp& o) {
                          return o.coupling * o.cutoff * std::pow(o.power, o.power) * std::exp(-o.power);
                        },
                        [](const Tabulated& t) { return *std::max_element(t.values.begin(), t.values.end()); },
                    },
                    shape_);
}

std::vector<double> SpectralFunction::features() const {
  return std::visit(overloaded{
                        [](const WideBand&) { return std::vector<double>{}; },
                        [](const Lorentzian& l) {
                          std::vector<double> p;
                          for (double k : {0.0, 1.0, -1.0, 5.0, -5.0, 20.0, -20.0}) p.push_back(l.center + k * l.width);
                          return p;
                        },
                        [](const OhmicExp& o) {
                          std::vector<double> p{0.0};
                          for (double x : {0.01, 0.1, o.power, 1.0, 3.0, 10.0, 25.0, ohmic_xmax(o)}) p.push_back(x * o.cutoff);
                          return p;
                        },
                        [](const Tabulated& t) { return t.omega; },
                    },
                    shape_);
}

double eval_J(const SpectralFunction& s, double omega) { return s(omega); }

double principal_value(const std::function<double(double)>& f, double x, const std::vector<double>& features,
                       double span, bool infinite_left, bool infinite_right, const QuadOptions& opt) {
  std::vector<double> ub{0.0};
  double umax = 0.0;
  for (double p : features) {
    if (!std::isfinite(p)) continue;
    ub.push_back(std::abs(p - x));
    umax = std::max(umax, std::abs(p - x));
  }
  umax += std::max(span, 1e-12);
  auto g = [&f, x](double u) { return (f(x - u) - f(x + u)) / u; };
  std::vector<Segment> segs;
  VectorFn gv = [&g](double u, CVector& out) { out(0) = g(u); };
  const auto breaks = clean_breaks(ub, 0.0, umax);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) segs.push_back({gv, breaks[i], breaks[i + 1]});
  if (infinite_left || infinite_right) {
    const double L = umax;
    segs.push_back({[&g, umax, L](double t, CVector& out) {
                      const double u = umax + L * t / (1.0 - t);
                      const double jac = L / ((1.0 - t) * (1.0 - t));
                      out(0) = std::isfinite(jac) ? g(u) * jac : 0.0;
                    },
                    0.0, 1.0});
  }
  QuadStats stats;
  const double val = integrate_segments(segs, 1, opt, &stats)(0).real();
  require_converged(stats, "principal-value integral");
  return val / kPi;
}

double hilbert_transform(const SpectralFunction& s, double omega, const QuadOptions& opt) {
  return std::visit(
      overloaded{
          [](const WideBand&) { return 0.0; },
          [omega](const Lorentzian& l) {
            const double d = omega - l.center;
            return l.gamma * l.width * d / (d * d + l.width * l.width);
          },
          [&](const OhmicExp& o) {
            return principal_value([&s](double w) { return s(w); }, omega, s.features(), o.cutoff, false, false, opt);
          },
          [omega](const Tabulated& t) {
            // Exact transform of the piecewise-linear interpolant.
            const std::size_t n = t.omega.size();
            double acc = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
              const double a = t.omega[i], b = t.omega[i + 1];
              const double q = (t.values[i + 1] - t.values[i]) / (b - a);
              acc -= q * (b - a);
            }
            for (std::size_t k = 0; k < n; ++k) {
              double coeff = 0.0;
              const double xk = t.omega[k];
              if (k + 1 < n) {
                const double q = (t.values[k + 1] - t.values[k]) / (t.omega[k + 1] - xk);
                coeff += t.values[k] + q * (omega - xk);
              }
              if (k > 0) {
                const double q = (t.values[k] - t.values[k - 1]) / (xk - t.omega[k - 1]);
                coeff -= t.values[k] + q * (omega - xk);
              }
              const double d = std::abs(omega - xk);
              if (coeff == 0.0) continue;
              if (d == 0.0) {
                if (std::abs(coeff) < 1e-14 * (1.0 + std::abs(t.values[k])))
                  continue;
                return coeff > 0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
              }
              acc += coeff * std::log(d);
            }
            return acc / kPi;
          },
      },
      s.shape());
}

double occupation_function(const BathAttachment& bath, double omega) {
  const double x = bath.beta * (omega - bath.mu);
  if (bath.statistics == Statistics::Fermionic) return fermi_factor(x);
  if (!(omega > bath.mu))
    throw Error(ErrorKind::BosonicDivergence,
                fmt::format("bose occupation diverges for omega={} <= mu={}", omega, bath.mu));
  return bose_factor(x);
}

cplx occupation_continued(const BathAttachment& bath, cplx z) {
  const cplx x = bath.beta * (z - bath.mu);
  return bath.statistics == Statistics::Fermionic ? fermi_factor(x) : bose_factor(x);
}

double bath_noise(const BathAttachment& bath, double omega) {
  const double j = bath.spectral(omega);
  if (j == 0.0) return 0.0;
  return j * occupation_function(bath, omega);
}

cplx bath_noise_continued(const BathAttachment& bath, cplx z) {
  if (z.imag() == 0.0) return bath_noise(bath, z.real());
  if (!bath.spectral.analytic()) return 0.0;
  return bath.spectral.continued(z) * occupation_continued(bath, z);
}

double bath_noise_hilbert(const BathAttachment& bath, double omega, const QuadOptions& opt) {
  if (const auto* wb = std::get_if<WideBand>(&bath.spectral.shape())) {
    if (bath.statistics != Statistics::Fermionic)
      throw Error(ErrorKind::BosonicWideBand, "wide-band bosonic baths are not supported");
    const cplx z(0.5, bath.beta * (omega - bath.mu) / (2.0 * kPi));
    return wb->gamma / kPi * (-digamma(z).real() + std::log(bath.beta / (2.0 * kPi)));
  }
  std::vector<double> feats = bath.spectral.features();
  const double kt = 1.0 / bath.beta;
  for (double k : {0.0, 1.0, -1.0, 5.0, -5.0, 40.0, -40.0}) feats.push_back(bath.mu + k * kt);
  const bool lor = bath.spectral.analytic();
  const bool left = lor && bath.statistics == Statistics::Fermionic;
  double span = kt;
  if (const auto* l = std::get_if<Lorentzian>(&bath.spectral.shape())) span = std::max(span, l->width);
  return principal_value([&bath](double w) { return bath_noise(bath, w); }, omega, feats, span, left, lor, opt);
}

RVector eval_F(const OpenSystem& sys, double omega) {
  RVector f = RVector::Zero(sys.n_sites());
  for (const auto& b : sys.baths) f(b.site) += bath_noise(b, omega);
  return f;
}

double default_tau_tolerance(const OpenSystem& sys) {
  double jmax = 0.0;
  for (const auto& b : sys.baths) jmax = std::max(jmax, b.spectral.peak());
  return sys.epsilon * jmax / (2.0 * kPi);
}

double markov_kernel(const BathAttachment& bath, MarkovKernel kind, double t, const QuadOptions& opt) {
  const FrequencyWindow win = make_window({bath}, {});
  SpectralIntegrand in;
  in.dim = 1;
  PhasedPiece p;
  if (kind == MarkovKernel::B1) {
    p.phase = -t;
    p.eval = [&bath](cplx z, CVector& out) { out(0) = bath.spectral.continued(z); };
  } else {
    p.phase = t;
    p.eval = [&bath](cplx z, CVector& out) { out(0) = bath_noise_continued(bath, z); };
  }
  if (t == 0.0) {
    // The wide-band kernel is a delta function at t = 0.
    if (bath.spectral.is_wide_band()) return std::numeric_limits<double>::infinity();
  }
  in.pieces.push_back(p);
  return std::abs(integrate_frequency(win, in, opt)(0));
}

TauEstimate estimate_tau_B(const OpenSystem& sys, MarkovKernel kind, double tolerance, bool throw_on_horizon) {
  if (!(tolerance > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau_B tolerance must be positive");
  TauEstimate est;
  constexpr int kPerDecade = 32;
  for (const auto& bath : sys.baths) {
    double lo_scale = std::numeric_limits<double>::infinity();
    double hi_scale = 0.0;
    auto add = [&](double s) {
      if (s > 0 && std::isfinite(s)) {
        lo_scale = std::min(lo_scale, s);
        hi_scale = std::max(hi_scale, s);
      }
    };
    if (const auto* l = std::get_if<Lorentzian>(&bath.spectral.shape())) add(l->width);
    if (const auto* o = std::get_if<OhmicExp>(&bath.spectral.shape())) add(o->cutoff);
    if (const auto* tb = std::get_if<Tabulated>(&bath.spectral.shape())) {
      add(tb->omega.back() - tb->omega.front());
      double dmin = tb->omega.back() - tb->omega.front();
      for (std::size_t i = 1; i < tb->omega.size(); ++i) dmin = std::min(dmin, tb->omega[i] - tb->omega[i - 1]);
      add(dmin);
    }
    if (kind == MarkovKernel::B2) add(kPi / bath.beta);
    if (!std::isfinite(lo_scale)) lo_scale = hi_scale = 1.0;
    const double t0 = 1e-3 / hi_scale;
    const double t_end = 1e4 / lo_scale;
    const int n = static_cast<int>(std::ceil(kPerDecade * std::log10(t_end / t0))) + 1;
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i) grid[i] = t0 * std::pow(10.0, static_cast<double>(i) / kPerDecade);
    int last_above = -1;
    QuadOptions opt;
    opt.abs_tol = std::min(opt.abs_tol, 1e-3 * tolerance);
    // Stop once the kernel has stayed below tolerance for two decades.
    for (int i = 0; i < n; ++i) {
      if (markov_kernel(bath, kind, grid[i], opt) > tolerance) last_above = i;
      else if (i - last_above > 2 * kPerDecade) break;
    }
    double tau;
    if (last_above < 0) {
      tau = 0.0;
    } else if (last_above + 1 >= n || grid[last_above + 1] * 10.0 > t_end) {
      tau = std::numeric_limits<double>::infinity();
      est.horizon_exceeded = true;
    } else {
      tau = grid[last_above + 1];
    }
    est.tau.push_back(tau);
  }
  if (est.horizon_exceeded && throw_on_horizon)
    throw Error(ErrorKind::ScanHorizonExceeded, "Markov time scale scan did not settle within the horizon");
  return est;
}

}  // namespace lyapoqs
