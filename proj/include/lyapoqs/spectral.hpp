#pragma once

#include <string>
#include <variant>
#include <vector>

#include "lyapoqs/quadrature.hpp"
#include "lyapoqs/types.hpp"

namespace lyapoqs {

enum class Statistics { Fermionic, Bosonic };

const char* to_string(Statistics s);

struct WideBand {
  double gamma;
};

// J(w) = gamma * width^2 / ((w - center)^2 + width^2), so J(center) = gamma.
struct Lorentzian {
  double gamma;
  double center;
  double width;
};

// J(w) = coupling * cutoff * (w / cutoff)^power * exp(-w / cutoff) for w > 0.
struct OhmicExp {
  double coupling;
  double cutoff;
  double power;
};

// Piecewise-linear interpolation on a strictly increasing grid, zero outside.
struct Tabulated {
  std::vector<double> omega;
  std::vector<double> values;
};

class SpectralFunction {
 public:
  using Shape = std::variant<WideBand, Lorentzian, OhmicExp, Tabulated>;

  explicit SpectralFunction(Shape shape);

  static SpectralFunction wide_band(double gamma);
  static SpectralFunction lorentzian(double gamma, double center, double width);
  static SpectralFunction ohmic_exp(double coupling, double cutoff, double power);
  static SpectralFunction tabulated(std::vector<double> omega, std::vector<double> values);
  static SpectralFunction tabulated_csv(const std::string& path);

  const Shape& shape() const { return shape_; }
  bool is_wide_band() const { return std::holds_alternative<WideBand>(shape_); }
  // Shapes with a closed-form continuation off the real axis.
  bool analytic() const;

  double operator()(double omega) const;
  cplx continued(cplx z) const;

  double support_min() const;
  double support_max() const;
  // Upper frequency beyond which J is below 1e-17 of its peak.
  double effective_max() const;
  double peak() const;
  std::vector<double> features() const;

 private:
  Shape shape_;
};

double eval_J(const SpectralFunction& s, double omega);

// (1/pi) PV int J(w') / (w - w') dw'. Closed form for WideBand, Lorentzian and
// Tabulated; principal-value quadrature for OhmicExp.
double hilbert_transform(const SpectralFunction& s, double omega, const QuadOptions& opt = {});

struct BathAttachment {
  int site = 0;
  SpectralFunction spectral = SpectralFunction::wide_band(0.0);
  double beta = 1.0;
  double mu = 0.0;
  Statistics statistics = Statistics::Fermionic;
};

double occupation_function(const BathAttachment& bath, double omega);
cplx occupation_continued(const BathAttachment& bath, cplx z);

// J(w) n(w) for one bath.
double bath_noise(const BathAttachment& bath, double omega);
// Continuation of J n off the real axis. Shapes without a continuation are
// compactly supported in practice and return zero off the axis.
cplx bath_noise_continued(const BathAttachment& bath, cplx z);
// Hilbert transform of J n. For wide-band fermions the logarithmic cutoff
// dependence is dropped (only differences between frequencies are physical).
double bath_noise_hilbert(const BathAttachment& bath, double omega, const QuadOptions& opt = {});

// (1/pi) int_0^inf (f(x-u) - f(x+u)) / u du, the principal value written as a
// regular integral. `features` are abscissae where f has kinks or scales.
double principal_value(const std::function<double(double)>& f, double x, const std::vector<double>& features,
                       double span, bool infinite_left, bool infinite_right, const QuadOptions& opt = {});

struct OpenSystem;

// Diagonal of the noise kernel F(w).
RVector eval_F(const OpenSystem& sys, double omega);

enum class MarkovKernel { B1, B2 };

struct TauEstimate {
  std::vector<double> tau;  // per bath; +inf when the scan never settles
  bool horizon_exceeded = false;
};

double default_tau_tolerance(const OpenSystem& sys);
TauEstimate estimate_tau_B(const OpenSystem& sys, MarkovKernel kind, double tolerance, bool throw_on_horizon = false);
// |int dw/2pi J e^{-iwt}| (B1) or |int dw/2pi J n e^{iwt}| (B2) for one bath.
double markov_kernel(const BathAttachment& bath, MarkovKernel kind, double t, const QuadOptions& opt = {});

}  // namespace lyapoqs
