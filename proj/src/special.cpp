#include "lyapoqs/special.hpp"

#include <cmath>

namespace lyapoqs {

cplx digamma(cplx z) {
  cplx shift = 0.0;
  if (z.real() < 0.5) {
    // Reflection: psi(1-z) - psi(z) = pi cot(pi z).
    return digamma(1.0 - z) - kPi / std::tan(kPi * z);
  }
  while (std::abs(z) < 15.0) {
    shift -= 1.0 / z;
    z += 1.0;
  }
  const cplx inv = 1.0 / z;
  const cplx inv2 = inv * inv;
  // Bernoulli terms B_2k / (2k z^2k).
  const cplx series =
      inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 / 12.0))))));
  return shift + std::log(z) - 0.5 * inv - series;
}

double fermi_factor(double x) {
  if (x > 0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (std::exp(x) + 1.0);
}

cplx fermi_factor(cplx x) {
  if (x.real() > 0) {
    const cplx e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (std::exp(x) + 1.0);
}

double bose_factor(double x) { return 1.0 / std::expm1(x); }

cplx bose_factor(cplx x) {
  if (x.real() > 0) {
    const cplx e = std::exp(-x);
    return e / (1.0 - e);
  }
  return 1.0 / (std::exp(x) - 1.0);
}

}  // namespace lyapoqs
