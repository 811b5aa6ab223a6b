#include <doctest.h>

#include <cmath>

#include "lyapoqs/errors.hpp"
#include "lyapoqs/model.hpp"
#include "lyapoqs/spectral.hpp"
#include "support.hpp"

using namespace lyapoqs;

TEST_CASE("scalar hamiltonian") {
  CMatrix h(1, 1);
  h(0, 0) = 0.7;
  const auto d = diagonalize(h);
  CHECK(d.omega(0) == doctest::Approx(0.7));
  CHECK(std::abs(d.phi(0, 0) - 1.0) < 1e-15);
}

TEST_CASE("two-site symmetric hamiltonian") {
  const double g = 0.8;
  const auto d = diagonalize(tridiagonal_hamiltonian({0.0, 0.0}, {g}));
  CHECK(d.omega(0) == doctest::Approx(-g));
  CHECK(d.omega(1) == doctest::Approx(g));
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(d.phi(0, 0) - s) < 1e-14);
  CHECK(std::abs(d.phi(1, 0) + s) < 1e-14);
  CHECK(std::abs(d.phi(0, 1) - s) < 1e-14);
  CHECK(std::abs(d.phi(1, 1) - s) < 1e-14);
  CHECK(d.real);
}

TEST_CASE("uniform chain spectrum") {
  const auto d = diagonalize(tridiagonal_hamiltonian(std::vector<double>(5, 0.0), std::vector<double>(4, 1.0)));
  for (int k = 1; k <= 5; ++k) CHECK(d.omega(5 - k) == doctest::Approx(2.0 * std::cos(kPi * k / 6.0)).epsilon(1e-13));
  CHECK(!d.degenerate);
}

TEST_CASE("degenerate cluster ordering is deterministic") {
  CMatrix h = CMatrix::Zero(3, 3);
  h(2, 2) = 1.0;
  const auto d = diagonalize(h);
  CHECK(d.degenerate);
  CHECK(std::abs(d.phi(0, 0) - 1.0) < 1e-14);
  CHECK(std::abs(d.phi(1, 1) - 1.0) < 1e-14);
}

TEST_CASE("input validation") {
  CMatrix h(2, 2);
  h << 0.0, 1.0, 0.5, 0.0;
  CHECK_THROWS_AS(build_system(h, {}, 0.1, Statistics::Fermionic), Error);
  const CMatrix ok = tridiagonal_hamiltonian({0.0, 0.0}, {1.0});
  std::vector<BathAttachment> far = {{5, SpectralFunction::wide_band(1.0), 1.0, 0.0, Statistics::Fermionic}};
  try {
    build_system(ok, far, 0.1, Statistics::Fermionic);
    FAIL("expected SiteOutOfRange");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SiteOutOfRange);
  }
  std::vector<BathAttachment> wide_boson = {{0, SpectralFunction::wide_band(1.0), 1.0, -1.0, Statistics::Bosonic}};
  try {
    build_system(ok, wide_boson, 0.1, Statistics::Bosonic);
    FAIL("expected BosonicWideBand");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BosonicWideBand);
  }
}

TEST_CASE("occupation functions") {
  BathAttachment f{0, SpectralFunction::wide_band(1.0), 2.0, 0.3, Statistics::Fermionic};
  CHECK(occupation_function(f, 0.3) == doctest::Approx(0.5));
  f.beta = 1e6;
  CHECK(occupation_function(f, 0.4) < 1e-30);
  CHECK(occupation_function(f, 0.2) == doctest::Approx(1.0));
  BathAttachment b{0, SpectralFunction::ohmic_exp(1.0, 5.0, 1.0), 1.0, 0.0, Statistics::Bosonic};
  double series = 0.0;
  for (int k = 1; k < 60; ++k) series += std::exp(-k);
  CHECK(occupation_function(b, 1.0) == doctest::Approx(series).epsilon(1e-14));
  CHECK(occupation_function(b, 1.0) == doctest::Approx(0.5819767068693265).epsilon(1e-14));
}

TEST_CASE("spectral function values") {
  CHECK(SpectralFunction::wide_band(0.5)(17.3) == 0.5);
  CHECK(SpectralFunction::lorentzian(1.3, 0.4, 2.0)(0.4) == doctest::Approx(1.3));
  CHECK(SpectralFunction::tabulated({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0})(0.5) == doctest::Approx(1.0));
  CHECK(SpectralFunction::tabulated({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0})(3.0) == 0.0);
}

TEST_CASE("hilbert transforms") {
  CHECK(hilbert_transform(SpectralFunction::wide_band(2.0), 0.7) == 0.0);
  CHECK(std::abs(hilbert_transform(SpectralFunction::lorentzian(1.0, 0.3, 1.5), 0.3)) < 1e-14);
  // Lorentzian closed form gamma w (x - c) / ((x - c)^2 + w^2).
  CHECK(hilbert_transform(SpectralFunction::lorentzian(1.0, 0.3, 1.5), 1.1) ==
        doctest::Approx(1.5 * 0.8 / (0.64 + 2.25)).epsilon(1e-12));

  // Triangle on [0, 2]: PV oracle from a dense symmetric midpoint rule.
  const auto tri = SpectralFunction::tabulated({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0});
  auto oracle = [&](double x) {
    const int m = 2000000;
    const double r = 4.0;
    double s = 0.0;
    for (int k = 0; k < m; ++k) {
      const double u = (k + 0.5) * r / m;
      s += (tri(x - u) - tri(x + u)) / u;
    }
    return s * r / m / kPi;
  };
  for (double x : {0.3, 1.0, 2.5}) CHECK(hilbert_transform(tri, x) == doctest::Approx(oracle(x)).epsilon(1e-6));
}

TEST_CASE("noise matrix") {
  const CMatrix h = tridiagonal_hamiltonian({0.0, 0.0}, {1.0});
  const double gl = 0.7, gr = 0.4;
  std::vector<BathAttachment> baths = {{0, SpectralFunction::wide_band(gl), 1.0, 0.5, Statistics::Fermionic},
                                       {0, SpectralFunction::wide_band(gr), 2.0, -0.5, Statistics::Fermionic}};
  const OpenSystem sys = build_system(h, baths, 0.1, Statistics::Fermionic);
  const double w = 0.2;
  const RVector f = eval_F(sys, w);
  CHECK(f(1) == 0.0);
  CHECK(f(0) == doctest::Approx(gl * testsupport::fermi(1.0, 0.5, w) + gr * testsupport::fermi(2.0, -0.5, w)));

  std::vector<BathAttachment> cold = {{0, SpectralFunction::wide_band(gl), 1e8, 0.1, Statistics::Fermionic}};
  const OpenSystem s2 = build_system(h, cold, 0.1, Statistics::Fermionic);
  CHECK(eval_F(s2, 0.0)(0) == doctest::Approx(gl));
  CHECK(eval_F(s2, 0.2)(0) == doctest::Approx(0.0));
}

TEST_CASE("memory time estimates") {
  const CMatrix h = tridiagonal_hamiltonian({0.0}, {});
  const OpenSystem wb = build_system(
      h, {{0, SpectralFunction::wide_band(1.0), 1.0, 0.0, Statistics::Fermionic}}, 0.1, Statistics::Fermionic);
  CHECK(estimate_tau_B(wb, MarkovKernel::B1, 1e-3).tau[0] == 0.0);

  const double gamma = 1.0, width = 2.0, tol = 1e-3;
  const OpenSystem lz = build_system(
      h, {{0, SpectralFunction::lorentzian(gamma, 0.0, width), 1.0, 0.0, Statistics::Fermionic}}, 0.1,
      Statistics::Fermionic);
  // Kernel is gamma w / 2 exp(-w t).
  const double expected = std::log(gamma * width / 2.0 / tol) / width;
  CHECK(estimate_tau_B(lz, MarkovKernel::B1, tol).tau[0] == doctest::Approx(expected).epsilon(0.08));

  auto tau2 = [&](double beta) {
    const OpenSystem s = build_system(
        h, {{0, SpectralFunction::wide_band(1.0), beta, 0.0, Statistics::Fermionic}}, 0.1, Statistics::Fermionic);
    return estimate_tau_B(s, MarkovKernel::B2, 1e-3).tau[0];
  };
  const double t1 = tau2(1.0), t4 = tau2(4.0);
  CHECK(std::isfinite(t1));
  CHECK(t1 > 0.0);
  CHECK(t4 > t1);
}
