#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "udw/kinematics.hpp"

using namespace udw;

TEST_CASE("detector dispersion at rest and with a Pythagorean momentum") {
  Species s = make_species(1.0, 0.5);
  CHECK(dispersion_detector(0.0, 0, s) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dispersion_detector(0.0, 1, s) == doctest::Approx(1.5).epsilon(1e-15));
  Species heavy = make_species(4.0, 0.0);
  CHECK(dispersion_detector(3.0, 0, heavy) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("photon dispersion is |k|") {
  CHECK(dispersion_photon(0.75) == 0.75);
  CHECK(dispersion_photon(-2.0) == 2.0);
  CHECK(dispersion_photon(0.0) == 0.0);
}

TEST_CASE("boost of single momenta") {
  CHECK(boost_momentum(0.0, std::asinh(1.0), 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(boost_momentum(1.7, 0.0, 2.3) == doctest::Approx(1.7).epsilon(1e-14));
  CHECK(boost_momentum(-0.4, 0.0, 0.0) == doctest::Approx(-0.4).epsilon(1e-14));
  // Massless momenta scale by e^{xi} on the positive branch.
  CHECK(boost_momentum(2.0, std::log(2.0), 0.0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(boost_momentum(-2.0, std::log(2.0), 0.0) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("gamma factors") {
  CHECK(gamma_of(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gamma_of(3.0, 4.0) == doctest::Approx(1.25).epsilon(1e-15));
  double eta = 0.83;
  CHECK(gamma_of(2.0 * std::sinh(eta), 2.0) == doctest::Approx(std::cosh(eta)).epsilon(1e-14));
  CHECK_THROWS_AS(gamma_of(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("rapidity additivity, massive and massless") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> up(-3.0, 3.0), uxi(-1.5, 1.5);
  for (int i = 0; i < 200; ++i) {
    double p = up(rng), x1 = uxi(rng), x2 = uxi(rng);
    for (double m : {0.0, 0.5, 2.0}) {
      double two_step = boost_momentum(boost_momentum(p, x1, m), x2, m);
      double one_step = boost_momentum(p, x1 + x2, m);
      CHECK(two_step == doctest::Approx(one_step).epsilon(1e-12));
    }
  }
}

TEST_CASE("energy covariance: (omega, p) transforms as a 1+1D Lorentz vector") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> up(-3.0, 3.0), uxi(-1.5, 1.5);
  for (int i = 0; i < 200; ++i) {
    double p = up(rng), xi = uxi(rng);
    for (double m : {0.0, 0.7, 3.1}) {
      double w = m > 0.0 ? dispersion_massive(p, m) : dispersion_photon(p);
      double pb = boost_momentum(p, xi, m);
      double wb = m > 0.0 ? dispersion_massive(pb, m) : dispersion_photon(pb);
      CHECK(wb == doctest::Approx(std::cosh(xi) * w + std::sinh(xi) * p).epsilon(1e-12));
      CHECK(pb == doctest::Approx(std::cosh(xi) * p + std::sinh(xi) * w).epsilon(1e-12));
    }
  }
}

TEST_CASE("velocity-rapidity consistency and BoostParam invariant") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> ue(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    double eta = ue(rng);
    double m = 1.3;
    CHECK(gamma_of(m * std::sinh(eta), m) * std::tanh(eta) ==
          doctest::Approx(std::sinh(eta)).epsilon(1e-12));
    BoostParam b{eta};
    double g = b.gamma(), gv = b.gamma() * b.velocity();
    CHECK(g * g - gv * gv == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g >= 1.0);
  }
}
