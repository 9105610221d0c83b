#pragma once

#include <cmath>
#include <stdexcept>

namespace udw {

// Units: hbar = c = 1, one spatial dimension (collinear kinematics, so the
// boost algebra is exact scalars and no Wigner rotation appears).

// A massive field species with an optional two-level internal structure.
// Level a carries effective mass rest_mass + internal_gap * a.
struct Species {
  double rest_mass = 1.0;
  double internal_gap = 0.0;

  double level_mass(int level) const {
    return rest_mass + (level != 0 ? internal_gap : 0.0);
  }
};

inline Species make_species(double rest_mass, double internal_gap) {
  if (!(rest_mass > 0.0)) throw std::invalid_argument("species: rest_mass must be > 0");
  if (internal_gap < 0.0) throw std::invalid_argument("species: internal_gap must be >= 0");
  return Species{rest_mass, internal_gap};
}

// Boost parametrized by rapidity xi; v = tanh(xi), gamma = cosh(xi).
struct BoostParam {
  double rapidity = 0.0;

  double velocity() const { return std::tanh(rapidity); }
  double gamma() const { return std::cosh(rapidity); }
};

// sqrt(p^2 + m^2)
inline double dispersion_massive(double p, double m) {
  return std::hypot(p, m);
}

// Detector dispersion with level-dependent rest mass.
inline double dispersion_detector(double p, int level, const Species& s) {
  return dispersion_massive(p, s.level_mass(level));
}

// Massless dispersion |k|.
inline double dispersion_photon(double k) { return std::abs(k); }

// Rapidity of a massive on-shell momentum: p = m sinh(eta).
inline double rapidity_of(double p, double m) {
  if (!(m > 0.0)) throw std::invalid_argument("rapidity_of: m must be > 0");
  return std::asinh(p / m);
}

// Boost of a single on-shell momentum by rapidity xi.
// Massive: m sinh(eta + xi).  Massless: k scales by e^{+xi} on the k > 0
// branch and e^{-xi} on the k < 0 branch (positive-k photons blueshift
// under positive xi), preserving the sign of k.
inline double boost_momentum(double p, double xi, double m) {
  if (m < 0.0) throw std::invalid_argument("boost_momentum: m must be >= 0");
  if (m == 0.0) {
    return p >= 0.0 ? p * std::exp(xi) : p * std::exp(-xi);
  }
  return m * std::sinh(std::asinh(p / m) + xi);
}

inline double boost_momentum(double p, const BoostParam& b, double m) {
  return boost_momentum(p, b.rapidity, m);
}

// Lorentz factor sqrt(1 + p^2/m^2) of an on-shell massive momentum.
inline double gamma_of(double p, double m) {
  if (!(m > 0.0)) throw std::invalid_argument("gamma_of: m must be > 0");
  double r = p / m;
  return std::sqrt(1.0 + r * r);
}

}  // namespace udw
