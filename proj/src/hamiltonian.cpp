#include "udw/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

namespace udw {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;  // (2 pi)^{-1/2}, d = 1 convention

// All source modes n of `src` with dst.snap(src.momentum(n) + k_offset) == target.
// Bounds are computed analytically, then verified against the forward snap so
// the pairing is exactly symmetric in both directions.
std::vector<int> snap_preimage(const ModeGrid& src, const ModeGrid& dst, double k_offset,
                               int target) {
  double eta_lo = dst.param(target) - 0.5 * dst.spacing();
  double eta_hi = dst.param(target) + 0.5 * dst.spacing();
  double p_lo = dst.mass() * std::sinh(eta_lo) - k_offset;
  double p_hi = dst.mass() * std::sinh(eta_hi) - k_offset;
  double s_lo = (std::asinh(p_lo / src.mass()) - src.param(0)) / src.spacing();
  double s_hi = (std::asinh(p_hi / src.mass()) - src.param(0)) / src.spacing();
  int lo = std::max(0, static_cast<int>(std::floor(s_lo)) - 1);
  int hi = std::min(src.size() - 1, static_cast<int>(std::ceil(s_hi)) + 1);
  std::vector<int> out;
  for (int n = lo; n <= hi; ++n) {
    auto t = dst.snap(src.momentum(n) + k_offset);
    if (t && *t == target) out.push_back(n);
  }
  return out;
}

}  // namespace

cplx time_window(double delta_omega, double t) {
  double x = delta_omega * t;
  if (std::abs(x) < 1e-8) return cplx(t, 0.0) * cplx(1.0, 0.5 * x);
  return (std::polar(1.0, x) - 1.0) / cplx(0.0, delta_omega);
}

ResonantHamiltonian::ResonantHamiltonian(GridBindings b, double lambda, bool constant_omega)
    : binds_(std::move(b)), lambda_(lambda), const_omega_(constant_omega) {
  if (!binds_.detector[0] || !binds_.detector[1] || !binds_.photon)
    throw std::invalid_argument("ResonantHamiltonian: detector and photon grids must be bound");
}

double ResonantHamiltonian::omega_det(int level, int n) const {
  const ModeGrid& g = *binds_.detector[level];
  return const_omega_ ? g.mass() : g.energy(n);
}

std::optional<int> ResonantHamiltonian::resonant_target(int n0, int j) const {
  return binds_.detector[1]->snap(binds_.detector[0]->momentum(n0) + binds_.photon->momentum(j));
}

std::vector<int> ResonantHamiltonian::resonant_sources(int n1, int j) const {
  return snap_preimage(*binds_.detector[0], *binds_.detector[1], binds_.photon->momentum(j), n1);
}

double ResonantHamiltonian::resonant_coupling(int n0, int j, int n1) const {
  const ModeGrid& g0 = *binds_.detector[0];
  const ModeGrid& g1 = *binds_.detector[1];
  const ModeGrid& ph = *binds_.photon;
  double w_ratio = g0.weight(n0) * ph.weight(j) / g1.weight(n1);
  double denom = 8.0 * ph.energy(j) * omega_det(0, n0) * omega_det(1, n1);
  return kInvSqrt2Pi * std::sqrt(w_ratio / denom);
}

double ResonantHamiltonian::resonant_detuning(int n0, int j, int n1) const {
  return omega_det(0, n0) + binds_.photon->energy(j) - omega_det(1, n1);
}

SectorState ResonantHamiltonian::apply(const SectorState& s, double t) const {
  if (!s.binds.same(binds_) && !s.amp.empty())
    throw std::invalid_argument("ResonantHamiltonian::apply: unbound or mismatched grids");
  const ModeGrid& ph = *binds_.photon;
  SectorState out(binds_, t);
  s.for_each([&](const BasisConfig& c, cplx a) {
    if (is_excited_vacuum(c)) {
      for (int j = 0; j < ph.size(); ++j) {
        for (int n0 : resonant_sources(c.det, j)) {
          double g = resonant_coupling(n0, j, c.det);
          double dw = resonant_detuning(n0, j, c.det);
          BasisConfig o = c;
          o.level = 0;
          o.det = static_cast<std::uint16_t>(n0);
          o.has_photon = true;
          o.photon = static_cast<std::uint16_t>(j);
          out.add(o, a * lambda_ * g * std::polar(1.0, dw * t));
        }
      }
    } else if (is_ground_photon(c)) {
      auto n1 = resonant_target(c.det, c.photon);
      if (!n1) return;
      double g = resonant_coupling(c.det, c.photon, *n1);
      double dw = resonant_detuning(c.det, c.photon, *n1);
      BasisConfig o = c;
      o.level = 1;
      o.det = static_cast<std::uint16_t>(*n1);
      o.has_photon = false;
      o.photon = 0;
      out.add(o, a * lambda_ * g * std::polar(1.0, -dw * t));
    }
    // Other sectors are annihilated by the rotating-wave terms (or map out of
    // the one-photon truncation).
  });
  return out;
}

SectorState ResonantHamiltonian::emission(const SectorState& initial, double t,
                                          double* dropped_weight) const {
  if (!initial.binds.same(binds_))
    throw std::invalid_argument("ResonantHamiltonian::emission: grid bindings differ");
  const ModeGrid& ph = *binds_.photon;
  SectorState out(binds_, t);
  double dropped = 0.0, total = 0.0;
  initial.for_each([&](const BasisConfig& c, cplx a) {
    if (!is_excited_vacuum(c))
      throw std::invalid_argument("emission: initial state must be excited x photon-vacuum");
    double a2 = std::norm(a);
    for (int j = 0; j < ph.size(); ++j) {
      auto srcs = resonant_sources(c.det, j);
      total += a2 * ph.weight(j);
      if (srcs.empty()) {
        dropped += a2 * ph.weight(j);
        continue;
      }
      for (int n0 : srcs) {
        double g = resonant_coupling(n0, j, c.det);
        double dw = resonant_detuning(n0, j, c.det);
        BasisConfig o = c;
        o.level = 0;
        o.det = static_cast<std::uint16_t>(n0);
        o.has_photon = true;
        o.photon = static_cast<std::uint16_t>(j);
        out.add(o, a * cplx(0.0, -1.0) * g * time_window(dw, t));
      }
    }
  });
  if (dropped_weight) *dropped_weight = total > 0.0 ? dropped / total : 0.0;
  return out;
}

double ResonantHamiltonian::table_dropped_fraction() const {
  const ModeGrid& g0 = *binds_.detector[0];
  const ModeGrid& ph = *binds_.photon;
  double dropped = 0.0, total = 0.0;
  for (int n0 = 0; n0 < g0.size(); ++n0)
    for (int j = 0; j < ph.size(); ++j) {
      double w = g0.weight(n0) * ph.weight(j);
      total += w;
      if (!resonant_target(n0, j)) dropped += w;
    }
  return total > 0.0 ? dropped / total : 0.0;
}

double s_norm(const SectorState& psi) { return psi.norm2(); }

RecoilHamiltonian::RecoilHamiltonian(GridBindings b, double lambda, bool constant_omega)
    : res_(std::move(b), lambda, constant_omega) {}

std::optional<int> RecoilHamiltonian::counter_target(int n1, int j) const {
  const GridBindings& b = res_.bindings();
  return b.detector[0]->snap(b.detector[1]->momentum(n1) + b.photon->momentum(j));
}

std::vector<int> RecoilHamiltonian::counter_sources(int m, int j) const {
  const GridBindings& b = res_.bindings();
  return snap_preimage(*b.detector[1], *b.detector[0], b.photon->momentum(j), m);
}

double RecoilHamiltonian::counter_coupling(int n1, int j, int m) const {
  const GridBindings& b = res_.bindings();
  const ModeGrid& g0 = *b.detector[0];
  const ModeGrid& g1 = *b.detector[1];
  const ModeGrid& ph = *b.photon;
  double w_ratio = g1.weight(n1) * ph.weight(j) / g0.weight(m);
  double denom = 8.0 * ph.energy(j) * res_.omega_det(1, n1) * res_.omega_det(0, m);
  return kInvSqrt2Pi * std::sqrt(w_ratio / denom);
}

double RecoilHamiltonian::counter_detuning(int n1, int j, int m) const {
  const GridBindings& b = res_.bindings();
  return res_.omega_det(1, n1) + b.photon->energy(j) - res_.omega_det(0, m);
}

SectorState RecoilHamiltonian::apply(const SectorState& s, double t) const {
  SectorState out = res_.apply(s, t);
  const GridBindings& b = res_.bindings();
  const ModeGrid& ph = *b.photon;
  double lambda = res_.lambda();
  s.for_each([&](const BasisConfig& c, cplx a) {
    if (c.level == 0 && !c.has_photon) {
      // b^dag_{n1,1} a^dag_j b_{m,0}: excitation with simultaneous emission.
      for (int j = 0; j < ph.size(); ++j) {
        for (int n1 : counter_sources(c.det, j)) {
          double g = counter_coupling(n1, j, c.det);
          double dw = counter_detuning(n1, j, c.det);
          BasisConfig o = c;
          o.level = 1;
          o.det = static_cast<std::uint16_t>(n1);
          o.has_photon = true;
          o.photon = static_cast<std::uint16_t>(j);
          out.add(o, a * lambda * g * std::polar(1.0, dw * t));
        }
      }
    } else if (c.level == 1 && c.has_photon) {
      // Hermitian partner: de-excitation with absorption.
      auto m = counter_target(c.det, c.photon);
      if (!m) return;
      double g = counter_coupling(c.det, c.photon, *m);
      double dw = counter_detuning(c.det, c.photon, *m);
      BasisConfig o = c;
      o.level = 0;
      o.det = static_cast<std::uint16_t>(*m);
      o.has_photon = false;
      o.photon = 0;
      out.add(o, a * lambda * g * std::polar(1.0, -dw * t));
    }
  });
  return out;
}

}  // namespace udw
