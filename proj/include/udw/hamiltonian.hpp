#pragma once

#include <optional>

#include "udw/fock.hpp"

namespace udw {

// \int_0^t e^{i dw t'} dt' = (e^{i dw t} - 1) / (i dw); series near dw t = 0
// to avoid cancellation.
cplx time_window(double delta_omega, double t);

struct CouplingConfig {
  double lambda = 0.01;
  double t = 1.0;  // sharp switching on [0, t]
};

// Resonant (rotating-wave) interaction Hamiltonian on the truncated sectors
// {excited x vacuum, ground x one photon}. Momentum conservation p' = p + k
// is snapped to the nearest excited-grid mode within half a rapidity spacing;
// pairs with no on-grid target are dropped. The snap map is shared between
// the two directions, which keeps the truncated operator exactly Hermitian.
class ResonantHamiltonian {
 public:
  ResonantHamiltonian(GridBindings b, double lambda, bool constant_omega = false);

  // H(t) |state> on the truncated space.
  SectorState apply(const SectorState& s, double t) const;

  // |psi(t)>: the order-lambda coefficient of the evolved state, i.e.
  // (-i/lambda) \int_0^t H(t') dt' |initial>. `dropped_weight` (optional)
  // receives the amplitude-weighted measure fraction of photon modes whose
  // recoil target fell off the ground-state grid.
  SectorState emission(const SectorState& initial, double t,
                       double* dropped_weight = nullptr) const;

  double lambda() const { return lambda_; }
  bool constant_omega() const { return const_omega_; }
  const GridBindings& bindings() const { return binds_; }

  // Ground-mode, photon-mode -> excited-mode pairing (nullopt when off grid).
  std::optional<int> resonant_target(int n0, int j) const;
  // All ground modes pairing with excited mode n1 at photon mode j.
  std::vector<int> resonant_sources(int n1, int j) const;
  // Coefficient of b^dag_{n0,0} a^dag_j b_{n1,1} without the phase or lambda.
  double resonant_coupling(int n0, int j, int n1) const;
  double resonant_detuning(int n0, int j, int n1) const;

  // Measure-weighted fraction of (ground, photon) pairs without a target.
  double table_dropped_fraction() const;

  double omega_det(int level, int n) const;  // honors the constant-omega surrogate

 private:
  GridBindings binds_;
  double lambda_;
  bool const_omega_;
};

// s_i(t) = <psi|psi> of an (unnormalized) first-order emission state.
double s_norm(const SectorState& psi);

// Interaction Hamiltonian keeping the counter-rotating detector-level flips
// (photon creation and annihilation), truncated to single-detector configs
// with at most one photon. Contains every resonant matrix element.
class RecoilHamiltonian {
 public:
  RecoilHamiltonian(GridBindings b, double lambda, bool constant_omega = false);

  SectorState apply(const SectorState& s, double t) const;

  double lambda() const { return res_.lambda(); }
  const ResonantHamiltonian& resonant() const { return res_; }

  // Excited-mode, photon-mode -> ground-mode pairing of the counter-rotating
  // family b^dag_{n1,1} a^dag_j b_{m,0}.
  std::optional<int> counter_target(int n1, int j) const;
  std::vector<int> counter_sources(int m, int j) const;
  double counter_coupling(int n1, int j, int m) const;
  double counter_detuning(int n1, int j, int m) const;

 private:
  ResonantHamiltonian res_;
};

}  // namespace udw
