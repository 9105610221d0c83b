#pragma once

#include "udw/qrf.hpp"

namespace udw {

// Minimal linear-operator handle for trace and commutator arithmetic on
// sparse states. Hermiticity is the builder's responsibility and is checked
// by quadratic forms in the tests. The two structure flags record when an
// operator is a scalar function of the frame momentum (frame_scalar) or maps
// every frame-momentum block to itself (frame_preserving); a commutator of a
// frame scalar with a frame-preserving operator is zero identically, not
// merely to rounding.
struct LinOp {
  std::function<SectorState(const SectorState&)> apply;
  bool frame_scalar = false;
  bool frame_preserving = false;

  SectorState operator()(const SectorState& x) const { return apply(x); }
};

LinOp lin_zero();

LinOp lin_identity();
LinOp lin_scaled(cplx c, LinOp a);
LinOp lin_sum(LinOp a, LinOp b);
LinOp lin_compose(LinOp a, LinOp b);  // x -> a(b(x))
// i [a, b]
LinOp lin_commutator_i(LinOp a, LinOp b);
// sum_r c_r |ket_r><bra_r|
LinOp lin_ensemble(std::vector<std::tuple<cplx, SectorState, SectorState>> members);
// Real diagonal in the config basis (Hermitian by construction).
LinOp lin_config_diagonal(std::function<double(const BasisConfig&)> f);
// Projector onto the ground x one-photon sector.
LinOp photon_sector_projector();
// gamma operator of the frame particle, diagonal in its momentum.
LinOp frame_gamma(GridBindings b, FrameKind which);
// Rank-one |sigma><sigma| on the frame factor, identity elsewhere.
LinOp frame_rank_one(GridBindings b, FrameKind which, std::vector<cplx> sigma);
// Diagonal |sigma(pi)|^2 weighting of the frame factor.
LinOp frame_diagonal_weights(GridBindings b, FrameKind which, std::vector<double> w);
// S op S^dagger: maps an operator on lab-factor states to one on
// ancilla-factor states.
LinOp lin_conjugate_by_S(LinOp op, QrfTransform q);
// H(t) as a LinOp.
LinOp lin_hamiltonian(ResonantHamiltonian h, double t);

// Measurement with an explicit time rule (finite differences use step dt).
struct Projector {
  std::function<LinOp(double)> at;

  static Projector constant(LinOp op) {
    return Projector{[op = std::move(op)](double) { return op; }};
  }
};

SectorState materialize(const GradedState& g, double lambda);

// Tr[rho Pi]; imaginary part must vanish for Hermitian inputs.
double probability(const DensityOperator& rho, const LinOp& pi);
cplx trace_with(const DensityOperator& rho, const LinOp& op);

// Rate operator R = dPi/dt + i [H, Pi] with a central finite difference.
LinOp rate_operator(const Projector& pi, const LinOp& h_at_t, double t, double dt);
double rate_expectation(const DensityOperator& rho, const Projector& pi, const LinOp& h_at_t,
                        double t, double dt);

// Two laboratory-frame measurement families, both built from a POVM element
// M on detector x photon and a frame wavefunction sigma given on the lab
// grid. Pi1 weights frame momenta incoherently (|sigma|^2 diagonal); Pi2
// keeps the sigma sigma* coherences.
struct PiObservable {
  LinOp ancilla_frame;  // Pi^(A): acts on states with a lab factor
  LinOp lab_frame;      // Pi^(L) = S Pi^(A) S^dagger: acts on ancilla-factor states
};

PiObservable build_pi1(const QrfTransform& q, const LinOp& M, std::vector<cplx> sigma);
PiObservable build_pi2(const QrfTransform& q, const LinOp& M, std::vector<cplx> sigma);

// sup-norm estimate of [gamma_L, Pi^(A)] over the basis columns of a small
// truncated space (exact zero for Pi1 by construction).
double commutator_gamma_max_element(const LinOp& pi_ancilla_frame, const GridBindings& b);

struct RateTransformResult {
  double lhs = 0.0;            // Tr[R^(L) rho^(L)]
  double rhs = 0.0;            // transformed-frame expression
  double residual = 0.0;       // |lhs - rhs|
  double extra_commutator = 0.0;  // |Tr(i [gamma_L, Pi^(A)] H^(A) rho^(A))|
  double ds_term = 0.0;        // |Tr([gamma_L dS^dag/dtau S, Pi^(A)] rho^(A))|
};

// Verifies the rate-operator transformation law between the two frames. The
// ancilla-frame Hamiltonian is the conjugated laboratory one,
// H^(A) = gamma_L^{-1} S^dag H^(L) S, which is what the identity's derivation
// uses; rho and Pi are given in the ancilla perspective (lab factor).
RateTransformResult rate_transform_residual(const DensityOperator& rho_A, const LinOp& pi_A,
                                            const QrfTransform& q, const ResonantHamiltonian& h_lab,
                                            double t, double dt);

}  // namespace udw
