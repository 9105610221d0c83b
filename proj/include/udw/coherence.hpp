#pragma once

#include "udw/fock.hpp"

namespace udw {

// Rank-one binary observable |q(t)><q(t)| with
//   |q> = sum_i (alpha_i |Psi_i(0)> + beta_i |psi_i(t)>).
// The coefficients are rescaled at construction so that |q> is normalized at
// the evaluation time: sum |alpha|^2 + sum |beta|^2 s_i = 1. The observable
// is a fixed vector; the order-lambda truncation lives in the density
// operators it is traced against.
struct BinaryObservable {
  std::array<cplx, 2> alpha{};
  std::array<cplx, 2> beta{};
  double lambda = 0.0;
  double prenorm = 1.0;  // norm of |q> before the rescale (diagnostic)
  GradedState q;         // plain vector (zeroth order only)
  std::array<double, 2> s{};  // s_i(t) of the bound emission states
};

BinaryObservable make_binary_observable(const std::array<cplx, 2>& alpha,
                                        const std::array<cplx, 2>& beta,
                                        const SectorState& Psi1_0, const SectorState& Psi2_0,
                                        const SectorState& psi1_t, const SectorState& psi2_t,
                                        double lambda);

// rho_c: rank-one ensemble of the normalized coherent sum state
// (1/sqrt 2) sum_i (|Psi_i(0)> + lambda |psi_i(t)>), order-lambda truncated.
// Throws when the initial states are not orthogonal (|<Psi1|Psi2>| > 1e-10).
DensityOperator build_rho_coherent(const SectorState& Psi1_0, const SectorState& Psi2_0,
                                   const SectorState& psi1_t, const SectorState& psi2_t,
                                   double lambda);

// rho_ic: equal-weight mixture of the two evolved pure states.
DensityOperator build_rho_incoherent(const SectorState& Psi1_0, const SectorState& Psi2_0,
                                     const SectorState& psi1_t, const SectorState& psi2_t,
                                     double lambda);

// Delta rho = rho_c - rho_ic in ensemble form (supported on i != j cross
// terms once the lambda^2 outer products are truncated).
DensityOperator delta_rho(const DensityOperator& rho_c, const DensityOperator& rho_ic);

// Tr(Q rho). Checks the normalization invariant of q and the reality of the
// result. Honors rho's truncation flag; `untruncated` keeps the lambda^2
// normalization correction terms.
double expectation(const BinaryObservable& Q, const DensityOperator& rho);
double expectation_untruncated(const BinaryObservable& Q, const DensityOperator& rho);

// Closed form (1/2) sum_{i != j} (alpha_i* alpha_j + lambda s_i beta_i* alpha_j
// + lambda s_j alpha_i* beta_j); real by symmetrization.
double delta_q_closed_form(const std::array<cplx, 2>& alpha, const std::array<cplx, 2>& beta,
                           double s1, double s2, double lambda);

}  // namespace udw
