#include "udw/coherence.hpp"

#include <cmath>

namespace udw {

namespace {

void require_orthogonal_initials(const SectorState& a, const SectorState& b) {
  if (std::abs(inner(a, b)) > 1e-10)
    throw std::invalid_argument("coherence: initial states must be orthogonal");
}

GradedState sum_state(const SectorState& Psi1, const SectorState& Psi2, const SectorState& psi1,
                      const SectorState& psi2, double scale) {
  GradedState v;
  v.zeroth = Psi1;
  v.zeroth.axpy(1.0, Psi2);
  v.zeroth *= scale;
  v.first = psi1;
  v.first.axpy(1.0, psi2);
  v.first *= scale;
  return v;
}

}  // namespace

BinaryObservable make_binary_observable(const std::array<cplx, 2>& alpha,
                                        const std::array<cplx, 2>& beta,
                                        const SectorState& Psi1_0, const SectorState& Psi2_0,
                                        const SectorState& psi1_t, const SectorState& psi2_t,
                                        double lambda) {
  BinaryObservable Q;
  Q.lambda = lambda;
  Q.s = {psi1_t.norm2(), psi2_t.norm2()};
  double n2 = std::norm(alpha[0]) + std::norm(alpha[1]) + std::norm(beta[0]) * Q.s[0] +
              std::norm(beta[1]) * Q.s[1];
  if (!(n2 > 0.0)) throw std::invalid_argument("make_binary_observable: zero vector");
  Q.prenorm = std::sqrt(n2);
  double inv = 1.0 / Q.prenorm;
  Q.alpha = {alpha[0] * inv, alpha[1] * inv};
  Q.beta = {beta[0] * inv, beta[1] * inv};

  Q.q.zeroth = Q.alpha[0] * Psi1_0;
  Q.q.zeroth.axpy(Q.alpha[1], Psi2_0);
  Q.q.zeroth.axpy(Q.beta[0], psi1_t);
  Q.q.zeroth.axpy(Q.beta[1], psi2_t);
  return Q;
}

DensityOperator build_rho_coherent(const SectorState& Psi1_0, const SectorState& Psi2_0,
                                   const SectorState& psi1_t, const SectorState& psi2_t,
                                   double lambda) {
  require_orthogonal_initials(Psi1_0, Psi2_0);
  DensityOperator rho;
  rho.lambda = lambda;
  rho.order_lambda_truncated = true;
  GradedState v = sum_state(Psi1_0, Psi2_0, psi1_t, psi2_t, 1.0 / std::sqrt(2.0));
  rho.members.push_back(DensityMember{1.0, v, v});
  return rho;
}

DensityOperator build_rho_incoherent(const SectorState& Psi1_0, const SectorState& Psi2_0,
                                     const SectorState& psi1_t, const SectorState& psi2_t,
                                     double lambda) {
  require_orthogonal_initials(Psi1_0, Psi2_0);
  DensityOperator rho;
  rho.lambda = lambda;
  rho.order_lambda_truncated = true;
  GradedState v1{Psi1_0, psi1_t};
  GradedState v2{Psi2_0, psi2_t};
  rho.members.push_back(DensityMember{0.5, v1, v1});
  rho.members.push_back(DensityMember{0.5, v2, v2});
  return rho;
}

DensityOperator delta_rho(const DensityOperator& rho_c, const DensityOperator& rho_ic) {
  if (rho_c.lambda != rho_ic.lambda)
    throw std::invalid_argument("delta_rho: coupling mismatch");
  DensityOperator d;
  d.lambda = rho_c.lambda;
  d.order_lambda_truncated = rho_c.order_lambda_truncated || rho_ic.order_lambda_truncated;
  d.members = rho_c.members;
  for (DensityMember m : rho_ic.members) {
    m.weight = -m.weight;
    d.members.push_back(std::move(m));
  }
  return d;
}

namespace {

double expectation_impl(const BinaryObservable& Q, const DensityOperator& rho, bool truncate) {
  double n2 = std::norm(Q.alpha[0]) + std::norm(Q.alpha[1]) + std::norm(Q.beta[0]) * Q.s[0] +
              std::norm(Q.beta[1]) * Q.s[1];
  if (std::abs(n2 - 1.0) > 1e-10)
    throw std::invalid_argument("expectation: observable vector not normalized");
  cplx v = truncate ? expectation_rank_one(rho, Q.q) : expectation_rank_one_untruncated(rho, Q.q);
  return v.real();
}

}  // namespace

double expectation(const BinaryObservable& Q, const DensityOperator& rho) {
  return expectation_impl(Q, rho, rho.order_lambda_truncated);
}

double expectation_untruncated(const BinaryObservable& Q, const DensityOperator& rho) {
  return expectation_impl(Q, rho, false);
}

double delta_q_closed_form(const std::array<cplx, 2>& alpha, const std::array<cplx, 2>& beta,
                           double s1, double s2, double lambda) {
  std::array<double, 2> s{s1, s2};
  cplx v{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      if (i == j) continue;
      v += std::conj(alpha[i]) * alpha[j] + lambda * s[i] * std::conj(beta[i]) * alpha[j] +
           lambda * s[j] * std::conj(alpha[i]) * beta[j];
    }
  return 0.5 * v.real();
}

}  // namespace udw
