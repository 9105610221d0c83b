#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "udw/rates.hpp"

using namespace udw;

namespace {

GridBindings emission_bindings() {
  GridBindings b;
  auto det = make_detector_grids(make_species(2.0, 0.4), 17, 0.08);
  b.detector[0] = det.level0;
  b.detector[1] = det.level1;
  b.photon = make_photon_grid(0.06, 0.2, 8, PhotonBranches::Both);
  return b;
}

GridBindings framed_bindings(double m_L, double m_A) {
  GridBindings b;
  auto det = make_detector_grids(make_species(1.0, 0.5), 25, 0.05);
  b.detector[0] = det.level0;
  b.detector[1] = det.level1;
  b.photon = make_photon_grid(0.1, 0.05, 14, PhotonBranches::Both);
  b.lab = make_massive_grid(m_L, 5, 2 * 0.05, 0.0);
  b.ancilla = make_massive_grid(m_A, 5, 2 * 0.05, 0.0);
  return b;
}

SectorState random_emission_state(const GridBindings& b, std::mt19937& rng, int margin_det = 0,
                                  int margin_ph = 0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SectorState s(b);
  for (int n = margin_det; n < b.detector[1]->size() - margin_det; ++n) {
    BasisConfig c;
    c.level = 1;
    c.det = static_cast<std::uint16_t>(n);
    s.add(c, cplx(u(rng), u(rng)));
  }
  int half = b.photon->branch_size();
  for (int n = margin_det; n < b.detector[0]->size() - margin_det; ++n)
    for (int j = 0; j < b.photon->size(); ++j) {
      int jb = j < half ? j : j - half;
      if (jb < margin_ph || jb >= half - margin_ph) continue;
      BasisConfig c;
      c.level = 0;
      c.det = static_cast<std::uint16_t>(n);
      c.has_photon = true;
      c.photon = static_cast<std::uint16_t>(j);
      s.add(c, cplx(u(rng), u(rng)));
    }
  return s;
}

DensityOperator pure_density(const SectorState& v) {
  DensityOperator rho;
  rho.lambda = 0.0;
  rho.members.push_back(DensityMember{1.0, GradedState::plain(v), GradedState::plain(v)});
  return rho;
}

}  // namespace

TEST_CASE("probabilities: photon projector before and after the emission") {
  GridBindings b = emission_bindings();
  double lambda = 0.04, t = 1.5;
  ResonantHamiltonian h(b, lambda);
  SectorState Psi0 = unit_excited_state(b, 8);
  LinOp pi = photon_sector_projector();

  CHECK(probability(pure_density(Psi0), pi) == doctest::Approx(0.0));

  SectorState psi = h.emission(Psi0, t);
  SectorState full = Psi0;
  full.axpy(lambda, psi);
  double expected = lambda * lambda * s_norm(psi);
  CHECK(probability(pure_density(full), pi) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("probability of random ensembles against a dense trace oracle") {
  GridBindings b = emission_bindings();
  std::mt19937 rng(101);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  SectorState a = random_emission_state(b, rng);
  SectorState c = random_emission_state(b, rng);
  SectorState d = random_emission_state(b, rng);
  LinOp pi = lin_ensemble({{cplx(0.5, 0.0), a, a},
                           {cplx(0.1, 0.3), a, c},
                           {cplx(0.1, -0.3), c, a},
                           {cplx(0.8, 0.0), c, c}});
  DensityOperator rho;
  rho.lambda = 0.0;
  rho.members.push_back(DensityMember{0.7, GradedState::plain(c), GradedState::plain(c)});
  rho.members.push_back(DensityMember{0.3, GradedState::plain(d), GradedState::plain(d)});

  // Dense oracle via explicit inner products.
  auto term = [&](cplx w, const SectorState& k1, const SectorState& b1) {
    // Tr(|k1><b1| rho) over members
    return w * (0.7 * inner(b1, c) * inner(c, k1) + 0.3 * inner(b1, d) * inner(d, k1));
  };
  cplx oracle = term(cplx(0.5, 0.0), a, a) + term(cplx(0.1, 0.3), a, c) +
                term(cplx(0.1, -0.3), c, a) + term(cplx(0.8, 0.0), c, c);
  CHECK(probability(rho, pi) == doctest::Approx(oracle.real()).epsilon(1e-12));
  CHECK(std::abs(trace_with(rho, pi).imag()) < 1e-12);
}

TEST_CASE("rate operator of a conserved projector vanishes") {
  GridBindings b = emission_bindings();
  ResonantHamiltonian h(b, 0.05);
  // The identity on the truncated space commutes with H and has no explicit
  // time dependence.
  LinOp ident = lin_identity();
  Projector pi = Projector::constant(ident);
  LinOp R = rate_operator(pi, lin_hamiltonian(h, 0.9), 0.9, 1e-4);
  std::mt19937 rng(107);
  for (int trial = 0; trial < 5; ++trial) {
    SectorState x = random_emission_state(b, rng);
    CHECK(R(x).norm() < 1e-10 * x.norm());
  }
}

TEST_CASE("rate expectation matches the finite difference of the probability") {
  GridBindings b = emission_bindings();
  double lambda = 0.03;
  ResonantHamiltonian h(b, lambda);
  SectorState Psi0 = unit_excited_state(b, 8);
  double t = 1.2;

  auto P_at = [&](double tt) {
    SectorState full = Psi0;
    full.axpy(lambda, h.emission(Psi0, tt));
    return probability(pure_density(full), photon_sector_projector());
  };

  SectorState full = Psi0;
  full.axpy(lambda, h.emission(Psi0, t));
  DensityOperator rho = pure_density(full);
  Projector pi = Projector::constant(photon_sector_projector());
  double rate = rate_expectation(rho, pi, lin_hamiltonian(h, t), t, 1e-4);

  double dt = 1e-4;
  double fd = (P_at(t + dt) - P_at(t - dt)) / (2.0 * dt);
  CHECK(rate == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("rate consistency error scales as O(dt^2)") {
  GridBindings b = emission_bindings();
  double lambda = 0.03;
  ResonantHamiltonian h(b, lambda);
  SectorState Psi0 = unit_excited_state(b, 8);
  double t = 1.2;

  auto P_at = [&](double tt) {
    SectorState full = Psi0;
    full.axpy(lambda, h.emission(Psi0, tt));
    return probability(pure_density(full), photon_sector_projector());
  };
  SectorState full = Psi0;
  full.axpy(lambda, h.emission(Psi0, t));
  DensityOperator rho = pure_density(full);
  // For the time-independent photon projector the rate expectation is exact,
  // so the error of the centered difference of P isolates the dt^2 term.
  double rate = rate_expectation(rho, Projector::constant(photon_sector_projector()),
                                 lin_hamiltonian(h, t), t, 1e-3);
  auto fd_err = [&](double dt) {
    return std::abs((P_at(t + dt) - P_at(t - dt)) / (2.0 * dt) - rate);
  };
  double e1 = fd_err(2e-2), e2 = fd_err(1e-2);
  double ratio = e1 / e2;
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("rate operator of a time-dependent rank-one projector is Hermitian") {
  GridBindings b = emission_bindings();
  double lambda = 0.04;
  ResonantHamiltonian h(b, lambda);
  SectorState Psi0 = unit_excited_state(b, 8);
  Projector pi{[&](double tt) {
    SectorState q = Psi0;
    q.axpy(lambda, h.emission(Psi0, tt));
    q *= 1.0 / q.norm();
    return lin_ensemble({{cplx(1.0, 0.0), q, q}});
  }};
  double t = 0.8;
  LinOp R = rate_operator(pi, lin_hamiltonian(h, t), t, 1e-4);
  std::mt19937 rng(113);
  for (int trial = 0; trial < 6; ++trial) {
    SectorState x = random_emission_state(b, rng);
    SectorState y = random_emission_state(b, rng);
    CHECK(std::abs(inner(x, R(y)) - std::conj(inner(y, R(x)))) < 1e-10);
  }
}

TEST_CASE("Pi1 on a single sigma mode projects one frame mode") {
  GridBindings b = framed_bindings(3.0, 2.0);
  QrfTransform q = QrfTransform::build(b);
  std::vector<cplx> sigma(b.lab->size(), cplx{});
  sigma[1] = 1.0;
  PiObservable pi1 = build_pi1(q, photon_sector_projector(), sigma);

  std::mt19937 rng(127);
  SectorState base = random_emission_state(b, rng, 5, 4);
  std::vector<cplx> chi(b.lab->size());
  for (auto& v : chi) v = cplx(0.4, -0.2);
  SectorState x = tensor_with_frame(base, chi, FrameKind::Lab);
  SectorState px = pi1.ancilla_frame(x);
  px.for_each([&](const BasisConfig& c, cplx) {
    CHECK(int(c.frame) == 1);
    CHECK(is_ground_photon(c));
  });
}

TEST_CASE("Pi1 in the laboratory frame has no ancilla-momentum coherences") {
  GridBindings b = framed_bindings(3.0, 2.0);
  QrfTransform q = QrfTransform::build(b);
  std::vector<cplx> sigma(b.lab->size(), cplx{});
  sigma[1] = std::sqrt(0.4);
  sigma[3] = std::sqrt(0.6);
  PiObservable pi1 = build_pi1(q, photon_sector_projector(), sigma);

  // Columns over a few ancilla-frame configs: Pi1^(L) e must stay within the
  // column's ancilla mode.
  std::mt19937 rng(211);
  std::uniform_int_distribution<int> ud(5, b.detector[0]->size() - 6);
  for (int trial = 0; trial < 10; ++trial) {
    BasisConfig c;
    c.level = 1;
    c.det = static_cast<std::uint16_t>(ud(rng));
    c.fkind = FrameKind::Ancilla;
    c.frame = static_cast<std::uint16_t>(trial % b.ancilla->size());
    SectorState e(b);
    e.set(c, 1.0);
    SectorState pe = pi1.lab_frame(e);
    pe.for_each([&](const BasisConfig& o, cplx) { CHECK(o.frame == c.frame); });
  }
}

TEST_CASE("gamma commutes with Pi1 exactly and not with Pi2") {
  GridBindings b = framed_bindings(3.0, 2.0);
  QrfTransform q = QrfTransform::build(b);

  std::vector<cplx> sigma1(b.lab->size(), cplx{});
  sigma1[0] = std::sqrt(0.3);
  sigma1[2] = std::sqrt(0.5);
  sigma1[4] = std::sqrt(0.2);
  PiObservable pi1 = build_pi1(q, photon_sector_projector(), sigma1);
  CHECK(commutator_gamma_max_element(pi1.ancilla_frame, b) == 0.0);

  // sigma2 spans two momenta with distinct gamma.
  std::vector<cplx> sigma2(b.lab->size(), cplx{});
  sigma2[1] = std::sqrt(0.6);
  sigma2[2] = std::sqrt(0.4);
  PiObservable pi2 = build_pi2(q, photon_sector_projector(), sigma2);
  double max_el = commutator_gamma_max_element(pi2.ancilla_frame, b);
  CHECK(max_el > 0.0);

  // Dense oracle: i [gamma, Pi2] frame elements are i (gamma_p - gamma_p')
  // sigma_p sigma_p'^* on the photon sector.
  double g1 = b.lab->energy(1) / b.lab->mass();
  double g2 = b.lab->energy(2) / b.lab->mass();
  double expected = std::abs((g1 - g2) * sigma2[1].real() * sigma2[2].real());
  CHECK(max_el == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("rate transformation law: Pi1 family has no extra commutator term") {
  GridBindings b = framed_bindings(3.0, 2.0);
  QrfTransform q = QrfTransform::build(b);
  double lambda = 0.02, t = 0.9;
  ResonantHamiltonian h(b, lambda);

  // Margin-limited support keeps all boost shifts on grid, so the identity
  // is pure algebra with no truncation leakage.
  std::mt19937 rng(131);
  SectorState base = random_emission_state(b, rng, 5, 4);
  std::vector<cplx> chi(b.lab->size(), cplx{});
  chi[1] = std::sqrt(0.7);
  chi[3] = std::sqrt(0.3);
  SectorState v = tensor_with_frame(base, chi, FrameKind::Lab);
  v *= 1.0 / v.norm();
  DensityOperator rho = pure_density(v);

  std::vector<cplx> sigma(b.lab->size(), cplx{});
  sigma[1] = std::sqrt(0.4);
  sigma[3] = std::sqrt(0.6);
  PiObservable pi1 = build_pi1(q, photon_sector_projector(), sigma);

  RateTransformResult r = rate_transform_residual(rho, pi1.ancilla_frame, q, h, t, 1e-4);
  CHECK(r.extra_commutator == 0.0);
  CHECK(r.ds_term == 0.0);
  CHECK(r.residual < 1e-12);
}

TEST_CASE("rate transformation law: Pi2 family acquires a genuine QRF correction") {
  GridBindings b = framed_bindings(3.0, 2.0);
  QrfTransform q = QrfTransform::build(b);
  double lambda = 0.02, t = 0.9;
  ResonantHamiltonian h(b, lambda);

  std::mt19937 rng(137);
  SectorState base = random_emission_state(b, rng, 5, 4);
  std::vector<cplx> chi(b.lab->size(), cplx{});
  chi[1] = std::sqrt(0.6);
  chi[2] = std::sqrt(0.4);
  SectorState v = tensor_with_frame(base, chi, FrameKind::Lab);
  v *= 1.0 / v.norm();
  DensityOperator rho = pure_density(v);

  std::vector<cplx> sigma(b.lab->size(), cplx{});
  sigma[1] = std::sqrt(0.5);
  sigma[2] = std::sqrt(0.5);
  PiObservable pi2 = build_pi2(q, photon_sector_projector(), sigma);

  RateTransformResult r = rate_transform_residual(rho, pi2.ancilla_frame, q, h, t, 1e-4);
  CHECK(r.residual < 1e-6);
  CHECK(r.extra_commutator > 10.0 * r.residual);
  CHECK(r.ds_term < 1e-10);
}

TEST_CASE("rate transformation law: identity frame reduces to gamma = 1") {
  GridBindings b = framed_bindings(2.0, 2.0);
  QrfTransform q = QrfTransform::build(b);
  double lambda = 0.02, t = 0.7;
  ResonantHamiltonian h(b, lambda);

  std::mt19937 rng(139);
  SectorState base = random_emission_state(b, rng, 5, 4);
  std::vector<cplx> chi(b.lab->size(), cplx{});
  chi[2] = 1.0;  // frame at rest
  SectorState v = tensor_with_frame(base, chi, FrameKind::Lab);
  v *= 1.0 / v.norm();
  DensityOperator rho = pure_density(v);

  std::vector<cplx> sigma(b.lab->size(), cplx{});
  sigma[2] = 1.0;
  PiObservable pi1 = build_pi1(q, photon_sector_projector(), sigma);
  RateTransformResult r = rate_transform_residual(rho, pi1.ancilla_frame, q, h, t, 1e-4);
  CHECK(std::abs(r.lhs - r.rhs) < 1e-10);
}
