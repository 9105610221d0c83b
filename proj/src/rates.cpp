#include "udw/rates.hpp"

#include <cmath>

namespace udw {

LinOp lin_zero() {
  LinOp z{[](const SectorState& x) { return SectorState(x.binds, x.time); }};
  z.frame_scalar = true;
  z.frame_preserving = true;
  return z;
}

LinOp lin_identity() {
  LinOp i{[](const SectorState& x) { return x; }};
  i.frame_scalar = true;
  i.frame_preserving = true;
  return i;
}

LinOp lin_scaled(cplx c, LinOp a) {
  LinOp out{[c, a = std::move(a)](const SectorState& x) {
    SectorState y = a(x);
    y *= c;
    return y;
  }};
  out.frame_scalar = a.frame_scalar;
  out.frame_preserving = a.frame_preserving;
  return out;
}

LinOp lin_sum(LinOp a, LinOp b) {
  LinOp out;
  out.frame_scalar = a.frame_scalar && b.frame_scalar;
  out.frame_preserving = a.frame_preserving && b.frame_preserving;
  out.apply = [a = std::move(a), b = std::move(b)](const SectorState& x) {
    SectorState y = a(x);
    y.axpy(1.0, b(x));
    return y;
  };
  return out;
}

LinOp lin_compose(LinOp a, LinOp b) {
  LinOp out;
  out.frame_scalar = a.frame_scalar && b.frame_scalar;
  out.frame_preserving = a.frame_preserving && b.frame_preserving;
  out.apply = [a = std::move(a), b = std::move(b)](const SectorState& x) { return a(b(x)); };
  return out;
}

LinOp lin_commutator_i(LinOp a, LinOp b) {
  if ((a.frame_scalar && b.frame_preserving) || (b.frame_scalar && a.frame_preserving))
    return lin_zero();
  return LinOp{[a = std::move(a), b = std::move(b)](const SectorState& x) {
    SectorState y = a(b(x));
    y.axpy(-1.0, b(a(x)));
    y *= cplx(0.0, 1.0);
    return y;
  }};
}

LinOp lin_ensemble(std::vector<std::tuple<cplx, SectorState, SectorState>> members) {
  return LinOp{[members = std::move(members)](const SectorState& x) {
    SectorState out(x.binds, x.time);
    for (const auto& [c, ket, bra] : members) out.axpy(c * inner(bra, x), ket);
    return out;
  }};
}

LinOp lin_config_diagonal(std::function<double(const BasisConfig&)> f) {
  LinOp out{[f = std::move(f)](const SectorState& x) {
    SectorState y(x.binds, x.time);
    x.for_each([&](const BasisConfig& c, cplx a) { y.add(c, a * f(c)); });
    return y;
  }};
  out.frame_preserving = true;
  return out;
}

LinOp photon_sector_projector() {
  return lin_config_diagonal([](const BasisConfig& c) { return is_ground_photon(c) ? 1.0 : 0.0; });
}

LinOp frame_gamma(GridBindings b, FrameKind which) {
  LinOp out = lin_config_diagonal([b = std::move(b), which](const BasisConfig& c) {
    if (c.fkind != which) throw std::invalid_argument("frame_gamma: frame factor mismatch");
    const ModeGrid& g = b.frame_grid(which);
    return g.energy(c.frame) / g.mass();
  });
  out.frame_scalar = true;
  return out;
}

LinOp frame_rank_one(GridBindings b, FrameKind which, std::vector<cplx> sigma) {
  return LinOp{[b = std::move(b), which, sigma = std::move(sigma)](const SectorState& x) {
    // Project the frame factor on |sigma>, leaving the rest untouched:
    // collapse amplitudes onto stripped configs, then re-spread over sigma.
    std::unordered_map<std::uint64_t, cplx> collapsed;
    x.for_each([&](BasisConfig c, cplx a) {
      if (c.fkind != which) throw std::invalid_argument("frame_rank_one: frame factor mismatch");
      cplx coef = std::conj(sigma[c.frame]) * a;
      c.frame = 0;
      collapsed[c.key()] += coef;
    });
    SectorState out(x.binds, x.time);
    for (const auto& [k, v] : collapsed) {
      if (v == cplx{}) continue;
      BasisConfig c = BasisConfig::from_key(k);
      for (std::size_t m = 0; m < sigma.size(); ++m) {
        if (sigma[m] == cplx{}) continue;
        c.frame = static_cast<std::uint16_t>(m);
        out.add(c, v * sigma[m]);
      }
    }
    return out;
  }};
}

LinOp frame_diagonal_weights(GridBindings b, FrameKind which, std::vector<double> w) {
  LinOp out = lin_config_diagonal([b = std::move(b), which, w = std::move(w)](const BasisConfig& c) {
    if (c.fkind != which) throw std::invalid_argument("frame_diagonal_weights: frame factor mismatch");
    return w[c.frame];
  });
  out.frame_scalar = true;
  return out;
}

LinOp lin_conjugate_by_S(LinOp op, QrfTransform q) {
  return LinOp{[op = std::move(op), q = std::move(q)](const SectorState& x) {
    return apply_S(op(apply_S_dagger(x, q)), q);
  }};
}

LinOp lin_hamiltonian(ResonantHamiltonian h, double t) {
  // The interaction Hamiltonian does not touch the frame factor.
  LinOp out{[h = std::move(h), t](const SectorState& x) { return h.apply(x, t); }};
  out.frame_preserving = true;
  return out;
}

SectorState materialize(const GradedState& g, double lambda) {
  SectorState s = g.zeroth;
  s.axpy(lambda, g.first);
  return s;
}

cplx trace_with(const DensityOperator& rho, const LinOp& op) {
  cplx v{};
  for (const auto& m : rho.members) {
    SectorState ket = materialize(m.ket, rho.lambda);
    SectorState bra = materialize(m.bra, rho.lambda);
    v += m.weight * inner(bra, op(ket));
  }
  return v;
}

double probability(const DensityOperator& rho, const LinOp& pi) {
  return trace_with(rho, pi).real();
}

LinOp rate_operator(const Projector& pi, const LinOp& h_at_t, double t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rate_operator: dt must be > 0");
  LinOp plus = pi.at(t + dt);
  LinOp minus = pi.at(t - dt);
  LinOp center = pi.at(t);
  LinOp deriv = lin_scaled(1.0 / (2.0 * dt), lin_sum(plus, lin_scaled(-1.0, minus)));
  return lin_sum(deriv, lin_commutator_i(h_at_t, center));
}

double rate_expectation(const DensityOperator& rho, const Projector& pi, const LinOp& h_at_t,
                        double t, double dt) {
  return trace_with(rho, rate_operator(pi, h_at_t, t, dt)).real();
}

namespace {

void check_sigma_normalized(const std::vector<cplx>& sigma) {
  double n2 = 0.0;
  for (auto v : sigma) n2 += std::norm(v);
  if (std::abs(n2 - 1.0) > 1e-9)
    throw std::invalid_argument("build_pi: sigma must be normalized on the grid");
}

}  // namespace

PiObservable build_pi1(const QrfTransform& q, const LinOp& M, std::vector<cplx> sigma) {
  check_sigma_normalized(sigma);
  std::vector<double> w(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) w[i] = std::norm(sigma[i]);
  PiObservable pi;
  pi.ancilla_frame = lin_compose(M, frame_diagonal_weights(q.bindings(), FrameKind::Lab, std::move(w)));
  pi.lab_frame = lin_conjugate_by_S(pi.ancilla_frame, q);
  return pi;
}

PiObservable build_pi2(const QrfTransform& q, const LinOp& M, std::vector<cplx> sigma) {
  check_sigma_normalized(sigma);
  PiObservable pi;
  pi.ancilla_frame = lin_compose(M, frame_rank_one(q.bindings(), FrameKind::Lab, std::move(sigma)));
  pi.lab_frame = lin_conjugate_by_S(pi.ancilla_frame, q);
  return pi;
}

double commutator_gamma_max_element(const LinOp& pi_ancilla_frame, const GridBindings& b) {
  LinOp gamma = frame_gamma(b, FrameKind::Lab);
  LinOp comm = lin_commutator_i(gamma, pi_ancilla_frame);
  const ModeGrid& g0 = *b.detector[0];
  const ModeGrid& g1 = *b.detector[1];
  const ModeGrid& ph = *b.photon;
  const ModeGrid& lab = *b.lab;
  double max_el = 0.0;
  auto probe = [&](const BasisConfig& c) {
    SectorState e(b);
    e.set(c, 1.0);
    SectorState r = comm(e);
    for (const auto& [k, v] : r.amp) max_el = std::max(max_el, std::abs(v));
  };
  for (int f = 0; f < lab.size(); ++f) {
    BasisConfig c;
    c.fkind = FrameKind::Lab;
    c.frame = static_cast<std::uint16_t>(f);
    for (int n1 = 0; n1 < g1.size(); ++n1) {
      c.level = 1;
      c.det = static_cast<std::uint16_t>(n1);
      c.has_photon = false;
      c.photon = 0;
      probe(c);
    }
    for (int n0 = 0; n0 < g0.size(); ++n0)
      for (int j = 0; j < ph.size(); ++j) {
        c.level = 0;
        c.det = static_cast<std::uint16_t>(n0);
        c.has_photon = true;
        c.photon = static_cast<std::uint16_t>(j);
        probe(c);
      }
  }
  return max_el;
}

RateTransformResult rate_transform_residual(const DensityOperator& rho_A, const LinOp& pi_A,
                                            const QrfTransform& q, const ResonantHamiltonian& h_lab,
                                            double t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rate_transform_residual: dt must be > 0");
  RateTransformResult r;

  LinOp h_L = lin_hamiltonian(h_lab, t);
  LinOp gamma_L = frame_gamma(q.bindings(), FrameKind::Lab);
  LinOp gamma_L_inv = lin_config_diagonal([b = q.bindings()](const BasisConfig& c) {
    if (c.fkind != FrameKind::Lab) throw std::invalid_argument("gamma_L: frame factor mismatch");
    return b.lab->mass() / b.lab->energy(c.frame);
  });
  // H^(A) = gamma_L^{-1} S^dag H^(L) S
  LinOp h_A = LinOp{[&, q, h_lab, t](const SectorState& x) {
    return gamma_L_inv(apply_S_dagger(h_lab.apply(apply_S(x, q), t), q));
  }};

  // Laboratory perspective: rho^(L), Pi^(L), and the rate expectation there.
  DensityOperator rho_L;
  rho_L.lambda = rho_A.lambda;
  for (const auto& m : rho_A.members) {
    DensityMember ml;
    ml.weight = m.weight;
    ml.ket = GradedState::plain(apply_S(materialize(m.ket, rho_A.lambda), q));
    ml.bra = GradedState::plain(apply_S(materialize(m.bra, rho_A.lambda), q));
    rho_L.members.push_back(std::move(ml));
  }
  LinOp pi_L = lin_conjugate_by_S(pi_A, q);
  // Pi has no explicit time dependence here, so dPi/dt contributes nothing;
  // the interaction-picture S is time-independent, so the dS/dtau term is a
  // finite difference of identical operators.
  r.lhs = trace_with(rho_L, lin_commutator_i(h_L, pi_L)).real();

  LinOp rate_A = lin_commutator_i(h_A, pi_A);
  double term1 = trace_with(rho_A, lin_compose(gamma_L, rate_A)).real();
  cplx extra = trace_with(rho_A, lin_compose(lin_commutator_i(gamma_L, pi_A), h_A));
  double ds = 0.0;  // (S(tau+dt) - S(tau-dt)) / 2dt vanishes identically
  r.rhs = term1 + extra.real() - ds;
  r.extra_commutator = std::abs(extra);
  r.ds_term = ds;
  r.residual = std::abs(r.lhs - r.rhs);
  return r;
}

}  // namespace udw
