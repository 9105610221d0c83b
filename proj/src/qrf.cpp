#include "udw/qrf.hpp"

#include <cmath>
#include <map>

namespace udw {

namespace {

constexpr double kAlignTol = 1e-9;

std::map<int, SectorState> split_by_frame(const SectorState& s, FrameKind expect) {
  std::map<int, SectorState> parts;
  s.for_each([&](const BasisConfig& c, cplx a) {
    if (c.fkind != expect)
      throw std::invalid_argument("qrf: state lacks the expected frame factor");
    auto it = parts.try_emplace(c.frame, SectorState(s.binds, s.time)).first;
    it->second.add(c, a);
  });
  return parts;
}

}  // namespace

QrfTransform QrfTransform::build(GridBindings b, bool allow_interpolation) {
  if (!b.lab || !b.ancilla || !b.detector[0] || !b.detector[1] || !b.photon)
    throw std::invalid_argument("QrfTransform: all grids must be bound");
  if (b.lab->kind() != GridKind::MassiveRapidity || b.ancilla->kind() != GridKind::MassiveRapidity)
    throw std::invalid_argument("QrfTransform: frame grids must be massive rapidity grids");
  if (b.detector[0]->spacing() != b.detector[1]->spacing())
    throw std::invalid_argument("QrfTransform: detector level grids must share one rapidity lattice");

  QrfTransform q;
  q.binds_ = std::move(b);
  q.allow_interp_ = allow_interpolation;

  const ModeGrid& lab = *q.binds_.lab;
  const ModeGrid& anc = *q.binds_.ancilla;
  if (lab.size() != anc.size())
    throw std::invalid_argument("QrfTransform: lab/ancilla grids must pair one-to-one");

  double ratio = anc.mass() / lab.mass();
  q.lab_to_anc_.assign(lab.size(), -1);
  q.anc_to_lab_.assign(anc.size(), -1);
  for (int n = 0; n < lab.size(); ++n) {
    auto idx = anc.snap(-ratio * lab.momentum(n));
    if (!idx || std::abs(anc.param(*idx) + lab.param(n)) > kAlignTol)
      throw std::invalid_argument("QrfTransform: lab/ancilla grids are not mirrored pairs");
    if (q.anc_to_lab_[*idx] != -1)
      throw std::invalid_argument("QrfTransform: parity pairing is not one-to-one");
    q.lab_to_anc_[n] = *idx;
    q.anc_to_lab_[*idx] = n;
  }

  double d_eta = q.binds_.detector[0]->spacing();
  double d_u = q.binds_.photon->spacing();
  q.aligned_ = true;
  q.table_.resize(lab.size());
  for (int n = 0; n < lab.size(); ++n) {
    AlignmentEntry e;
    e.xi = -lab.param(n);  // -asinh(q_n / m_L)
    e.det_steps = static_cast<int>(std::lround(e.xi / d_eta));
    e.det_residual = e.xi - e.det_steps * d_eta;
    e.ph_steps = static_cast<int>(std::lround(e.xi / d_u));
    e.ph_residual = e.xi - e.ph_steps * d_u;
    if (std::abs(e.det_residual) > kAlignTol || std::abs(e.ph_residual) > kAlignTol)
      q.aligned_ = false;
    q.table_[n] = e;
  }
  return q;
}

SectorState parity_swap(const SectorState& s, const QrfTransform& q) {
  SectorState out(s.binds, s.time);
  s.for_each([&](BasisConfig c, cplx a) {
    if (c.fkind != FrameKind::Lab)
      throw std::invalid_argument("parity_swap: lab frame factor required");
    c.frame = static_cast<std::uint16_t>(q.lab_to_ancilla(c.frame));
    c.fkind = FrameKind::Ancilla;
    out.add(c, a);
  });
  return out;
}

SectorState parity_swap_inverse(const SectorState& s, const QrfTransform& q) {
  SectorState out(s.binds, s.time);
  s.for_each([&](BasisConfig c, cplx a) {
    if (c.fkind != FrameKind::Ancilla)
      throw std::invalid_argument("parity_swap_inverse: ancilla frame factor required");
    c.frame = static_cast<std::uint16_t>(q.ancilla_to_lab(c.frame));
    c.fkind = FrameKind::Lab;
    out.add(c, a);
  });
  return out;
}

namespace {

// Intended contributions of a (possibly fractional) rapidity shift in grid
// steps. Aligned shifts move a single index; fractional ones split linearly
// between the two bracketing lattice points.
void intended_shifts(double steps_real, std::vector<std::pair<int, double>>& out) {
  out.clear();
  double base = std::floor(steps_real);
  double f = steps_real - base;
  int b = static_cast<int>(base);
  if (f < 1e-12) {
    out.emplace_back(b, 1.0);
  } else if (f > 1.0 - 1e-12) {
    out.emplace_back(b + 1, 1.0);
  } else {
    out.emplace_back(b, 1.0 - f);
    out.emplace_back(b + 1, f);
  }
}

}  // namespace

SectorState controlled_boost(const SectorState& s, const QrfTransform& q, BoostTarget target,
                             int direction, double* dropped) {
  if (!q.aligned() && !q.interpolation_enabled())
    throw std::invalid_argument("controlled_boost: transform misaligned and interpolation disabled");
  const GridBindings& b = q.bindings();
  SectorState out(s.binds, s.time);
  double lost = 0.0;
  std::vector<std::pair<int, double>> steps;
  s.for_each([&](const BasisConfig& c, cplx a) {
    if (c.fkind != FrameKind::Lab)
      throw std::invalid_argument("controlled_boost: lab frame factor required");
    const AlignmentEntry& e = q.table()[c.frame];
    if (target == BoostTarget::Photon && !c.has_photon) {
      out.add(c, a);  // boosts leave the field vacuum invariant
      return;
    }
    const ModeGrid& g = target == BoostTarget::Detector ? *b.detector[c.level] : *b.photon;
    // Aligned entries shift by their exact integer step count; the division
    // is only needed for the interpolating path.
    double residual = target == BoostTarget::Detector ? e.det_residual : e.ph_residual;
    int table_steps = target == BoostTarget::Detector ? e.det_steps : e.ph_steps;
    if (std::abs(residual) <= kAlignTol) {
      steps.assign(1, {direction * table_steps, 1.0});
    } else {
      intended_shifts(direction * e.xi / g.spacing(), steps);
    }
    int index = target == BoostTarget::Detector ? c.det : c.photon;
    for (auto [st, w] : steps) {
      auto idx = g.shift_index(index, st);
      if (!idx) {
        lost += std::norm(a) * w * w;  // amplitude share pushed over the grid edge
        continue;
      }
      BasisConfig o = c;
      if (target == BoostTarget::Detector)
        o.det = static_cast<std::uint16_t>(*idx);
      else
        o.photon = static_cast<std::uint16_t>(*idx);
      out.add(o, a * w);
    }
  });
  if (dropped) {
    double n2 = s.norm2();
    *dropped = n2 > 0.0 ? lost / n2 : 0.0;
  }
  return out;
}

SectorState apply_S(const SectorState& s, const QrfTransform& q, double* dropped) {
  double d1 = 0.0, d2 = 0.0;
  SectorState x = controlled_boost(s, q, BoostTarget::Photon, +1, &d1);
  x = controlled_boost(x, q, BoostTarget::Detector, +1, &d2);
  if (dropped) *dropped = d1 + d2;
  return parity_swap(x, q);
}

SectorState apply_S_dagger(const SectorState& s, const QrfTransform& q, double* dropped) {
  double d1 = 0.0, d2 = 0.0;
  SectorState x = parity_swap_inverse(s, q);
  x = controlled_boost(x, q, BoostTarget::Detector, -1, &d1);
  x = controlled_boost(x, q, BoostTarget::Photon, -1, &d2);
  if (dropped) *dropped = d1 + d2;
  return x;
}

namespace {

SectorState gamma_ancilla_inverse(const SectorState& s, const QrfTransform& q) {
  SectorState out(s.binds, s.time);
  s.for_each([&](const BasisConfig& c, cplx a) {
    if (c.fkind != FrameKind::Ancilla)
      throw std::invalid_argument("qrf: ancilla frame factor required");
    out.add(c, a / q.gamma_ancilla(c.frame));
  });
  return out;
}

// gamma_A^{-1} S H^(A)(t / gamma) S^dagger on a lab-perspective state.
SectorState apply_conjugated_hint(const SectorState& x, const QrfTransform& q,
                                  const ResonantHamiltonian& h, double t) {
  SectorState y = apply_S_dagger(x, q);
  SectorState z(y.binds, y.time);
  for (auto& [frame, part] : split_by_frame(y, FrameKind::Lab))
    z.axpy(1.0, h.apply(part, t / q.gamma_lab(frame)));
  return gamma_ancilla_inverse(apply_S(z, q), q);
}

double max_abs_diff(const SectorState& a, const SectorState& b) {
  double m = 0.0;
  SectorState d = a - b;
  for (const auto& [k, v] : d.amp) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

HintCheckResult transform_hint_check(const QrfTransform& q, const ResonantHamiltonian& h,
                                     double t, const SectorState* probe,
                                     std::optional<int> ancilla_mode) {
  const GridBindings& b = q.bindings();
  if (!b.same(h.bindings()))
    throw std::invalid_argument("transform_hint_check: bindings mismatch");
  HintCheckResult r;

  const ModeGrid& anc = *b.ancilla;
  const ModeGrid& g0 = *b.detector[0];
  const ModeGrid& g1 = *b.detector[1];
  const ModeGrid& ph = *b.photon;
  int f_lo = ancilla_mode ? *ancilla_mode : 0;
  int f_hi = ancilla_mode ? *ancilla_mode + 1 : anc.size();
  for (int f = f_lo; f < f_hi; ++f) {
    auto column = [&](const BasisConfig& c) {
      SectorState e(b);
      e.set(c, 1.0);
      SectorState m1 = apply_conjugated_hint(e, q, h, t);
      SectorState m2 = h.apply(e, t);
      r.max_element = std::max(r.max_element, max_abs_diff(m1, m2));
    };
    for (int n1 = 0; n1 < g1.size(); ++n1) {
      BasisConfig c;
      c.level = 1;
      c.det = static_cast<std::uint16_t>(n1);
      c.fkind = FrameKind::Ancilla;
      c.frame = static_cast<std::uint16_t>(f);
      column(c);
    }
    for (int n0 = 0; n0 < g0.size(); ++n0)
      for (int j = 0; j < ph.size(); ++j) {
        BasisConfig c;
        c.level = 0;
        c.det = static_cast<std::uint16_t>(n0);
        c.has_photon = true;
        c.photon = static_cast<std::uint16_t>(j);
        c.fkind = FrameKind::Ancilla;
        c.frame = static_cast<std::uint16_t>(f);
        column(c);
      }
  }

  SectorState wp;
  if (probe) {
    wp = *probe;
  } else {
    // Smooth default probe: Gaussian excited packet x Gaussian ancilla packet.
    double p_scale = std::max(1e-3, 0.25 * std::abs(g1.momentum(g1.size() - 1)));
    SectorState det = wavepacket_state(b, 1, [&](double p) {
      return cplx(std::exp(-p * p / (2.0 * p_scale * p_scale)), 0.0);
    });
    auto frame_amp = frame_wavepacket(anc, [&](double pq) {
      double w = std::max(1e-3, 0.5 * std::abs(anc.momentum(anc.size() - 1)));
      return cplx(std::exp(-pq * pq / (2.0 * w * w)), 0.0);
    });
    wp = tensor_with_frame(det, frame_amp, FrameKind::Ancilla);
    wp *= 1.0 / wp.norm();
  }
  SectorState m1 = apply_conjugated_hint(wp, q, h, t);
  SectorState m2 = h.apply(wp, t);
  r.wavepacket = (m1 - m2).norm() / wp.norm();
  return r;
}

SectorState superposed_time_evolve(const SectorState& lab_frame_state, const QrfTransform& q,
                                   const ResonantHamiltonian& h, double tau_i, double tau_f,
                                   double* dropped) {
  if (tau_f < tau_i)
    throw std::invalid_argument("superposed_time_evolve: tau_f must be >= tau_i");
  SectorState out(lab_frame_state.binds, tau_f);
  double drop_acc = 0.0, w_acc = 0.0;
  for (auto& [frame, part] : split_by_frame(lab_frame_state, FrameKind::Ancilla)) {
    double gamma = q.gamma_ancilla(frame);
    double d = 0.0;
    out.axpy(1.0, h.emission(part, gamma * (tau_f - tau_i), &d));
    double w = part.norm2();
    drop_acc += w * d;
    w_acc += w;
  }
  if (dropped) *dropped = w_acc > 0.0 ? drop_acc / w_acc : 0.0;
  return out;
}

namespace {

double config_free_energy_ancilla_frame(const GridBindings& b, const BasisConfig& c) {
  double w = b.detector[c.level]->energy(c.det);
  if (c.has_photon) w += b.photon->energy(c.photon);
  w += b.lab->energy(c.frame);
  return w;
}

}  // namespace

SectorState apply_free_phase_ancilla_frame(const SectorState& s, const QrfTransform& q,
                                           double dtau, int sign) {
  const GridBindings& b = q.bindings();
  SectorState out(s.binds, s.time);
  s.for_each([&](const BasisConfig& c, cplx a) {
    if (c.fkind != FrameKind::Lab)
      throw std::invalid_argument("apply_free_phase_ancilla_frame: lab factor required");
    out.add(c, a * std::polar(1.0, sign * config_free_energy_ancilla_frame(b, c) * dtau));
  });
  return out;
}

SectorState apply_free_phase_lab_frame(const SectorState& s, const QrfTransform& q, double dtau,
                                       int sign, bool gamma_weighted) {
  const GridBindings& b = q.bindings();
  double mass_rescale = q.m_lab() / q.m_ancilla();
  SectorState out(s.binds, s.time);
  s.for_each([&](const BasisConfig& c, cplx a) {
    if (c.fkind != FrameKind::Ancilla)
      throw std::invalid_argument("apply_free_phase_lab_frame: ancilla factor required");
    double w = b.detector[c.level]->energy(c.det);
    if (c.has_photon) w += b.photon->energy(c.photon);
    w += mass_rescale * b.ancilla->energy(c.frame);
    double dt = gamma_weighted ? q.gamma_ancilla(c.frame) * dtau : dtau;
    out.add(c, a * std::polar(1.0, sign * w * dt));
  });
  return out;
}

SectorState apply_S_schrodinger(const SectorState& s, const QrfTransform& q, double dtau) {
  SectorState x = apply_free_phase_ancilla_frame(s, q, dtau, +1);
  x = apply_S(x, q);
  return apply_free_phase_lab_frame(x, q, dtau, -1, /*gamma_weighted=*/true);
}

double picture_change_residual(const QrfTransform& q, const SectorState& probe, double dtau) {
  SectorState x = apply_free_phase_ancilla_frame(probe, q, dtau, -1);
  x = apply_S_schrodinger(x, q, dtau);
  x = apply_free_phase_lab_frame(x, q, dtau, +1, /*gamma_weighted=*/true);
  return (x - apply_S(probe, q)).norm();
}

}  // namespace udw
