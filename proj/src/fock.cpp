#include "udw/fock.hpp"

#include <cmath>

namespace udw {

double SectorState::norm2() const {
  double n = 0.0;
  for (const auto& [k, a] : amp) n += std::norm(a);
  return n;
}

double SectorState::norm() const { return std::sqrt(norm2()); }

SectorState& SectorState::operator*=(cplx s) {
  for (auto& [k, a] : amp) a *= s;
  return *this;
}

void SectorState::axpy(cplx s, const SectorState& other) {
  if (!binds.same(other.binds) && !amp.empty() && !other.amp.empty())
    throw std::invalid_argument("SectorState::axpy: grid bindings differ");
  if (amp.empty()) binds = other.binds;
  for (const auto& [k, a] : other.amp) amp[k] += s * a;
}

cplx inner(const SectorState& a, const SectorState& b) {
  if (!a.binds.same(b.binds) && !a.amp.empty() && !b.amp.empty())
    throw std::invalid_argument("inner: grid bindings differ");
  // Iterate the smaller map.
  const SectorState& small = a.amp.size() <= b.amp.size() ? a : b;
  const SectorState& large = a.amp.size() <= b.amp.size() ? b : a;
  bool swapped = &small != &a;
  cplx z{};
  for (const auto& [k, sa] : small.amp) {
    auto it = large.amp.find(k);
    if (it == large.amp.end()) continue;
    z += swapped ? std::conj(it->second) * sa : std::conj(sa) * it->second;
  }
  return z;
}

SectorState unit_excited_state(const GridBindings& b, int det_index) {
  if (!b.detector[1]) throw std::invalid_argument("unit_excited_state: detector grid not bound");
  if (det_index < 0 || det_index >= b.detector[1]->size())
    throw std::out_of_range("unit_excited_state: mode index out of range");
  SectorState s(b);
  BasisConfig c;
  c.level = 1;
  c.det = static_cast<std::uint16_t>(det_index);
  s.set(c, 1.0);
  return s;
}

SectorState unit_ground_photon_state(const GridBindings& b, int det_index, int photon_index) {
  if (!b.detector[0] || !b.photon)
    throw std::invalid_argument("unit_ground_photon_state: grids not bound");
  if (det_index < 0 || det_index >= b.detector[0]->size() || photon_index < 0 ||
      photon_index >= b.photon->size())
    throw std::out_of_range("unit_ground_photon_state: mode index out of range");
  SectorState s(b);
  BasisConfig c;
  c.level = 0;
  c.det = static_cast<std::uint16_t>(det_index);
  c.has_photon = true;
  c.photon = static_cast<std::uint16_t>(photon_index);
  s.set(c, 1.0);
  return s;
}

SectorState wavepacket_state(const GridBindings& b, int level,
                             const std::function<cplx(double)>& f) {
  const GridPtr& g = b.detector[level];
  if (!g) throw std::invalid_argument("wavepacket_state: detector grid not bound");
  SectorState s(b);
  for (int n = 0; n < g->size(); ++n) {
    cplx a = f(g->momentum(n)) * std::sqrt(g->weight(n) / (2.0 * g->energy(n)));
    if (a == cplx{}) continue;
    BasisConfig c;
    c.level = static_cast<std::uint8_t>(level);
    c.det = static_cast<std::uint16_t>(n);
    s.set(c, a);
  }
  return s;
}

SectorState photon_wavepacket_state(const GridBindings& b, int level,
                                    const std::function<cplx(double, double)>& f) {
  const GridPtr& g = b.detector[level];
  if (!g || !b.photon) throw std::invalid_argument("photon_wavepacket_state: grids not bound");
  const ModeGrid& ph = *b.photon;
  SectorState s(b);
  for (int n = 0; n < g->size(); ++n) {
    double mp = std::sqrt(g->weight(n) / (2.0 * g->energy(n)));
    for (int j = 0; j < ph.size(); ++j) {
      double mk = std::sqrt(ph.weight(j) / (2.0 * ph.energy(j)));
      cplx a = f(g->momentum(n), ph.momentum(j)) * mp * mk;
      if (a == cplx{}) continue;
      BasisConfig c;
      c.level = static_cast<std::uint8_t>(level);
      c.det = static_cast<std::uint16_t>(n);
      c.has_photon = true;
      c.photon = static_cast<std::uint16_t>(j);
      s.set(c, a);
    }
  }
  return s;
}

std::vector<cplx> frame_wavepacket(const ModeGrid& g, const std::function<cplx(double)>& f,
                                   bool normalize) {
  std::vector<cplx> amp(g.size());
  double n2 = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    amp[i] = f(g.momentum(i)) * std::sqrt(g.weight(i) / (2.0 * g.energy(i)));
    n2 += std::norm(amp[i]);
  }
  if (normalize) {
    if (!(n2 > 0.0)) throw std::invalid_argument("frame_wavepacket: zero profile");
    double inv = 1.0 / std::sqrt(n2);
    for (auto& a : amp) a *= inv;
  }
  return amp;
}

SectorState tensor_with_frame(const SectorState& s, std::span<const cplx> frame_amp,
                              FrameKind which) {
  if (which == FrameKind::None)
    throw std::invalid_argument("tensor_with_frame: frame kind must be ancilla or lab");
  const ModeGrid& fg = s.binds.frame_grid(which);
  if (static_cast<int>(frame_amp.size()) != fg.size())
    throw std::invalid_argument("tensor_with_frame: frame amplitude size mismatch");
  SectorState out(s.binds, s.time);
  s.for_each([&](BasisConfig c, cplx a) {
    if (c.fkind != FrameKind::None)
      throw std::invalid_argument("tensor_with_frame: frame factor already present");
    c.fkind = which;
    for (int m = 0; m < fg.size(); ++m) {
      if (frame_amp[m] == cplx{}) continue;
      c.frame = static_cast<std::uint16_t>(m);
      out.add(c, a * frame_amp[m]);
    }
  });
  return out;
}

std::vector<std::vector<cplx>> frame_reduced_density(const SectorState& s) {
  // Group amplitudes by the non-frame part of the config.
  FrameKind fk = FrameKind::None;
  s.for_each([&](const BasisConfig& c, cplx) { fk = c.fkind; });
  if (fk == FrameKind::None)
    throw std::invalid_argument("frame_reduced_density: no frame factor present");
  const ModeGrid& fg = s.binds.frame_grid(fk);
  int nf = fg.size();
  std::unordered_map<std::uint64_t, std::vector<cplx>> rows;
  s.for_each([&](BasisConfig c, cplx a) {
    int m = c.frame;
    c.fkind = FrameKind::None;
    c.frame = 0;
    auto& row = rows[c.key()];
    if (row.empty()) row.assign(nf, cplx{});
    row[m] += a;
  });
  std::vector<std::vector<cplx>> rho(nf, std::vector<cplx>(nf, cplx{}));
  for (const auto& [k, row] : rows)
    for (int m = 0; m < nf; ++m)
      for (int m2 = 0; m2 < nf; ++m2) rho[m][m2] += row[m] * std::conj(row[m2]);
  return rho;
}

double frame_purity(const SectorState& s) {
  auto rho = frame_reduced_density(s);
  int n = static_cast<int>(rho.size());
  double tr = 0.0, tr2 = 0.0;
  for (int i = 0; i < n; ++i) tr += rho[i][i].real();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) tr2 += (rho[i][j] * rho[j][i]).real();
  return tr2 / (tr * tr);
}

std::array<cplx, 3> graded_inner(const GradedState& a, const GradedState& b) {
  std::array<cplx, 3> z{};
  z[0] = inner(a.zeroth, b.zeroth);
  z[1] = inner(a.zeroth, b.first) + inner(a.first, b.zeroth);
  z[2] = inner(a.first, b.first);
  return z;
}

namespace {

// Multiply two order-expansions and evaluate at lambda, truncating at first
// order when requested.
cplx eval_product(const std::array<cplx, 3>& x, const std::array<cplx, 3>& y, double lambda,
                  bool truncate) {
  cplx out = x[0] * y[0];
  cplx o1 = x[0] * y[1] + x[1] * y[0];
  out += lambda * o1;
  if (!truncate) {
    cplx o2 = x[0] * y[2] + x[1] * y[1] + x[2] * y[0];
    cplx o3 = x[1] * y[2] + x[2] * y[1];
    cplx o4 = x[2] * y[2];
    double l2 = lambda * lambda;
    out += l2 * o2 + l2 * lambda * o3 + l2 * l2 * o4;
  }
  return out;
}

cplx eval_single(const std::array<cplx, 3>& x, double lambda, bool truncate) {
  cplx out = x[0] + lambda * x[1];
  if (!truncate) out += lambda * lambda * x[2];
  return out;
}

}  // namespace

cplx trace(const DensityOperator& rho) {
  cplx tr{};
  for (const auto& m : rho.members)
    tr += m.weight * eval_single(graded_inner(m.bra, m.ket), rho.lambda, rho.order_lambda_truncated);
  return tr;
}

cplx matrix_element(const SectorState& bra, const DensityOperator& rho, const SectorState& ket) {
  GradedState gb = GradedState::plain(bra), gk = GradedState::plain(ket);
  cplx v{};
  for (const auto& m : rho.members)
    v += m.weight * eval_product(graded_inner(gb, m.ket), graded_inner(m.bra, gk), rho.lambda,
                                 rho.order_lambda_truncated);
  return v;
}

cplx expectation_rank_one(const DensityOperator& rho, const GradedState& q) {
  cplx v{};
  for (const auto& m : rho.members)
    v += m.weight * eval_product(graded_inner(q, m.ket), graded_inner(m.bra, q), rho.lambda,
                                 rho.order_lambda_truncated);
  return v;
}

cplx expectation_rank_one_untruncated(const DensityOperator& rho, const GradedState& q) {
  cplx v{};
  for (const auto& m : rho.members)
    v += m.weight * eval_product(graded_inner(q, m.ket), graded_inner(m.bra, q), rho.lambda, false);
  return v;
}

}  // namespace udw
