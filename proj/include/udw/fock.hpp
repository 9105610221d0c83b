#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "udw/grid.hpp"

namespace udw {

using cplx = std::complex<double>;

enum class FrameKind : std::uint8_t { None = 0, Ancilla = 1, Lab = 2 };

// Particle content of a basis ket: one detector quantum (level 0 or 1),
// zero or one photon, and optionally one frame particle (ancilla or lab).
struct BasisConfig {
  std::uint16_t det = 0;
  std::uint8_t level = 1;
  bool has_photon = false;
  std::uint16_t photon = 0;
  FrameKind fkind = FrameKind::None;
  std::uint16_t frame = 0;

  // Field layout: det 0..15, photon+1 16..32, frame+1 33..49, level 50,
  // frame kind 51..52 (the +1 fields need 17 bits for the "absent" zero).
  std::uint64_t key() const {
    std::uint64_t k = det;
    k |= std::uint64_t(has_photon ? photon + 1u : 0u) << 16;
    k |= std::uint64_t(fkind == FrameKind::None ? 0u : frame + 1u) << 33;
    k |= std::uint64_t(level & 1u) << 50;
    k |= std::uint64_t(static_cast<std::uint8_t>(fkind)) << 51;
    return k;
  }

  static BasisConfig from_key(std::uint64_t k) {
    BasisConfig c;
    c.det = static_cast<std::uint16_t>(k & 0xffffu);
    std::uint32_t ph = (k >> 16) & 0x1ffffu;
    c.has_photon = ph != 0;
    c.photon = c.has_photon ? static_cast<std::uint16_t>(ph - 1) : 0;
    std::uint32_t fr = (k >> 33) & 0x1ffffu;
    c.level = static_cast<std::uint8_t>((k >> 50) & 1u);
    c.fkind = static_cast<FrameKind>((k >> 51) & 3u);
    c.frame = (c.fkind != FrameKind::None && fr != 0) ? static_cast<std::uint16_t>(fr - 1) : 0;
    return c;
  }

  bool operator==(const BasisConfig& o) const { return key() == o.key(); }
};

// The two sectors of the spontaneous-emission problem plus the two extra
// combinations reached by the counter-rotating terms.
inline bool is_excited_vacuum(const BasisConfig& c) { return c.level == 1 && !c.has_photon; }
inline bool is_ground_photon(const BasisConfig& c) { return c.level == 0 && c.has_photon; }

struct GridBindings {
  std::array<GridPtr, 2> detector{};  // per internal level
  GridPtr photon;
  GridPtr ancilla;
  GridPtr lab;

  bool same(const GridBindings& o) const {
    return detector[0] == o.detector[0] && detector[1] == o.detector[1] &&
           photon == o.photon && ancilla == o.ancilla && lab == o.lab;
  }

  const ModeGrid& frame_grid(FrameKind k) const {
    if (k == FrameKind::Ancilla && ancilla) return *ancilla;
    if (k == FrameKind::Lab && lab) return *lab;
    throw std::invalid_argument("GridBindings: frame grid not bound");
  }
};

// Sparse complex amplitude vector over basis configs. Unit-normalized single
// modes carry no measure factor; the sqrt(w)/sqrt(2 omega) conversion from
// continuum wavepackets is applied at construction.
class SectorState {
 public:
  SectorState() = default;
  explicit SectorState(GridBindings b, double time = 0.0) : binds(std::move(b)), time(time) {}

  GridBindings binds;
  double time = 0.0;
  std::unordered_map<std::uint64_t, cplx> amp;

  bool empty() const { return amp.empty(); }

  void add(const BasisConfig& c, cplx a) {
    if (a == cplx{}) return;
    amp[c.key()] += a;
  }
  void set(const BasisConfig& c, cplx a) { amp[c.key()] = a; }
  cplx at(const BasisConfig& c) const {
    auto it = amp.find(c.key());
    return it == amp.end() ? cplx{} : it->second;
  }

  double norm2() const;
  double norm() const;

  SectorState& operator*=(cplx s);
  // this += s * other (bindings must match)
  void axpy(cplx s, const SectorState& other);

  template <class F>
  void for_each(F&& f) const {
    for (const auto& [k, a] : amp) f(BasisConfig::from_key(k), a);
  }
};

cplx inner(const SectorState& a, const SectorState& b);

inline SectorState operator*(cplx s, SectorState x) {
  x *= s;
  return x;
}
inline SectorState operator+(SectorState a, const SectorState& b) {
  a.axpy(1.0, b);
  return a;
}
inline SectorState operator-(SectorState a, const SectorState& b) {
  a.axpy(-1.0, b);
  return a;
}

// Unit-norm single-mode states (the discrete stand-in for momentum eigenstates).
SectorState unit_excited_state(const GridBindings& b, int det_index);
SectorState unit_ground_photon_state(const GridBindings& b, int det_index, int photon_index);

// Detector wavepacket in the photon-vacuum sector: amplitude at mode n is
// f(p_n) * sqrt(w_n / (2 omega_n)), the discrete image of the measure
// dp / sqrt(2 omega) acting on a momentum-space profile f.
SectorState wavepacket_state(const GridBindings& b, int level,
                             const std::function<cplx(double)>& f);

// Two-variable wavepacket over detector x photon modes (one-photon sector).
SectorState photon_wavepacket_state(const GridBindings& b, int level,
                                    const std::function<cplx(double, double)>& f);

// One-particle frame amplitudes from a momentum profile, same measure rule.
std::vector<cplx> frame_wavepacket(const ModeGrid& g, const std::function<cplx(double)>& f,
                                   bool normalize = true);

// Attach a frame-particle factor: product amplitudes over the extended configs.
SectorState tensor_with_frame(const SectorState& s, std::span<const cplx> frame_amp,
                              FrameKind which);

// Reduced density matrix of the frame factor (dense; for small oracles).
std::vector<std::vector<cplx>> frame_reduced_density(const SectorState& s);
double frame_purity(const SectorState& s);

// ---------------------------------------------------------------------------
// Low-rank density operators with an order-lambda grading.
// A graded state represents zeroth + lambda * first.
struct GradedState {
  SectorState zeroth;
  SectorState first;

  static GradedState plain(SectorState s) { return GradedState{std::move(s), SectorState{}}; }
};

// Coefficients of <a|b> by order in lambda: [0], [1], [2].
std::array<cplx, 3> graded_inner(const GradedState& a, const GradedState& b);

struct DensityMember {
  cplx weight;
  GradedState ket;
  GradedState bra;  // the operator contribution is weight * |ket><bra|
};

struct DensityOperator {
  double lambda = 0.0;
  bool order_lambda_truncated = false;
  std::vector<DensityMember> members;
};

// Tr rho (honors the order-lambda truncation flag).
cplx trace(const DensityOperator& rho);

// <bra| rho |ket> for plain states.
cplx matrix_element(const SectorState& bra, const DensityOperator& rho, const SectorState& ket);

// <q| rho |q> for a graded vector q = q0 + lambda q1; the product of the two
// graded brackets is truncated at first order in lambda when the flag is set.
cplx expectation_rank_one(const DensityOperator& rho, const GradedState& q);
cplx expectation_rank_one_untruncated(const DensityOperator& rho, const GradedState& q);

}  // namespace udw
