#include "udw/nonrel.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace udw {

SectorState pseudo_position_state(const GridBindings& b, double x, int level, double t,
                                  bool constant_omega) {
  const GridPtr& g = b.detector[level];
  if (!g) throw std::invalid_argument("pseudo_position_state: detector grid not bound");
  SectorState s(b, t);
  for (int n = 0; n < g->size(); ++n) {
    double omega = constant_omega ? g->mass() : g->energy(n);
    cplx a = std::polar(1.0, t * omega - g->momentum(n) * x) *
             std::sqrt(g->weight(n) / (2.0 * omega));
    BasisConfig c;
    c.level = static_cast<std::uint8_t>(level);
    c.det = static_cast<std::uint16_t>(n);
    s.set(c, a);
  }
  return s;
}

std::vector<double> conjugate_position_lattice(const ModeGrid& g, int n_points) {
  double dp_eff = g.mass() * g.spacing();
  std::vector<double> xs(n_points);
  for (int j = 0; j < n_points; ++j)
    xs[j] = 2.0 * std::numbers::pi * j / (n_points * dp_eff);
  return xs;
}

namespace {

std::vector<std::vector<cplx>> overlap_matrix(const GridBindings& b, int level,
                                              std::span<const double> xs, bool constant_omega) {
  int n = static_cast<int>(xs.size());
  std::vector<SectorState> states;
  states.reserve(n);
  for (double x : xs) states.push_back(pseudo_position_state(b, x, level, 0.0, constant_omega));
  std::vector<std::vector<cplx>> o(n, std::vector<cplx>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) o[i][j] = inner(states[i], states[j]);
  return o;
}

}  // namespace

double position_locality_defect(const GridBindings& b, int level, std::span<const double> xs) {
  auto o = overlap_matrix(b, level, xs, false);
  auto ideal = overlap_matrix(b, level, xs, true);
  int n = static_cast<int>(xs.size());
  // Normalize both kernels by their (x-independent) diagonal.
  double d = o[0][0].real(), di = ideal[0][0].real();
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx diff = o[i][j] / d - ideal[i][j] / di;
      num += std::norm(diff);
      den += std::norm(ideal[i][j] / di);
    }
  return std::sqrt(num / den);
}

double compare_hint_forms(const GridBindings& b, double lambda, double t) {
  RecoilHamiltonian h(b, lambda, false);
  RecoilHamiltonian h_ref(b, lambda, true);  // constant-omega first-quantized reference

  // Hermitian difference; spectral radius by power iteration over the
  // one-detector-particle sector (both levels, <= 1 photon).
  auto diff = [&](const SectorState& x) {
    SectorState y = h.apply(x, t);
    y.axpy(-1.0, h_ref.apply(x, t));
    return y;
  };

  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SectorState x(b);
  const ModeGrid& ph = *b.photon;
  for (int level = 0; level < 2; ++level) {
    const ModeGrid& g = *b.detector[level];
    for (int n = 0; n < g.size(); ++n) {
      BasisConfig c;
      c.level = static_cast<std::uint8_t>(level);
      c.det = static_cast<std::uint16_t>(n);
      x.add(c, cplx(u(rng), u(rng)));
      c.has_photon = true;
      for (int j = 0; j < ph.size(); ++j) {
        c.photon = static_cast<std::uint16_t>(j);
        x.add(c, cplx(u(rng), u(rng)));
      }
    }
  }
  x *= 1.0 / x.norm();

  double est = 0.0;
  for (int it = 0; it < 60; ++it) {
    SectorState y = diff(x);
    double ny = y.norm();
    if (ny < 1e-300) return 0.0;
    est = ny;
    y *= 1.0 / ny;
    x = std::move(y);
  }
  return est;
}

double completeness_residual(const GridBindings& b, int level, std::span<const double> xs) {
  const ModeGrid& g = *b.detector[level];
  int n = g.size();
  int nx = static_cast<int>(xs.size());
  double dx = nx > 1 ? xs[1] - xs[0] : 0.0;
  double two_omega = 2.0 * g.mass();
  std::vector<SectorState> states;
  states.reserve(nx);
  for (double x : xs) states.push_back(pseudo_position_state(b, x, level, 0.0, true));
  double max_dev = 0.0;
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      cplx acc{};
      for (int j = 0; j < nx; ++j) {
        BasisConfig ca, cc;
        ca.level = cc.level = static_cast<std::uint8_t>(level);
        ca.det = static_cast<std::uint16_t>(a);
        cc.det = static_cast<std::uint16_t>(c);
        acc += std::conj(states[j].at(ca)) * states[j].at(cc);
      }
      acc *= dx * two_omega / (2.0 * std::numbers::pi);
      cplx expect = a == c ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
      max_dev = std::max(max_dev, std::abs(acc - expect));
    }
  return max_dev;
}

}  // namespace udw
