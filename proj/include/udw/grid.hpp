#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "udw/kinematics.hpp"

namespace udw {

enum class GridKind { MassiveRapidity, MasslessLog };

enum class PhotonBranches { Positive, Negative, Both };

// Discretized 1D momentum grid with explicit measure weights. Massive grids
// are uniform in rapidity (p_n = m sinh eta_n, w_n = omega_n * deta) so that
// boosts by integer multiples of the spacing act as index shifts. Massless
// grids are uniform in log|k| per branch (|k| = k_min e^{u}, w_n = |k_n| du)
// with a hard IR cutoff at k_min; boosts shift the two branches in opposite
// directions.
class ModeGrid {
 public:
  GridKind kind() const { return kind_; }
  int size() const { return static_cast<int>(momentum_.size()); }
  double spacing() const { return spacing_; }
  double mass() const { return mass_; }
  double k_min() const { return k_min_; }
  PhotonBranches branches() const { return branches_; }
  int branch_size() const { return branch_size_; }

  double momentum(int i) const { return momentum_[i]; }
  // On-shell energy of the grid's own species (photon: |k|).
  double energy(int i) const { return energy_[i]; }
  double weight(int i) const { return weight_[i]; }
  // Rapidity eta_i (massive) or log-parameter u_i (massless, per branch).
  double param(int i) const { return param_[i]; }
  // +1 / -1 momentum sign for massless grids; +1 for massive.
  int branch_sign(int i) const { return momentum_[i] < 0.0 ? -1 : +1; }

  // Nearest mode to momentum p within half a spacing of the grid parameter,
  // or nullopt when p falls outside the covered cells.
  std::optional<int> snap(double p) const;

  // Index shift realizing a boost by `steps * spacing` rapidity. Massless
  // grids shift the negative branch opposite to the positive one. Returns
  // nullopt when the shift leaves the grid.
  std::optional<int> shift_index(int i, int steps) const;

  static ModeGrid massive(double mass, int n_modes, double spacing, double center);
  static ModeGrid massless(double k_min, double spacing, int n_per_branch,
                           PhotonBranches branches);

 private:
  GridKind kind_ = GridKind::MassiveRapidity;
  double mass_ = 0.0;
  double spacing_ = 0.0;
  double center_ = 0.0;
  double k_min_ = 0.0;
  PhotonBranches branches_ = PhotonBranches::Both;
  int branch_size_ = 0;  // modes per branch (massless); == size() for massive
  int n_negative_ = 0;   // leading modes on the k < 0 branch
  std::vector<double> momentum_, energy_, weight_, param_;
};

using GridPtr = std::shared_ptr<const ModeGrid>;

inline GridPtr make_massive_grid(double mass, int n, double spacing, double center = 0.0) {
  return std::make_shared<const ModeGrid>(ModeGrid::massive(mass, n, spacing, center));
}

inline GridPtr make_photon_grid(double k_min, double spacing, int n_per_branch,
                                PhotonBranches branches = PhotonBranches::Both) {
  return std::make_shared<const ModeGrid>(ModeGrid::massless(k_min, spacing, n_per_branch, branches));
}

// Both detector level grids on one rapidity lattice, so that an aligned boost
// shifts the two levels by the same integer.
struct DetectorGrids {
  GridPtr level0;
  GridPtr level1;
};

inline DetectorGrids make_detector_grids(const Species& s, int n, double spacing,
                                         double center = 0.0) {
  return DetectorGrids{make_massive_grid(s.level_mass(0), n, spacing, center),
                       make_massive_grid(s.level_mass(1), n, spacing, center)};
}

}  // namespace udw
