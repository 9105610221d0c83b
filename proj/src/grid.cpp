#include "udw/grid.hpp"

#include <cmath>

namespace udw {

ModeGrid ModeGrid::massive(double mass, int n_modes, double spacing, double center) {
  if (!(mass > 0.0)) throw std::invalid_argument("ModeGrid::massive: mass must be > 0");
  if (n_modes < 2) throw std::invalid_argument("ModeGrid::massive: need at least 2 modes");
  if (!(spacing > 0.0)) throw std::invalid_argument("ModeGrid::massive: spacing must be > 0");

  ModeGrid g;
  g.kind_ = GridKind::MassiveRapidity;
  g.mass_ = mass;
  g.spacing_ = spacing;
  g.center_ = center;
  g.branch_size_ = n_modes;
  g.momentum_.reserve(n_modes);
  for (int i = 0; i < n_modes; ++i) {
    double eta = center + (i - 0.5 * (n_modes - 1)) * spacing;
    g.param_.push_back(eta);
    g.momentum_.push_back(mass * std::sinh(eta));
    g.energy_.push_back(mass * std::cosh(eta));
    g.weight_.push_back(mass * std::cosh(eta) * spacing);  // w = omega * deta
  }
  return g;
}

ModeGrid ModeGrid::massless(double k_min, double spacing, int n_per_branch,
                            PhotonBranches branches) {
  if (!(k_min > 0.0)) throw std::invalid_argument("ModeGrid::massless: k_min must be > 0");
  if (n_per_branch < 2) throw std::invalid_argument("ModeGrid::massless: need at least 2 modes per branch");
  if (!(spacing > 0.0)) throw std::invalid_argument("ModeGrid::massless: spacing must be > 0");

  ModeGrid g;
  g.kind_ = GridKind::MasslessLog;
  g.mass_ = 0.0;
  g.spacing_ = spacing;
  g.k_min_ = k_min;
  g.branches_ = branches;
  g.branch_size_ = n_per_branch;

  auto push = [&](int sign, int j) {
    double u = j * spacing;
    double kabs = k_min * std::exp(u);
    g.param_.push_back(u);
    g.momentum_.push_back(sign * kabs);
    g.energy_.push_back(kabs);
    g.weight_.push_back(kabs * spacing);  // w = |k| * du
  };

  if (branches == PhotonBranches::Negative || branches == PhotonBranches::Both) {
    g.n_negative_ = n_per_branch;
    for (int j = 0; j < n_per_branch; ++j) push(-1, j);
  }
  if (branches == PhotonBranches::Positive || branches == PhotonBranches::Both) {
    for (int j = 0; j < n_per_branch; ++j) push(+1, j);
  }
  return g;
}

std::optional<int> ModeGrid::snap(double p) const {
  if (kind_ == GridKind::MassiveRapidity) {
    double eta = std::asinh(p / mass_);
    double eta0 = param_[0];
    double s = (eta - eta0) / spacing_;
    long idx = std::lround(s);
    if (idx < 0 || idx >= size()) return std::nullopt;
    if (std::abs(s - static_cast<double>(idx)) > 0.5 + 1e-12) return std::nullopt;
    return static_cast<int>(idx);
  }
  // Massless: match the sign branch, then snap in u = log(|k|/k_min).
  if (p == 0.0) return std::nullopt;
  int sign = p < 0.0 ? -1 : +1;
  if (sign < 0 && n_negative_ == 0) return std::nullopt;
  if (sign > 0 && n_negative_ == size()) return std::nullopt;
  double u = std::log(std::abs(p) / k_min_);
  double s = u / spacing_;
  long j = std::lround(s);
  if (j < 0 || j >= branch_size_) return std::nullopt;
  if (std::abs(s - static_cast<double>(j)) > 0.5 + 1e-12) return std::nullopt;
  return sign < 0 ? static_cast<int>(j) : static_cast<int>(n_negative_ + j);
}

std::optional<int> ModeGrid::shift_index(int i, int steps) const {
  if (kind_ == GridKind::MassiveRapidity) {
    int t = i + steps;
    if (t < 0 || t >= size()) return std::nullopt;
    return t;
  }
  // Branch-local index; positive branch shifts with +steps, negative with -steps.
  bool neg = i < n_negative_;
  int j = neg ? i : i - n_negative_;
  int t = neg ? j - steps : j + steps;
  if (t < 0 || t >= branch_size_) return std::nullopt;
  return neg ? t : n_negative_ + t;
}

}  // namespace udw
