#pragma once

#include <span>

#include "udw/hamiltonian.hpp"

namespace udw {

// Pseudo-position state |x, a> with amplitudes e^{i t omega} e^{-i p x}
// / sqrt(2 omega) over the level-a detector grid (photon vacuum sector).
// With `constant_omega` the dispersion is frozen to the level rest mass,
// which turns the construction into an exact discrete Fourier kernel.
SectorState pseudo_position_state(const GridBindings& b, double x, int level, double t,
                                  bool constant_omega = false);

// Conjugate lattice x_j = 2 pi j / (n_points * dp_eff) of a massive grid,
// with dp_eff the central momentum spacing m * deta.
std::vector<double> conjugate_position_lattice(const ModeGrid& g, int n_points);

// Frobenius distance (relative) between the normalized pseudo-position
// overlap matrix and the bandlimited ideal obtained with omega frozen to the
// rest mass. Decreases as the mass grows against a fixed momentum window.
double position_locality_defect(const GridBindings& b, int level, std::span<const double> xs);

// Operator-norm distance between the counter-rotating-term Hamiltonian and
// the first-quantized reference (plane-wave position kernels, constant
// omega = m + E_a), estimated by power iteration on the one-particle sector.
double compare_hint_forms(const GridBindings& b, double lambda, double t = 0.0);

// max |C - 1| element of the position-quadrature completeness operator
// sum_j (dx 2 omega / 2 pi) |x_j><x_j| on the bandlimited subspace,
// evaluated with the constant-omega construction.
double completeness_residual(const GridBindings& b, int level, std::span<const double> xs);

}  // namespace udw
