#pragma once

// Molecular Hamiltonian in Hartree atomic units: Coulomb potential terms,
// kinetic energy from a jet of log|psi|, local energy, and the nuclear cusp
// scan.

#include "oddvmc/ansatz.hpp"

#include <array>
#include <span>
#include <vector>

namespace oddvmc {

// Particles closer than this (Bohr) count as coincident.
inline constexpr double kCoincidenceDistance = 1e-12;

struct PotentialTerms {
  double electron_nuclear = 0.0;
  double electron_electron = 0.0;
  double nuclear_nuclear = 0.0;
  double total() const { return electron_nuclear + electron_electron + nuclear_nuclear; }
};

struct LocalEnergyBreakdown {
  double kinetic = 0.0;
  double electron_nuclear = 0.0;
  double electron_electron = 0.0;
  double nuclear_nuclear = 0.0;
  double total = 0.0;
};

double nuclear_repulsion(const Molecule& mol);

/// Rigorous floor on <H> for any normalisable state: each electron's
/// one-body part is >= -Z_tot^2 / 2, repulsion is >= 0. So
/// -N Z_tot^2 / 2 + V_nn (exact for hydrogen).
double energy_lower_bound(const Molecule& mol);

/// Throws SingularEvaluation when two particles coincide.
PotentialTerms potential_energy(std::span<const double> r, const Molecule& mol);

/// -1/2 (lap log|psi| + |grad log|psi||^2). Throws on a nodal value.
template <std::floating_point R> double kinetic_energy(const SignedLog<BasicJet<R>>& logpsi) {
  if (logpsi.is_zero()) {
    throw SingularEvaluation("kinetic energy requested at a node");
  }
  const auto& j = logpsi.logabs;
  return -0.5 * (static_cast<double>(j.lap) + static_cast<double>(j.grad_norm2()));
}

LocalEnergyBreakdown local_energy(const Ansatz& ansatz, std::span<const double> r, std::span<const double> params);
/// Single-precision evaluation of psi; the potential stays in double.
LocalEnergyBreakdown local_energy(const Ansatz& ansatz, std::span<const double> r, std::span<const float> params);

struct CuspPoint {
  double radius = 0.0;
  double along = 0.0;     // -(d psi / d r) / psi along +direction
  double averaged = 0.0;  // mean of the +direction and -direction values
  bool flagged = false;   // node crossed or evaluation failed
};

/// Moves `electron` to R_m + radius * (+-direction) with every other electron
/// at `background`, and records the radial log-derivative of psi.
std::vector<CuspPoint> cusp_scan(const Ansatz& ansatz, std::span<const double> params, int nucleus,
                                 std::array<double, 3> direction, std::span<const double> radii,
                                 std::span<const double> background, int electron = 0);

/// Log-spaced radii from 10^hi down to 10^lo.
std::vector<double> log_radii(double hi_exp, double lo_exp, int count);

} // namespace oddvmc
