#include "oddvmc/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace oddvmc {

namespace {

double distance(const double* a, const double* b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

LocalEnergyBreakdown assemble(double kinetic, const PotentialTerms& v) {
  LocalEnergyBreakdown e;
  e.kinetic = kinetic;
  e.electron_nuclear = v.electron_nuclear;
  e.electron_electron = v.electron_electron;
  e.nuclear_nuclear = v.nuclear_nuclear;
  e.total = kinetic + v.electron_nuclear + v.electron_electron + v.nuclear_nuclear;
  return e;
}

} // namespace

double nuclear_repulsion(const Molecule& mol) {
  double e = 0.0;
  for (std::size_t a = 0; a < mol.nuclei.size(); ++a) {
    for (std::size_t b = a + 1; b < mol.nuclei.size(); ++b) {
      const double d = distance(mol.nuclei[a].position.data(), mol.nuclei[b].position.data());
      e += mol.nuclei[a].charge * mol.nuclei[b].charge / d;
    }
  }
  return e;
}

double energy_lower_bound(const Molecule& mol) {
  // split -1/2 lap as sum_m (Z_m / Z) (-1/2 lap); each piece against
  // -Z_m / r_m is at least -Z_m Z / 2
  double z = 0.0;
  for (const auto& n : mol.nuclei) {
    z += n.charge;
  }
  return -0.5 * mol.n_electrons() * z * z + nuclear_repulsion(mol);
}

PotentialTerms potential_energy(std::span<const double> r, const Molecule& mol) {
  const int n = mol.n_electrons();
  if (static_cast<int>(r.size()) != 3 * n) {
    throw ShapeError("expected " + std::to_string(3 * n) + " coordinates");
  }
  PotentialTerms v;
  for (int i = 0; i < n; ++i) {
    for (const auto& nuc : mol.nuclei) {
      const double d = distance(&r[static_cast<std::size_t>(3 * i)], nuc.position.data());
      if (d < kCoincidenceDistance) {
        throw SingularEvaluation("electron " + std::to_string(i) + " sits on a nucleus");
      }
      v.electron_nuclear -= nuc.charge / d;
    }
    for (int j = i + 1; j < n; ++j) {
      const double d = distance(&r[static_cast<std::size_t>(3 * i)], &r[static_cast<std::size_t>(3 * j)]);
      if (d < kCoincidenceDistance) {
        throw SingularEvaluation("electrons " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      }
      v.electron_electron += 1.0 / d;
    }
  }
  v.nuclear_nuclear = nuclear_repulsion(mol);
  return v;
}

LocalEnergyBreakdown local_energy(const Ansatz& ansatz, std::span<const double> r, std::span<const double> params) {
  const auto v = potential_energy(r, ansatz.molecule());
  return assemble(kinetic_energy(ansatz.log_psi_jet(r, params)), v);
}

LocalEnergyBreakdown local_energy(const Ansatz& ansatz, std::span<const double> r, std::span<const float> params) {
  const auto v = potential_energy(r, ansatz.molecule());
  return assemble(kinetic_energy(ansatz.log_psi_jet(r, params)), v);
}

std::vector<CuspPoint> cusp_scan(const Ansatz& ansatz, std::span<const double> params, int nucleus,
                                 std::array<double, 3> direction, std::span<const double> radii,
                                 std::span<const double> background, int electron) {
  const auto& mol = ansatz.molecule();
  if (nucleus < 0 || nucleus >= mol.n_nuclei()) {
    throw std::out_of_range("nucleus index " + std::to_string(nucleus) + " out of range");
  }
  if (electron < 0 || electron >= mol.n_electrons()) {
    throw std::out_of_range("electron index out of range");
  }
  if (static_cast<int>(background.size()) != ansatz.dim()) {
    throw ShapeError("background must hold 3N coordinates");
  }
  const double norm = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1] + direction[2] * direction[2]);
  if (!(norm > 0.0)) {
    throw std::invalid_argument("cusp direction must be nonzero");
  }
  for (auto& d : direction) {
    d /= norm;
  }
  const auto& centre = mol.nuclei[static_cast<std::size_t>(nucleus)].position;
  std::vector<double> r(background.begin(), background.end());

  // -(d/d rho) log|psi| at R + rho * s * direction, s = +-1
  auto radial = [&](double rho, double s, int& sign) {
    for (int k = 0; k < 3; ++k) {
      r[static_cast<std::size_t>(3 * electron + k)] = centre[k] + s * rho * direction[k];
    }
    const auto lp = ansatz.log_psi_jet(r, params);
    sign = lp.sign;
    if (lp.is_zero()) {
      throw SingularEvaluation("node");
    }
    double g = 0.0;
    for (int k = 0; k < 3; ++k) {
      g += lp.logabs.grad[static_cast<std::size_t>(3 * electron + k)] * s * direction[k];
    }
    return -g;
  };

  std::vector<CuspPoint> out;
  int prev_sign = 0;
  for (double rho : radii) {
    if (!(rho > 0.0)) {
      throw std::invalid_argument("cusp radii must be positive");
    }
    CuspPoint p;
    p.radius = rho;
    try {
      int s_plus = 0;
      int s_minus = 0;
      p.along = radial(rho, 1.0, s_plus);
      const double minus = radial(rho, -1.0, s_minus);
      p.averaged = 0.5 * (p.along + minus);
      p.flagged = (prev_sign != 0 && s_plus != prev_sign) || s_plus != s_minus;
      prev_sign = s_plus;
    } catch (const std::exception&) {
      p.flagged = true;
      p.along = std::nan("");
      p.averaged = std::nan("");
    }
    out.push_back(p);
  }
  return out;
}

std::vector<double> log_radii(double hi_exp, double lo_exp, int count) {
  if (count < 2) {
    return {std::pow(10.0, hi_exp)};
  }
  std::vector<double> r;
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    r.push_back(std::pow(10.0, hi_exp + t * (lo_exp - hi_exp)));
  }
  return r;
}

} // namespace oddvmc
