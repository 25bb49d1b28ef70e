#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace oddvmc {

struct Nucleus {
  std::array<double, 3> position{}; // Bohr
  double charge = 1.0;
};

/// Nuclei plus spin-resolved electron counts. Electrons are ordered with all
/// spin-up electrons first.
struct Molecule {
  std::string name;
  std::vector<Nucleus> nuclei;
  int n_up = 0;
  int n_down = 0;

  int n_electrons() const { return n_up + n_down; }
  int n_nuclei() const { return static_cast<int>(nuclei.size()); }
  double total_charge() const;

  /// Throws std::invalid_argument on empty systems, bad charges, or
  /// coincident nuclei.
  void validate() const;
};

/// Built-in systems: H, He, H2 (1.4 a0), and the diatomics LiH (3.015),
/// Li2 (5.051), N2 (2.068), N2-distorted (4.0), aligned along z.
Molecule molecule_preset(std::string_view name);
std::vector<std::string> molecule_preset_names();

} // namespace oddvmc
