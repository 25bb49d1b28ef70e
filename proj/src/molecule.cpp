#include "oddvmc/molecule.hpp"

#include <cmath>
#include <stdexcept>

namespace oddvmc {

double Molecule::total_charge() const {
  double z = 0.0;
  for (const auto& n : nuclei) {
    z += n.charge;
  }
  return z;
}

void Molecule::validate() const {
  if (nuclei.empty()) {
    throw std::invalid_argument("molecule has no nuclei");
  }
  for (const auto& n : nuclei) {
    if (!(n.charge > 0.0) || !std::isfinite(n.charge)) {
      throw std::invalid_argument("nuclear charges must be positive");
    }
    for (double x : n.position) {
      if (!std::isfinite(x)) {
        throw std::invalid_argument("nuclear position is not finite");
      }
    }
  }
  if (total_charge() < 1.0) {
    throw std::invalid_argument("total nuclear charge must be at least 1");
  }
  if (n_up < 0 || n_down < 0 || n_electrons() < 1) {
    throw std::invalid_argument("molecule needs at least one electron");
  }
  for (std::size_t a = 0; a < nuclei.size(); ++a) {
    for (std::size_t b = a + 1; b < nuclei.size(); ++b) {
      double d2 = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double d = nuclei[a].position[k] - nuclei[b].position[k];
        d2 += d * d;
      }
      if (d2 == 0.0) {
        throw std::invalid_argument("nuclei must be pairwise distinct");
      }
    }
  }
}

namespace {

Molecule diatomic(std::string name, double z_a, double z_b, double distance, int n_up, int n_down) {
  Molecule m;
  m.name = std::move(name);
  m.nuclei = {Nucleus{{0.0, 0.0, 0.0}, z_a}, Nucleus{{0.0, 0.0, distance}, z_b}};
  m.n_up = n_up;
  m.n_down = n_down;
  return m;
}

Molecule atom(std::string name, double z, int n_up, int n_down) {
  Molecule m;
  m.name = std::move(name);
  m.nuclei = {Nucleus{{0.0, 0.0, 0.0}, z}};
  m.n_up = n_up;
  m.n_down = n_down;
  return m;
}

} // namespace

Molecule molecule_preset(std::string_view name) {
  if (name == "H") {
    return atom("H", 1.0, 1, 0);
  }
  if (name == "He") {
    return atom("He", 2.0, 1, 1);
  }
  if (name == "H2") {
    return diatomic("H2", 1.0, 1.0, 1.4, 1, 1);
  }
  if (name == "LiH") {
    return diatomic("LiH", 3.0, 1.0, 3.015, 2, 2);
  }
  if (name == "Li2") {
    return diatomic("Li2", 3.0, 3.0, 5.051, 3, 3);
  }
  if (name == "N2") {
    return diatomic("N2", 7.0, 7.0, 2.068, 7, 7);
  }
  if (name == "N2-distorted") {
    return diatomic("N2-distorted", 7.0, 7.0, 4.0, 7, 7);
  }
  throw std::invalid_argument("unknown molecule preset '" + std::string(name) + "'");
}

std::vector<std::string> molecule_preset_names() {
  return {"H", "He", "H2", "LiH", "Li2", "N2", "N2-distorted"};
}

} // namespace oddvmc
