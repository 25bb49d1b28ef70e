#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oddvmc/hamiltonian.hpp"
#include "oddvmc/theory.hpp"
#include "support.hpp"

#include <cmath>

using namespace oddvmc;

namespace {

AnsatzSpec exact_hydrogenic(double zeta = 1.0) {
  AnsatzSpec s;
  s.orbital_kind = OrbitalKind::exponential;
  s.primitives = 1;
  s.exponent_min = zeta;
  s.exponent_max = zeta;
  return s;
}

AnsatzSpec single_gaussian() {
  AnsatzSpec s;
  s.orbital_kind = OrbitalKind::gaussian;
  s.primitives = 1;
  s.exponent_min = 0.5;
  s.exponent_max = 0.5;
  return s;
}

} // namespace

TEST_CASE("coulomb terms") {
  const auto h = molecule_preset("H");
  const std::vector<double> r{0.0, 2.0, 0.0};
  const auto t = potential_energy(r, h);
  CHECK(t.electron_nuclear == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(t.electron_electron == 0.0);
  CHECK(t.nuclear_nuclear == 0.0);

  CHECK(nuclear_repulsion(molecule_preset("H2")) == doctest::Approx(1.0 / 1.4).epsilon(1e-15));
  CHECK(nuclear_repulsion(molecule_preset("LiH")) == doctest::Approx(3.0 / 3.015).epsilon(1e-15));

  const auto he = molecule_preset("He");
  const std::vector<double> r2{1.0, 0.0, 0.0, 0.0, 0.0, -1.0};
  const auto u = potential_energy(r2, he);
  CHECK(u.electron_nuclear == doctest::Approx(-4.0));
  CHECK(u.electron_electron == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("energy floor") {
  CHECK(energy_lower_bound(molecule_preset("H")) == doctest::Approx(-0.5));
  CHECK(energy_lower_bound(molecule_preset("He")) == doctest::Approx(-4.0));
  const auto lih = molecule_preset("LiH");
  CHECK(energy_lower_bound(lih) == doctest::Approx(-32.0 + nuclear_repulsion(lih)));
  // under the helium trial energy at every zeta: zeta^2 - 27 zeta / 8 >= -729 / 256
  CHECK(energy_lower_bound(molecule_preset("He")) < -729.0 / 256.0);
  const auto h2 = molecule_preset("H2");
  CHECK(energy_lower_bound(h2) == doctest::Approx(-4.0 + 1.0 / 1.4));
}

TEST_CASE("coincident particles are rejected") {
  const auto he = molecule_preset("He");
  const std::vector<double> same{0.3, 0.2, 0.1, 0.3, 0.2, 0.1};
  CHECK_THROWS_AS(potential_energy(same, he), SingularEvaluation);
  const std::vector<double> on_nucleus{0.0, 0.0, 0.0, 1.0, 0.0, 0.0};
  CHECK_THROWS_AS(potential_energy(on_nucleus, he), SingularEvaluation);
}

TEST_CASE("kinetic energy from a jet") {
  // psi = exp(-|r|^2) at the origin: lap log psi = -6, grad 0
  std::vector<Jet> x;
  for (int k = 0; k < 3; ++k) {
    x.push_back(Jet::variable(0.0, 3, k));
  }
  const Jet logpsi = -(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  CHECK(kinetic_energy(SignedLogJet{1, logpsi}) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(kinetic_energy(SignedLogJet{1, Jet::constant(2.0, 3)}) == 0.0);
  CHECK_THROWS_AS(kinetic_energy(SignedLogJet{0, Jet::constant(0.0, 3)}), SingularEvaluation);

  // e^{-r} at r = 2: -1/2 (zeta^2 - 2 zeta / r) = 0
  Ansatz a(molecule_preset("H"), exact_hydrogenic());
  const auto p = a.init_params(0);
  const std::vector<double> r{0.0, 0.0, 2.0};
  CHECK(std::abs(kinetic_energy(a.log_psi_jet(r, p))) < 1e-14);
}

TEST_CASE("hydrogen ground state has constant local energy") {
  Ansatz a(molecule_preset("H"), exact_hydrogenic());
  const auto p = a.init_params(0);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const auto r = testsupport::random_config(a.molecule(), rng, 2.0);
    CHECK(std::abs(local_energy(a, r, p).total + 0.5) < 1e-10);
  }
  CHECK(std::abs(local_energy(a, std::vector<double>{1e-6, 0.0, 0.0}, p).total + 0.5) < 1e-6);
}

TEST_CASE("helium hydrogenic trial matches the analytic energy") {
  for (double zeta : {1.5, 1.6875, 2.0}) {
    CAPTURE(zeta);
    Ansatz a(molecule_preset("He"), exact_hydrogenic(zeta));
    const auto p = a.init_params(0);
    const auto configs = psi2_configurations(a, p, 20000, 3);
    double sum = 0.0;
    double sum2 = 0.0;
    for (const auto& r : configs) {
      const double e = local_energy(a, r, p).total;
      sum += e;
      sum2 += e * e;
    }
    const double n = static_cast<double>(configs.size());
    const double mean = sum / n;
    // walkers are thinned every 10 sweeps; treat samples as independent but
    // allow 4 standard errors
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    const double exact = zeta * zeta - 27.0 * zeta / 8.0;
    CHECK(std::abs(mean - exact) < 4.0 * se);
    CHECK(se < 0.01);
  }
}

TEST_CASE("local energy is symmetric under same-spin exchange and translation") {
  const auto mol = molecule_preset("LiH");
  AnsatzSpec s;
  s.determinants = 2;
  s.readout = ReadoutKind::implicit;
  s.jastrow = JastrowMode::symmetric_odd;
  s.domain = Domain::linlog;
  s.odd_hidden = {6};
  s.jastrow_hidden = {6};
  Ansatz a(mol, s);
  auto p = perturbed_params(a, 3);
  testsupport::set_data_alpha(a, p, 3);
  const auto configs = psi2_configurations(a, p, 30, 3);
  const std::array<double, 3> shift{0.7, -1.3, 2.1};
  Molecule moved = mol;
  for (auto& n : moved.nuclei) {
    for (int k = 0; k < 3; ++k) {
      n.position[static_cast<std::size_t>(k)] += shift[static_cast<std::size_t>(k)];
    }
  }
  Ansatz b(moved, s);
  for (const auto& r : configs) {
    const auto e = local_energy(a, r, p);
    const auto sw = local_energy(a, testsupport::swap_electrons(r, 0, 1), p);
    CHECK(std::abs(sw.total - e.total) < 1e-10 * std::max(1.0, std::abs(e.total)));
    auto rs = r;
    for (std::size_t i = 0; i < rs.size(); ++i) {
      rs[i] += shift[i % 3];
    }
    const auto et = local_energy(b, rs, p);
    CHECK(std::abs(et.kinetic - e.kinetic) < 1e-10 * std::max(1.0, std::abs(e.kinetic)));
    CHECK(std::abs(et.electron_nuclear - e.electron_nuclear) < 1e-10);
    CHECK(std::abs(et.electron_electron - e.electron_electron) < 1e-10);
    CHECK(std::abs(et.nuclear_nuclear - e.nuclear_nuclear) < 1e-10);
  }
}

TEST_CASE("breakdown adds up") {
  const auto mol = molecule_preset("H2");
  Ansatz a(mol, AnsatzSpec{});
  const auto p = a.init_params(1);
  std::mt19937_64 rng(1);
  const auto r = testsupport::random_config(mol, rng);
  const auto e = local_energy(a, r, p);
  CHECK(e.total == doctest::Approx(e.kinetic + e.electron_nuclear + e.electron_electron + e.nuclear_nuclear));
  CHECK(e.nuclear_nuclear == doctest::Approx(1.0 / 1.4));
}

TEST_CASE("cusp scan: exponential hydrogen reaches Z, gaussian reaches zero") {
  const auto h = molecule_preset("H");
  const auto radii = log_radii(-1.0, -6.0, 11);
  REQUIRE(radii.size() == 11);
  CHECK(radii.front() == doctest::Approx(0.1));
  CHECK(radii.back() == doctest::Approx(1e-6));
  const std::array<double, 3> dir{0.0, 0.0, 1.0};
  const std::vector<double> bg(3, 0.0);

  Ansatz e(h, exact_hydrogenic());
  const auto scan_e = cusp_scan(e, e.init_params(0), 0, dir, radii, bg);
  for (const auto& pt : scan_e) {
    CHECK_FALSE(pt.flagged);
    CHECK(pt.averaged == doctest::Approx(1.0).epsilon(1e-9));
  }

  Ansatz g(h, single_gaussian());
  const auto scan_g = cusp_scan(g, g.init_params(0), 0, dir, radii, bg);
  CHECK(std::abs(scan_g.back().averaged) < 1e-5);
  CHECK(std::abs(scan_g.front().averaged) > std::abs(scan_g.back().averaged));
}

TEST_CASE("cusp scan on gaussian helium and LiH goes to zero") {
  const auto he = molecule_preset("He");
  Ansatz a(he, AnsatzSpec{});
  const auto p = a.init_params(0);
  const std::vector<double> bg{0.0, 0.0, 0.0, 0.4, -0.3, 0.5};
  const auto scan = cusp_scan(a, p, 0, {1.0, 0.0, 0.0}, log_radii(-1.0, -6.0, 6), bg);
  CHECK(std::abs(scan.back().averaged) < 0.01);

  const auto lih = molecule_preset("LiH");
  AnsatzSpec s;
  s.determinants = 2;
  s.readout = ReadoutKind::explicit_odd;
  s.odd_hidden = {6};
  Ansatz b(lih, s);
  const auto q = perturbed_params(b, 5);
  std::mt19937_64 rng(5);
  const auto bgl = testsupport::random_config(lih, rng);
  for (int m = 0; m < 2; ++m) {
    const auto sc = cusp_scan(b, q, m, {0.0, 0.6, 0.8}, log_radii(-2.0, -5.0, 4), bgl);
    CHECK_FALSE(sc.back().flagged);
    CHECK(std::abs(sc.back().averaged) < 0.01);
  }
}

TEST_CASE("cusp scan input errors") {
  Ansatz a(molecule_preset("H"), exact_hydrogenic());
  const auto p = a.init_params(0);
  const std::vector<double> bg(3, 0.0);
  const std::vector<double> radii{0.1};
  CHECK_THROWS_AS(cusp_scan(a, p, 3, {0.0, 0.0, 1.0}, radii, bg), std::out_of_range);
  CHECK_THROWS_AS(cusp_scan(a, p, 0, {0.0, 0.0, 0.0}, radii, bg), std::invalid_argument);
  const std::vector<double> bad{-0.1};
  CHECK_THROWS_AS(cusp_scan(a, p, 0, {0.0, 0.0, 1.0}, bad, bg), std::invalid_argument);
}
