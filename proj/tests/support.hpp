#pragma once

// Finite-difference oracles and small fixtures shared by the test binaries.

#include "oddvmc/ansatz.hpp"
#include "oddvmc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace testsupport {

using LdFn = std::function<long double(std::span<const long double>)>;

struct FdResult {
  std::vector<double> grad;
  double lap = 0.0;
  // the oracle's own error estimate: distance to the same quotients at twice
  // the step
  std::vector<double> grad_err;
  double lap_err = 0.0;

  // true when the difference quotients are themselves good to `tol` in the
  // relative-error metric used by the checks (tol sits 10x under 1e-6)
  bool trustworthy(double tol = 1e-7, double floor = 1e-3) const {
    for (std::size_t i = 0; i < grad.size(); ++i) {
      if (!(grad_err[i] < tol * std::max(std::abs(grad[i]), floor))) {
        return false;
      }
    }
    return lap_err < tol * std::max(std::abs(lap), floor);
  }
};

// Gradient by central differences at h (1e-5 by default); Laplacian by the
// fourth-order five-point stencil at h_lap. Both in long double. A plain
// second difference at 1e-5 has roundoff ~ eps |f| / h^2, too coarse for
// small Laplacians.
inline FdResult fd_grad_lap(const LdFn& f, std::span<const double> x, long double h = 1e-5L,
                            long double h_lap = 1e-3L) {
  std::vector<long double> p(x.begin(), x.end());
  const long double f0 = f(p);
  FdResult out;
  auto at = [&](std::size_t d, long double step) {
    const long double keep = p[d];
    p[d] = keep + step;
    const long double v = f(p);
    p[d] = keep;
    return v;
  };
  auto lap_at = [&](long double k) {
    long double lap = 0.0L;
    for (std::size_t d = 0; d < p.size(); ++d) {
      const long double s =
          -at(d, 2 * k) + 16.0L * at(d, k) - 30.0L * f0 + 16.0L * at(d, -k) - at(d, -2 * k);
      lap += s / (12.0L * k * k);
    }
    return lap;
  };
  for (std::size_t d = 0; d < p.size(); ++d) {
    const long double g1 = (at(d, h) - at(d, -h)) / (2.0L * h);
    const long double g2 = (at(d, 2 * h) - at(d, -2 * h)) / (4.0L * h);
    out.grad.push_back(static_cast<double>(g1));
    out.grad_err.push_back(static_cast<double>(std::abs(g2 - g1)));
  }
  const long double l1 = lap_at(h_lap);
  out.lap = static_cast<double>(l1);
  out.lap_err = static_cast<double>(std::abs(lap_at(2 * h_lap) - l1));
  return out;
}

inline std::vector<double> fd_gradient(const LdFn& f, std::span<const long double> x, long double h = 1e-5L) {
  std::vector<long double> p(x.begin(), x.end());
  std::vector<double> g;
  for (std::size_t d = 0; d < p.size(); ++d) {
    const long double keep = p[d];
    p[d] = keep + h;
    const long double fp = f(p);
    p[d] = keep - h;
    const long double fm = f(p);
    p[d] = keep;
    g.push_back(static_cast<double>((fp - fm) / (2.0L * h)));
  }
  return g;
}

// Relative error with a floor on the denominator, so entries that should be
// ~0 are compared absolutely.
inline double rel_err(double a, double b, double floor = 1e-3) {
  return std::abs(a - b) / std::max(std::abs(b), floor);
}

inline double max_rel_err(std::span<const double> a, std::span<const double> b, double floor = 1e-3) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, rel_err(a[i], b[i], floor));
  }
  return m;
}

// Electrons scattered around the nuclei, roughly where psi^2 lives.
inline std::vector<double> random_config(const oddvmc::Molecule& mol, std::mt19937_64& rng, double sigma = 1.0) {
  std::normal_distribution<double> n(0.0, sigma);
  std::vector<double> r;
  const int ne = mol.n_electrons();
  for (int i = 0; i < ne; ++i) {
    const auto& c = mol.nuclei[static_cast<std::size_t>(i % mol.n_nuclei())].position;
    for (int k = 0; k < 3; ++k) {
      r.push_back(c[static_cast<std::size_t>(k)] + n(rng));
    }
  }
  return r;
}

inline std::vector<long double> widen(std::span<const double> v) { return {v.begin(), v.end()}; }

// Coordinates with electrons a and b exchanged.
inline std::vector<double> swap_electrons(std::span<const double> r, int a, int b) {
  std::vector<double> out(r.begin(), r.end());
  for (int k = 0; k < 3; ++k) {
    std::swap(out[static_cast<std::size_t>(3 * a + k)], out[static_cast<std::size_t>(3 * b + k)]);
  }
  return out;
}

// Random parameters with the layout of `a`, perturbed away from the
// symmetric initial values so no derivative vanishes by accident.
inline std::vector<double> jittered_params(const oddvmc::Ansatz& a, std::uint64_t seed, double scale = 0.05) {
  auto p = a.init_params(seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> n(0.0, scale);
  for (auto& v : p) {
    v += n(rng);
  }
  return p;
}

// Walkers equilibrated under psi^2 for the given parameters: the
// configurations an optimisation step actually evaluates.
inline oddvmc::WalkerBatch psi2_batch(const oddvmc::Ansatz& a, const std::vector<double>& p, int walkers,
                                      std::uint64_t seed, int sweeps = 300) {
  auto batch = oddvmc::init_walkers(a.molecule(), walkers, seed);
  std::vector<float> unused;
  const auto psi = oddvmc::make_psi(a, p, false, unused);
  oddvmc::refresh(batch, psi);
  oddvmc::equilibrate(batch, psi, sweeps, 10, 1);
  return batch;
}

// alpha placed the way training places it: from the log-determinants of
// psi^2 samples
inline void set_data_alpha(const oddvmc::Ansatz& a, std::vector<double>& p, std::uint64_t seed) {
  const auto batch = psi2_batch(a, p, 64, seed, 100);
  a.set_alpha(p, oddvmc::alpha_init(oddvmc::max_logdets(a, p, batch, 1), 0.0));
}

} // namespace testsupport
