// Acceptance run: one PASS/FAIL line per criterion. Oracles live here, not in
// the library. Usage: acceptance [criterion numbers...] [--matrix-out DIR]
// [--matrix-config FILE] [--report FILE]; no numbers runs everything except
// the matrix (10). --report appends the verdict lines to FILE.

#include "oddvmc/experiment.hpp"
#include "oddvmc/theory.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

using namespace oddvmc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const std::vector<ReadoutKind> kAllReadouts{ReadoutKind::linear, ReadoutKind::implicit, ReadoutKind::explicit_odd};
const std::vector<JastrowMode> kAllModes{JastrowMode::none, JastrowMode::standalone, JastrowMode::symmetric_odd};
const std::vector<double> kAlphaGrid{-2.0, 0.0, 2.0};

AnsatzSpec lih_spec(ReadoutKind r, JastrowMode m, Domain d) {
  AnsatzSpec s;
  s.determinants = 4;
  s.readout = r;
  s.jastrow = m;
  s.domain = d;
  s.odd_hidden = {16, 16};
  s.jastrow_hidden = {16, 16};
  return s;
}

AnsatzSpec hydrogenic(double zeta) {
  AnsatzSpec s;
  s.orbital_kind = OrbitalKind::exponential;
  s.primitives = 1;
  s.exponent_min = zeta;
  s.exponent_max = zeta;
  return s;
}

std::string cell(ReadoutKind r, JastrowMode m, Domain d) { return to_string(r) + "/" + to_string(m) + "/" + to_string(d); }

// linlog cells: alpha placed from psi^2 data, then shifted by the offset
std::vector<double> cell_params(const Ansatz& a, std::uint64_t seed, double offset) {
  auto p = testsupport::jittered_params(a, seed, 0.1);
  if (a.spec().domain == Domain::linlog) {
    testsupport::set_data_alpha(a, p, seed);
    a.set_alpha(p, a.alpha(p) + offset);
  }
  return p;
}

// ---- 1 -------------------------------------------------------------------

Outcome zero_variance() {
  const Ansatz a(molecule_preset("H"), hydrogenic(1.0));
  const auto p = a.init_params(0);
  const auto configs = psi2_configurations(a, p, 10000, 1);
  double max_dev = 0.0, sum = 0.0, sum2 = 0.0;
  for (const auto& r : configs) {
    const double e = local_energy(a, r, p).total;
    max_dev = std::max(max_dev, std::abs(e + 0.5));
    sum += e;
  }
  const double mean = sum / static_cast<double>(configs.size());
  for (const auto& r : configs) {
    const double d = local_energy(a, r, p).total - mean;
    sum2 += d * d;
  }
  const double var = sum2 / static_cast<double>(configs.size());
  return {configs.size() == 10000 && max_dev < 1e-10 && var < 1e-20,
          std::to_string(configs.size()) + " configs, max|E_L+0.5| = " + fmt("%.2e", max_dev) +
              ", Var = " + fmt("%.2e", var)};
}

// ---- 2 -------------------------------------------------------------------

Outcome helium() {
  TrainConfig c;
  c.molecule = molecule_preset("He");
  c.ansatz = hydrogenic(1.0);
  c.batch = 512;
  c.burn_in = 200;
  c.steps = 2000;
  c.eval_steps = 5000;
  c.adam.multiplier = 0.1;
  c.seed = 1;
  const Ansatz a(c.molecule, c.ansatz);
  const auto res = train(c);
  const double zeta = std::exp(res.params[a.layout().at("orbital.log_exponent").offset]);
  const double zeta_exact = 27.0 / 16.0;
  const double e_exact = -729.0 / 256.0;
  // the analytic energy at the learned zeta, for orientation
  const double e_at = zeta * zeta - 27.0 * zeta / 8.0;
  const bool pass = !res.diverged && std::abs(zeta - zeta_exact) < 0.02 && std::abs(res.energy - e_exact) < 2e-3;
  return {pass, "zeta = " + fmt("%.4f", zeta) + " (|dz| = " + fmt("%.4f", std::abs(zeta - zeta_exact)) +
                    "), E = " + fmt("%.5f", res.energy) + " +- " + fmt("%.5f", res.stderr_) +
                    " (|dE| = " + fmt("%.2f", 1e3 * std::abs(res.energy - e_exact)) +
                    " mHa), E(zeta) analytic " + fmt("%.5f", e_at)};
}

// ---- 3 -------------------------------------------------------------------

Outcome variational_bound() {
  struct Case {
    std::string name;
    AnsatzSpec spec;
    std::uint64_t seed;
  };
  std::vector<Case> cases;
  for (std::uint64_t s : {1u, 2u, 3u}) {
    cases.push_back({"exact-exp", hydrogenic(1.0), s});
  }
  for (int prim : {1, 2, 3}) {
    for (std::uint64_t s : {1u, 2u}) {
      AnsatzSpec g;
      g.primitives = prim;
      cases.push_back({"gauss" + std::to_string(prim), g, s});
    }
  }
  for (std::uint64_t s : {1u, 2u}) {
    cases.push_back({"exp-start-1.4", hydrogenic(1.4), s});
  }
  int runs = 0, violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  std::string worst_name;
  for (const auto& k : cases) {
    TrainConfig c;
    c.molecule = molecule_preset("H");
    c.ansatz = k.spec;
    c.batch = 256;
    c.burn_in = 100;
    c.steps = 400;
    c.eval_steps = 1000; // frozen parameters, blocked error bars
    c.seed = k.seed;
    const auto res = train(c);
    if (res.diverged) {
      continue;
    }
    ++runs;
    // exact-orbital runs sit at -0.5 up to E_L rounding; same allowance as
    // the zero-variance check
    const double margin = res.energy - 3.0 * res.stderr_ + 0.5;
    std::printf("  %-14s seed %llu  E = %.6f +- %.6f\n", k.name.c_str(), static_cast<unsigned long long>(k.seed),
                res.energy, res.stderr_);
    if (margin < -1e-10) {
      ++violations;
    }
    if (margin < worst) {
      worst = margin;
      worst_name = k.name + "/seed" + std::to_string(k.seed);
    }
  }
  return {runs == static_cast<int>(cases.size()) && violations == 0,
          std::to_string(runs) + " converged hydrogen runs, " + std::to_string(violations) +
              " below -0.5; smallest E - 3 SE + 0.5 = " + fmt("%.3e", worst) + " (" + worst_name + ")"};
}

// ---- 4 -------------------------------------------------------------------

Outcome odd_reconstruction() {
  SuiteOptions opt;
  opt.trials = 1000;
  const auto reps = theorem1_suite(opt);
  int failed = 0;
  double worst = 0.0;
  for (const auto& r : reps) {
    failed += r.pass && r.trials == 1000 && r.max_abs_error < 1e-12 ? 0 : 1;
    worst = std::max(worst, r.max_abs_error);
  }
  // independent replay: g(x) = f(x) [x.v > 0], compared on the readouts
  int cells = 0, replay_fail = 0;
  double replay_worst = 0.0;
  for (auto readout : {ReadoutKind::implicit, ReadoutKind::explicit_odd}) {
    for (auto domain : {Domain::linear, Domain::linlog}) {
      for (double alpha : kAlphaGrid) {
        if (domain == Domain::linear && alpha != 0.0) {
          continue;
        }
        auto spec = lih_spec(readout, JastrowMode::symmetric_odd, domain);
        const Ansatz a(molecule_preset("LiH"), spec);
        auto p = testsupport::jittered_params(a, 3, 0.1);
        a.set_alpha(p, alpha);
        std::mt19937_64 rng(41);
        const auto heads = a.jastrow_heads(testsupport::random_config(a.molecule(), rng), p);
        std::normal_distribution<double> n(0.0, 1.0);
        std::vector<double> v(4), x(4), mx(4);
        for (auto& e : v) {
          e = n(rng);
        }
        ++cells;
        for (int t = 0; t < 1000; ++t) {
          double dot = 0.0;
          for (int k = 0; k < 4; ++k) {
            x[static_cast<std::size_t>(k)] = n(rng) * std::exp(2.0 * n(rng));
            mx[static_cast<std::size_t>(k)] = -x[static_cast<std::size_t>(k)];
            dot += x[static_cast<std::size_t>(k)] * v[static_cast<std::size_t>(k)];
          }
          const double fx = a.readout_value(x, heads, p);
          const double fmx = a.readout_value(mx, heads, p);
          const double gx = dot > 0 ? fx : 0.0;
          const double gmx = -dot > 0 ? fmx : 0.0;
          const double err = std::abs(gx - gmx - fx);
          replay_worst = std::max(replay_worst, err);
          replay_fail += err < 1e-12 ? 0 : 1;
        }
      }
    }
  }
  return {failed == 0 && !reps.empty() && replay_fail == 0,
          std::to_string(reps.size()) + " suite reports (max err " + fmt("%.1e", worst) + "), " +
              std::to_string(cells) + " replayed cells x 1000 (max err " + fmt("%.1e", replay_worst) + ", " +
              std::to_string(replay_fail) + " failures)"};
}

// ---- 5 -------------------------------------------------------------------

Outcome projection_identity() {
  SuiteOptions opt;
  opt.trials = 1000;
  const auto reps = theorem2_suite(opt);
  int failed = 0;
  double worst_excl = 0.0;
  for (const auto& r : reps) {
    failed += r.pass && r.excluded_fraction() < 0.01 ? 0 : 1;
    worst_excl = std::max(worst_excl, r.excluded_fraction());
  }
  // independent Jhat: psi / sum_k v_k det_k from the determinant values
  int tested = 0, excluded = 0, bad = 0;
  double worst_sym = 0.0, worst_rec = 0.0;
  for (auto readout : kAllReadouts) {
    for (auto mode : {JastrowMode::none, JastrowMode::symmetric_odd}) {
      const Ansatz a(molecule_preset("LiH"), lih_spec(readout, mode, Domain::linear));
      const auto p = testsupport::jittered_params(a, 7, 0.1);
      const auto configs = psi2_configurations(a, p, 170, 7);
      const auto pairs = same_spin_pairs(a.molecule());
      const std::vector<double> v(4, 1.0);
      const auto jhat = [&](std::span<const double> r, double& proj) {
        const auto dets = a.determinants(r, p);
        long double s = 0.0L;
        for (std::size_t k = 0; k < dets.size(); ++k) {
          s += v[k] * dets[k].sign * std::exp(static_cast<long double>(dets[k].logabs));
        }
        proj = static_cast<double>(s);
        const auto psi = a.log_psi(r, p);
        return psi.sign * std::exp(static_cast<long double>(psi.logabs)) / s;
      };
      const auto library = construct_jhat(a, p, v);
      for (std::size_t i = 0; i < configs.size(); ++i) {
        double proj = 0.0;
        const long double j = jhat(configs[i], proj);
        if (std::abs(proj) < kJhatGuard) {
          ++excluded;
          continue;
        }
        ++tested;
        const auto lib = library(configs[i]);
        if (lib) {
          const long double lj = lib->sign * std::exp(static_cast<long double>(lib->logabs));
          worst_rec = std::max(worst_rec, static_cast<double>(std::abs(lj - j) / std::abs(j)));
        } else {
          ++bad;
        }
        const auto& pr = pairs[i % pairs.size()];
        double proj2 = 0.0;
        const long double js = jhat(testsupport::swap_electrons(configs[i], pr.first, pr.second), proj2);
        const double rel = static_cast<double>(std::abs(js - j) / std::abs(j));
        worst_sym = std::max(worst_sym, rel);
        bad += rel < 1e-8 ? 0 : 1;
      }
    }
  }
  bad += worst_rec < 1e-10 ? 0 : 1;
  const double excl = static_cast<double>(excluded) / std::max(1, tested + excluded);
  return {failed == 0 && !reps.empty() && bad == 0 && excl < 0.01,
          std::to_string(reps.size()) + " suite reports (max excluded " + fmt("%.3f", worst_excl) +
              "); independent Jhat on " + std::to_string(tested) + " configs: library agreement " +
              fmt("%.1e", worst_rec) + ", swap invariance " + fmt("%.1e", worst_sym) + ", excluded " +
              fmt("%.3f", excl)};
}

// ---- 6 -------------------------------------------------------------------

Outcome antisymmetry_and_oddness() {
  int cells = 0, failures = 0;
  double worst = 0.0;
  for (auto readout : kAllReadouts) {
    for (auto mode : kAllModes) {
      for (auto domain : {Domain::linear, Domain::linlog}) {
        for (double off : kAlphaGrid) {
          if (domain == Domain::linear && off != 0.0) {
            continue;
          }
          const Ansatz a(molecule_preset("LiH"), lih_spec(readout, mode, domain));
          const auto p = cell_params(a, 11, off);
          const auto configs = psi2_configurations(a, p, 200, 11);
          const auto pairs = same_spin_pairs(a.molecule());
          std::mt19937_64 rng(5);
          ++cells;
          for (int t = 0; t < 1000; ++t) {
            const auto& r = configs[static_cast<std::size_t>(t) % configs.size()];
            const auto& pr = pairs[rng() % pairs.size()];
            const auto x = a.log_psi(r, p);
            const auto y = a.log_psi(testsupport::swap_electrons(r, pr.first, pr.second), p);
            const double d = std::abs(y.logabs - x.logabs);
            worst = std::max(worst, d);
            if (y.sign != -x.sign || !(d < 1e-10)) {
              ++failures;
            }
          }
          // readout oddness with the heads of one configuration
          if (readout != ReadoutKind::linear) {
            const auto heads = a.jastrow_heads(configs[0], p);
            std::normal_distribution<double> n(0.0, 1.0);
            for (int t = 0; t < 1000; ++t) {
              std::vector<double> xv(4), mv(4);
              for (int k = 0; k < 4; ++k) {
                xv[static_cast<std::size_t>(k)] = n(rng);
                mv[static_cast<std::size_t>(k)] = -xv[static_cast<std::size_t>(k)];
              }
              const double f = a.readout_value(xv, heads, p);
              const double g = a.readout_value(mv, heads, p);
              if (!(std::abs(f + g) <= 1e-10 * std::max(std::abs(f), 1e-300))) {
                ++failures;
              }
            }
          }
        }
      }
    }
  }
  SuiteOptions opt;
  opt.trials = 1000;
  int suite_fail = 0;
  const auto reps = definitions_suite(opt);
  for (const auto& r : reps) {
    suite_fail += r.pass ? 0 : 1;
  }
  return {failures == 0 && suite_fail == 0,
          std::to_string(cells) + " cells x 1000 transpositions (max |dlog| " + fmt("%.1e", worst) + ") + oddness, " +
              std::to_string(failures) + " failures; definitions suite " +
              std::to_string(reps.size() - static_cast<std::size_t>(suite_fail)) + "/" + std::to_string(reps.size())};
}

// ---- 7 -------------------------------------------------------------------

// central difference in the parameters at h and 2h; err = their distance
struct ParamFd {
  std::vector<double> grad, err;
};

ParamFd param_fd(const Ansatz& a, std::span<const double> r, const std::vector<double>& p) {
  const auto rl = testsupport::widen(r);
  auto q = testsupport::widen(p);
  const long double h = 1e-5L;
  const auto f = [&] { return a.log_psi(rl, q).logabs; };
  ParamFd out;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const long double keep = q[i];
    const auto at = [&](long double s) {
      q[i] = keep + s;
      const long double v = f();
      q[i] = keep;
      return v;
    };
    const long double g1 = (at(h) - at(-h)) / (2 * h);
    const long double g2 = (at(2 * h) - at(-2 * h)) / (4 * h);
    out.grad.push_back(static_cast<double>(g1));
    out.err.push_back(static_cast<double>(std::abs(g2 - g1)));
  }
  return out;
}

Outcome derivatives() {
  const auto mol = molecule_preset("LiH");
  int evals = 0, jet_trusted = 0, adj_trusted = 0, jet_fail = 0, adj_fail = 0;
  double jet_worst = 0.0, adj_worst = 0.0;
  std::vector<std::tuple<ReadoutKind, JastrowMode, Domain>> combos;
  for (auto r : kAllReadouts) {
    for (auto m : kAllModes) {
      for (auto d : {Domain::linear, Domain::linlog}) {
        combos.emplace_back(r, m, d);
      }
    }
  }
  // 100 evaluations spread over the 18 combinations
  for (std::size_t c = 0; c < combos.size(); ++c) {
    const auto [readout, mode, domain] = combos[c];
    const int here = static_cast<int>(100 * (c + 1) / combos.size() - 100 * c / combos.size());
    const Ansatz a(mol, lih_spec(readout, mode, domain));
    const auto p = cell_params(a, 100 + c, 0.0);
    const auto pl = testsupport::widen(p);
    const auto batch = testsupport::psi2_batch(a, p, here, 200 + c, 200);
    for (int w = 0; w < here; ++w) {
      ++evals;
      const auto r = batch.walker(w);
      const auto jet = a.log_psi_jet(r, p);
      const auto f = [&](std::span<const long double> x) { return a.log_psi(x, pl).logabs; };
      const auto fd = testsupport::fd_grad_lap(f, r);
      if (fd.trustworthy()) {
        ++jet_trusted;
        const double e = std::max(testsupport::max_rel_err(jet.logabs.gradient(), fd.grad),
                                  testsupport::rel_err(jet.logabs.lap, fd.lap));
        jet_worst = std::max(jet_worst, e);
        jet_fail += e < 1e-6 ? 0 : 1;
      }
      const auto g = a.grad_log_psi(r, p);
      const auto pf = param_fd(a, r, p);
      bool trusted = true;
      for (std::size_t i = 0; i < pf.grad.size(); ++i) {
        trusted = trusted && pf.err[i] < 1e-6 * std::max(std::abs(pf.grad[i]), 1e-3);
      }
      if (trusted) {
        ++adj_trusted;
        const double e = testsupport::max_rel_err(g, pf.grad);
        adj_worst = std::max(adj_worst, e);
        adj_fail += e < 1e-5 ? 0 : 1;
      }
    }
  }
  // the oracle must vouch for nearly all points or the check says little
  const bool enough = jet_trusted >= 90 && adj_trusted >= 90;
  return {evals == 100 && enough && jet_fail == 0 && adj_fail == 0,
          std::to_string(evals) + " LiH evaluations; jet vs FD on " + std::to_string(jet_trusted) +
              " trusted points, max rel " + fmt("%.1e", jet_worst) + "; adjoint vs FD on " +
              std::to_string(adj_trusted) + ", max rel " + fmt("%.1e", adj_worst)};
}

// ---- 8 -------------------------------------------------------------------

Outcome cusps() {
  struct Case {
    std::string name;
    std::string mol;
    AnsatzSpec spec;
    double expect;
  };
  // Jastrow-free: the trunk sees |r_i - R_m|, which carries a cusp of its own
  AnsatzSpec lih = lih_spec(ReadoutKind::explicit_odd, JastrowMode::none, Domain::linlog);
  AnsatzSpec lih_imp = lih_spec(ReadoutKind::implicit, JastrowMode::none, Domain::linear);
  AnsatzSpec lin = lih_spec(ReadoutKind::linear, JastrowMode::none, Domain::linear);
  std::vector<Case> cases{{"H gaussian", "H", AnsatzSpec{}, 0.0},
                          {"He gaussian", "He", AnsatzSpec{}, 0.0},
                          {"H2 gaussian", "H2", AnsatzSpec{}, 0.0},
                          {"LiH gaussian linear K=4", "LiH", lin, 0.0},
                          {"LiH gaussian explicit linlog K=4", "LiH", lih, 0.0},
                          {"LiH gaussian implicit K=4", "LiH", lih_imp, 0.0},
                          {"H exponential", "H", hydrogenic(1.0), 1.0}};
  const std::vector<double> radius{1e-5};
  int checked = 0, failed = 0;
  std::ostringstream worst;
  double gauss_worst = 0.0, exp_worst = 0.0;
  for (const auto& k : cases) {
    const Ansatz a(molecule_preset(k.mol), k.spec);
    const auto p = k.expect == 0.0 ? cell_params(a, 13, 0.0) : a.init_params(0);
    const auto bg = psi2_configurations(a, p, 1, 13)[0];
    for (int m = 0; m < a.molecule().n_nuclei(); ++m) {
      const auto scan = cusp_scan(a, p, m, {0.48, -0.6, 0.64}, radius, bg);
      const double v = scan[0].averaged;
      const double dev = std::abs(v - k.expect);
      ++checked;
      if (scan[0].flagged || !(dev < 0.01)) {
        ++failed;
        worst << " " << k.name << "@" << m << "=" << v;
      }
      (k.expect == 0.0 ? gauss_worst : exp_worst) = std::max(k.expect == 0.0 ? gauss_worst : exp_worst, dev);
    }
  }
  // for contrast: the symmetric-odd Jastrow is free to build a cusp
  const Ansatz jas(molecule_preset("LiH"), lih_spec(ReadoutKind::explicit_odd, JastrowMode::symmetric_odd, Domain::linlog));
  const auto pj = cell_params(jas, 13, 0.0);
  const double with_jastrow =
      cusp_scan(jas, pj, 0, {0.48, -0.6, 0.64}, radius, psi2_configurations(jas, pj, 1, 13)[0])[0].averaged;
  return {failed == 0, std::to_string(checked) + " nucleus scans at 1e-5 Bohr: gaussian max |v| " +
                           fmt("%.1e", gauss_worst) + ", exponential |v - 1| " + fmt("%.1e", exp_worst) +
                           worst.str() + "; with e-n Jastrow (not asserted) Li " + fmt("%.3f", with_jastrow)};
}

// ---- 9 -------------------------------------------------------------------

struct Shape {
  double log_orders = 0.0;
  double spike = 0.0;     // mass in the lowest 1% of the linear range
  double linlog_iqr = 0.0; // IQR / support in the linlog domain
};

Shape histogram_shape(std::uint64_t seed, double offset, ReadoutKind readout) {
  RunConfig c;
  c.train.molecule = molecule_preset("LiH");
  c.train.ansatz = lih_spec(readout, JastrowMode::none, Domain::linlog);
  c.train.batch = 2048;
  c.train.burn_in = 300;
  c.train.seed = seed;
  c.train.steps = 0;
  const auto eq = train(c.train);
  const Ansatz a(c.train.molecule, c.train.ansatz);
  std::vector<double> logs, best;
  for (int w = 0; w < eq.walkers.walkers; ++w) {
    double b = -std::numeric_limits<double>::infinity();
    for (const auto& d : a.determinants(eq.walkers.walker(w), eq.params)) {
      if (!d.is_zero()) {
        logs.push_back(d.logabs);
        b = std::max(b, d.logabs);
      }
    }
    best.push_back(b);
  }
  std::sort(best.begin(), best.end());
  // alpha as initialised for a linlog run: offset - median max_k log|det|
  const double alpha = offset - best[best.size() / 2];
  Shape s;
  const auto [lo, hi] = std::minmax_element(logs.begin(), logs.end());
  s.log_orders = (*hi - *lo) / std::log(10.0);
  const double vmin = std::exp(*lo), vmax = std::exp(*hi);
  const double cut = vmin + 0.01 * (vmax - vmin);
  s.spike = static_cast<double>(std::count_if(logs.begin(), logs.end(), [&](double l) { return std::exp(l) <= cut; })) /
            static_cast<double>(logs.size());
  std::vector<double> ll;
  for (double l : logs) {
    // softplus(log|x| + alpha), written out independently of the library
    const double z = l + alpha;
    ll.push_back(z > 30 ? z : std::log1p(std::exp(z)));
  }
  std::sort(ll.begin(), ll.end());
  s.linlog_iqr = (ll[ll.size() * 3 / 4] - ll[ll.size() / 4]) / (ll.back() - ll.front());
  return s;
}

Outcome histograms() {
  double orders = 1e300, spike = 1.0, iqr = 1.0;
  std::ostringstream det;
  for (auto readout : {ReadoutKind::linear, ReadoutKind::explicit_odd}) {
    for (std::uint64_t seed : {0u, 1u}) {
      const auto s = histogram_shape(seed, 0.0, readout);
      orders = std::min(orders, s.log_orders);
      spike = std::min(spike, s.spike);
      iqr = std::min(iqr, s.linlog_iqr);
    }
  }
  det << "LiH K=4 determinants at init, 4 runs (worst): log support " << fmt("%.1f", orders)
      << " orders (>= 10), linear spike " << fmt("%.3f", spike) << " (> 0.9), linlog IQR/support "
      << fmt("%.3f", iqr) << " (>= 0.1); alpha sweep IQR:";
  for (double off : {-4.0, -2.0, 0.0, 2.0, 4.0}) {
    det << " " << fmt("%+.0f", off) << "->" << fmt("%.3f", histogram_shape(0, off, ReadoutKind::linear).linlog_iqr);
  }
  return {orders >= 10.0 && spike > 0.9 && iqr >= 0.1, det.str()};
}

// ---- 10 ------------------------------------------------------------------

Outcome matrix(const std::string& config, const std::string& out) {
  const auto base = load_run_config(config);
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_matrix(base, out, 1);
  const double hours = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 3600.0;
  // non-relativistic LiH ground state at this bond length, for a sanity count only
  const double e_exact = -8.0705;
  int flagged = 0, inconsistent = 0, below_exact = 0;
  for (const auto& r : rows) {
    std::printf("  %-40s %s\n", r.cell_id.c_str(),
                r.nan_flag ? ("NaN  " + r.diagnostic).c_str()
                           : (fmt("%.5f", r.energy) + " +- " + fmt("%.5f", r.stderr_)).c_str());
    flagged += r.nan_flag ? 1 : 0;
    inconsistent += r.nan_flag == std::isfinite(r.energy) ? 1 : 0;
    below_exact += !r.nan_flag && r.energy + 3.0 * r.stderr_ < e_exact ? 1 : 0;
  }
  const auto disk = read_summary_csv(out + "/summary.csv");
  const bool pass = rows.size() == 54 && disk.size() == 54 && inconsistent == 0 && hours <= 4.0;
  return {pass, std::to_string(rows.size()) + " rows (" + std::to_string(flagged) + " NaN-flagged, " +
                    std::to_string(below_exact) + " unflagged below the exact energy) in " + fmt("%.2f", hours) +
                    " h; summary " + out + "/summary.csv"};
}

// ---- 11 ------------------------------------------------------------------

Outcome sampler_statistics() {
  // psi = exp(-x^2/2): psi^2 is N(0, 1/2)
  const LogPsiFn psi = [](std::span<const double> x) { return SignedLog<double>{1, -0.5 * x[0] * x[0]}; };
  auto chain = make_batch(1, 1, 3, [](std::mt19937_64&, std::span<double> r) { r[0] = 0.0; });
  chain.step_sigma = 1.0;
  refresh(chain, psi);
  mcmc_sweep(chain, psi, 1000);
  std::vector<double> xs;
  for (int i = 0; i < 100000; ++i) {
    mcmc_sweep(chain, psi, 20);
    xs.push_back(chain.positions[0]);
  }
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-xs[i]); // N(0, 1/2)
    d = std::max({d, (static_cast<double>(i) + 1) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  const double crit = 1.628 / std::sqrt(n);

  // bitwise determinism over thread counts
  TrainConfig c;
  c.molecule = molecule_preset("LiH");
  c.ansatz = lih_spec(ReadoutKind::explicit_odd, JastrowMode::symmetric_odd, Domain::linlog);
  c.ansatz.odd_hidden = {8};
  c.ansatz.jastrow_hidden = {8};
  c.batch = 64;
  c.burn_in = 30;
  c.steps = 25;
  c.seed = 9;
  std::vector<TrainResult> runs;
  for (int threads : {1, 2, 4}) {
    c.threads = threads;
    runs.push_back(train(c));
  }
  bool same = true;
  for (std::size_t k = 1; k < runs.size(); ++k) {
    same = same && runs[k].params == runs[0].params && runs[k].records.size() == runs[0].records.size();
    for (std::size_t i = 0; same && i < runs[0].records.size(); ++i) {
      const auto& x = runs[0].records[i];
      const auto& y = runs[k].records[i];
      same = std::memcmp(&x.energy, &y.energy, sizeof(double)) == 0 &&
             std::memcmp(&x.stderr_, &y.stderr_, sizeof(double)) == 0 && x.accept_rate == y.accept_rate &&
             x.alpha == y.alpha;
    }
  }
  return {d < crit && same, "KS D = " + fmt("%.5f", d) + " vs critical " + fmt("%.5f", crit) +
                                " (1e5 samples, level 0.01); threads 1/2/4 " + (same ? "bitwise identical" : "DIFFER")};
}

struct Criterion {
  int id;
  std::string name;
  double limit_s; // runtime bound, 0 for none
  std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  std::string matrix_out = "acceptance_matrix";
  std::string matrix_config = "configs/lih_matrix.json";
  std::string report;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--matrix-out" && i + 1 < argc) {
      matrix_out = argv[++i];
    } else if (a == "--matrix-config" && i + 1 < argc) {
      matrix_config = argv[++i];
    } else if (a == "--report" && i + 1 < argc) {
      report = argv[++i];
    } else {
      wanted.push_back(std::stoi(a));
    }
  }
  if (wanted.empty()) {
    wanted = {1, 2, 3, 4, 5, 6, 7, 8, 9, 11};
  }
  const std::vector<Criterion> all{
      {1, "zero-variance hydrogen", 10, zero_variance},
      {2, "helium analytic oracle", 300, helium},
      {3, "variational bound", 0, variational_bound},
      {4, "odd readout reconstruction", 60, odd_reconstruction},
      {5, "determinant projection", 120, projection_identity},
      {6, "antisymmetry and oddness", 0, antisymmetry_and_oddness},
      {7, "derivative correctness", 120, derivatives},
      {8, "cusp diagnostic", 0, cusps},
      {9, "amplitude histograms", 0, histograms},
      {10, "LiH matrix harness", 0, [&] { return matrix(matrix_config, matrix_out); }},
      {11, "sampler statistics", 0, sampler_statistics},
  };
  int failed = 0;
  for (const auto& c : all) {
    if (std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) {
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit_s <= 0 || s < c.limit_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    char head[96];
    std::snprintf(head, sizeof head, "criterion %2d  %s  %-28s | ", c.id, pass ? "PASS" : "FAIL", c.name.c_str());
    const std::string line = head + o.detail + " | " + fmt("%.1f s", s) + (in_time ? "" : fmt(" (limit %.0f s)", c.limit_s));
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    if (!report.empty()) {
      std::ofstream(report, std::ios::app) << line << "\n";
    }
  }
  return failed == 0 ? 0 : 1;
}
