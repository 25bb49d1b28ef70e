#include "oddvmc/theory.hpp"

#include "oddvmc/errors.hpp"
#include "oddvmc/hamiltonian.hpp"
#include "oddvmc/parallel.hpp"
#include "oddvmc/trainer.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace oddvmc {

std::string CheckReport::to_json() const {
  nlohmann::json j{{"name", name},
                   {"trials", trials},
                   {"excluded", excluded},
                   {"max_abs_error", max_abs_error},
                   {"max_rel_error", max_rel_error},
                   {"tolerance", tolerance},
                   {"failures", failures},
                   {"pass", pass}};
  if (!counterexample.empty()) {
    j["counterexample"] = counterexample;
  }
  return j.dump();
}

namespace {

std::string format_vec(std::span<const double> x, std::size_t max = 6) {
  std::ostringstream s;
  s.precision(6);
  s << '[';
  for (std::size_t i = 0; i < std::min(max, x.size()); ++i) {
    s << (i ? ", " : "") << x[i];
  }
  if (x.size() > max) {
    s << ", ...";
  }
  s << ']';
  return s.str();
}

void record(CheckReport& rep, double abs_err, double rel_err, bool ok, const std::string& what) {
  ++rep.trials;
  if (std::isfinite(abs_err)) {
    rep.max_abs_error = std::max(rep.max_abs_error, abs_err);
  } else {
    rep.max_abs_error = std::numeric_limits<double>::infinity();
  }
  if (std::isfinite(rel_err)) {
    rep.max_rel_error = std::max(rep.max_rel_error, rel_err);
  } else {
    rep.max_rel_error = std::numeric_limits<double>::infinity();
  }
  if (!ok) {
    ++rep.failures;
    if (rep.counterexample.empty()) {
      rep.counterexample = what;
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += a[i] * b[i];
  }
  return s;
}

std::vector<double> negated(std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  for (auto& v : y) {
    v = -v;
  }
  return y;
}

std::vector<double> swapped(std::span<const double> x, std::pair<int, int> p) {
  std::vector<double> y(x.begin(), x.end());
  for (int k = 0; k < 3; ++k) {
    std::swap(y[static_cast<std::size_t>(3 * p.first + k)], y[static_cast<std::size_t>(3 * p.second + k)]);
  }
  return y;
}

// The transformed input and the sign s with f(Px) = s f(x).
std::pair<std::vector<double>, int> transform(std::span<const double> x, Symmetry sym,
                                              std::span<const std::pair<int, int>> pairs, std::mt19937_64& rng,
                                              std::string& what) {
  if (sym == Symmetry::odd || sym == Symmetry::even) {
    return {negated(x), sym == Symmetry::odd ? -1 : 1};
  }
  if (pairs.empty()) {
    throw std::invalid_argument("permutation symmetry needs at least one pair");
  }
  std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
  const auto p = pairs[pick(rng)];
  what = " swap (" + std::to_string(p.first) + "," + std::to_string(p.second) + ")";
  return {swapped(x, p), sym == Symmetry::antisymmetric ? -1 : 1};
}

} // namespace

VectorFn construct_g(VectorFn f, std::vector<double> v) {
  if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) {
    throw std::invalid_argument("construct_g needs a nonzero v");
  }
  return [f = std::move(f), v = std::move(v)](std::span<const double> x) {
    if (x.size() != v.size()) {
      throw ShapeError("g: input and v differ in length");
    }
    return dot(x, v) > 0.0 ? f(x) : 0.0;
  };
}

CheckReport check_theorem1(const std::string& name, const VectorFn& f, const std::vector<double>& v,
                           const InputGen& gen, int n_trials, std::uint64_t seed, double tol) {
  CheckReport rep;
  rep.name = name;
  rep.tolerance = tol;
  const auto odd = check_definitions(name + "/odd", f, Symmetry::odd, gen, std::max(1, n_trials / 10), seed);
  if (!odd.pass) {
    rep.failures = 1;
    rep.counterexample = "f is not odd: " + odd.counterexample;
    rep.pass = false;
    return rep;
  }
  const auto g = construct_g(f, v);
  std::mt19937_64 rng(seed);
  while (rep.trials < n_trials) {
    const auto x = gen(rng);
    if (dot(x, v) == 0.0) {
      ++rep.excluded; // the measure-zero hyperplane
      continue;
    }
    const double fx = f(x);
    const double err = std::abs(g(x) - g(negated(x)) - fx);
    record(rep, err, err / std::max(std::abs(fx), 1e-300), err < tol,
           "x=" + format_vec(x) + " f=" + std::to_string(fx) + " err=" + std::to_string(err));
  }
  rep.finish();
  return rep;
}

// ---- Jhat -------------------------------------------------------------------

Jhat::Jhat(const Ansatz& ansatz, std::vector<double> params, std::vector<double> v)
    : ansatz_(&ansatz), params_(std::move(params)), v_(std::move(v)) {
  if (static_cast<int>(v_.size()) != ansatz.spec().determinants) {
    throw ShapeError("v must have one entry per determinant");
  }
  if (std::all_of(v_.begin(), v_.end(), [](double x) { return x == 0.0; })) {
    throw std::invalid_argument("Jhat needs a nonzero v");
  }
}

SignedLog<double> Jhat::projection(std::span<const double> r) const {
  const auto dets = ansatz_->determinants(r, params_);
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& d : dets) {
    if (!d.is_zero()) {
      top = std::max(top, d.logabs);
    }
  }
  if (!std::isfinite(top)) {
    return signed_log_zero<double>();
  }
  double s = 0.0;
  for (std::size_t k = 0; k < dets.size(); ++k) {
    if (!dets[k].is_zero()) {
      s += v_[k] * dets[k].sign * std::exp(dets[k].logabs - top);
    }
  }
  if (s == 0.0) {
    return signed_log_zero<double>();
  }
  return {s > 0 ? 1 : -1, std::log(std::abs(s)) + top};
}

SignedLog<double> Jhat::readout(std::span<const double> r) const {
  const auto dets = ansatz_->determinants(r, params_);
  return ansatz_->combine(dets, ansatz_->jastrow_heads(r, params_), params_);
}

std::optional<SignedLog<double>> Jhat::operator()(std::span<const double> r) const {
  const auto p = projection(r);
  if (p.is_zero() || p.logabs < std::log(kJhatGuard)) {
    return std::nullopt;
  }
  const auto f = readout(r);
  if (f.is_zero()) {
    return signed_log_zero<double>();
  }
  return SignedLog<double>{f.sign * p.sign, f.logabs - p.logabs};
}

Jhat construct_jhat(const Ansatz& ansatz, std::vector<double> params, std::vector<double> v) {
  return Jhat(ansatz, std::move(params), std::move(v));
}

// ---- definitions ------------------------------------------------------------

std::string to_string(Symmetry s) {
  switch (s) {
  case Symmetry::odd:
    return "odd";
  case Symmetry::even:
    return "even";
  case Symmetry::antisymmetric:
    return "antisymmetric";
  case Symmetry::symmetric:
    return "symmetric";
  }
  return "?";
}

std::vector<std::pair<int, int>> same_spin_pairs(const Molecule& mol) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < mol.n_up; ++i) {
    for (int j = i + 1; j < mol.n_up; ++j) {
      out.emplace_back(i, j);
    }
  }
  for (int i = mol.n_up; i < mol.n_electrons(); ++i) {
    for (int j = i + 1; j < mol.n_electrons(); ++j) {
      out.emplace_back(i, j);
    }
  }
  return out;
}

CheckReport check_definitions(const std::string& name, const SignedFn& f, Symmetry symmetry, const InputGen& gen,
                              int n_trials, std::uint64_t seed, std::span<const std::pair<int, int>> pairs,
                              double tol) {
  CheckReport rep;
  rep.name = name;
  rep.tolerance = tol;
  std::mt19937_64 rng(seed);
  for (int t = 0; t < n_trials; ++t) {
    const auto x = gen(rng);
    std::string what;
    const auto [px, s] = transform(x, symmetry, pairs, rng, what);
    const auto a = f(x);
    const auto b = f(px);
    const int want = a.sign * s;
    double err = 0.0;
    bool ok = b.sign == want;
    if (!a.is_zero() && !b.is_zero()) {
      err = std::abs(b.logabs - a.logabs);
      ok = ok && err < tol;
    }
    std::ostringstream msg;
    msg << "x=" << format_vec(x) << what << ": sign " << a.sign << " -> " << b.sign << " (want " << want
        << "), log " << a.logabs << " -> " << b.logabs;
    record(rep, err, std::abs(std::expm1(err)), ok, msg.str());
  }
  rep.finish();
  return rep;
}

CheckReport check_definitions(const std::string& name, const VectorFn& f, Symmetry symmetry, const InputGen& gen,
                              int n_trials, std::uint64_t seed, std::span<const std::pair<int, int>> pairs,
                              double tol) {
  CheckReport rep;
  rep.name = name;
  rep.tolerance = tol;
  std::mt19937_64 rng(seed);
  for (int t = 0; t < n_trials; ++t) {
    const auto x = gen(rng);
    std::string what;
    const auto [px, s] = transform(x, symmetry, pairs, rng, what);
    const double a = f(x);
    const double b = f(px);
    const double err = std::abs(b - s * a);
    const bool ok = err <= tol * std::max(std::abs(a), std::abs(b));
    std::ostringstream msg;
    msg.precision(10);
    msg << "x=" << format_vec(x) << what << ": f(x)=" << a << " f(Px)=" << b << " expected " << s * a;
    record(rep, err, err / std::max(std::abs(a), 1e-300), ok, msg.str());
  }
  rep.finish();
  return rep;
}

// ---- suites -----------------------------------------------------------------

std::string to_string(CheckScope s) {
  switch (s) {
  case CheckScope::all:
    return "all";
  case CheckScope::theorem1:
    return "theorem1";
  case CheckScope::theorem2:
    return "theorem2";
  case CheckScope::definitions:
    return "definitions";
  case CheckScope::gradients:
    return "gradients";
  case CheckScope::zero_variance:
    return "zero-variance";
  }
  return "?";
}

CheckScope parse_check_scope(const std::string& s) {
  for (auto c : {CheckScope::all, CheckScope::theorem1, CheckScope::theorem2, CheckScope::definitions,
                 CheckScope::gradients, CheckScope::zero_variance}) {
    if (to_string(c) == s) {
      return c;
    }
  }
  throw std::invalid_argument("unknown check scope '" + s + "'");
}

std::vector<double> perturbed_params(const Ansatz& ansatz, std::uint64_t seed, double scale) {
  auto p = ansatz.init_params(seed);
  std::mt19937_64 rng(seed ^ 0xa5a5a5a5deadbeefULL);
  std::normal_distribution<double> n(0.0, scale);
  const auto alpha_at = ansatz.offsets().alpha;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i != alpha_at) {
      p[i] += n(rng);
    }
  }
  return p;
}

std::vector<std::vector<double>> psi2_configurations(const Ansatz& ansatz, const std::vector<double>& params, int n,
                                                     std::uint64_t seed, int threads) {
  // a few walkers thinned along their chains: 200 burn-in sweeps, then one
  // sample every 10 sweeps
  const int walkers = std::clamp(n, 1, 100);
  auto batch = init_walkers(ansatz.molecule(), walkers, seed);
  std::vector<float> unused;
  const auto psi = make_psi(ansatz, params, false, unused);
  refresh(batch, psi, threads);
  equilibrate(batch, psi, 200, 10, threads);
  std::vector<std::vector<double>> out;
  while (static_cast<int>(out.size()) < n) {
    mcmc_sweep(batch, psi, 10, threads);
    for (int w = 0; w < walkers && static_cast<int>(out.size()) < n; ++w) {
      const auto r = batch.walker(w);
      out.emplace_back(r.begin(), r.end());
    }
  }
  return out;
}

namespace {

AnsatzSpec lih_suite_spec(ReadoutKind readout, JastrowMode mode, Domain domain) {
  AnsatzSpec s;
  s.determinants = 4;
  s.readout = readout;
  s.jastrow = mode;
  s.domain = domain;
  s.odd_hidden = {8, 8};
  s.jastrow_hidden = {8};
  return s;
}

std::string cell_name(ReadoutKind r, JastrowMode m, Domain d) {
  return to_string(r) + "/" + to_string(m) + "/" + to_string(d);
}

std::string alpha_name(double a) {
  std::ostringstream s;
  s << a;
  return s.str();
}

// Inputs for the readouts: signed magnitudes log-uniform over 1e-8..1e2,
// the range determinant values cover.
std::vector<double> random_dets(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> mag(-8.0, 2.0);
  std::bernoulli_distribution neg(0.5);
  std::vector<double> x(static_cast<std::size_t>(k));
  for (auto& v : x) {
    v = std::pow(10.0, mag(rng)) * (neg(rng) ? -1.0 : 1.0);
  }
  return x;
}

std::vector<double> make_v(int k, const SuiteOptions& opt) {
  std::vector<double> v(static_cast<std::size_t>(k), 1.0);
  if (opt.random_v) {
    std::mt19937_64 rng(opt.seed ^ 0x76ULL);
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto& x : v) {
      x = n(rng);
    }
  }
  return v;
}

InputGen cycle(std::vector<std::vector<double>> configs) {
  auto shared = std::make_shared<std::vector<std::vector<double>>>(std::move(configs));
  auto next = std::make_shared<std::size_t>(0);
  return [shared, next](std::mt19937_64&) { return (*shared)[(*next)++ % shared->size()]; };
}

constexpr ReadoutKind kReadouts[] = {ReadoutKind::linear, ReadoutKind::implicit, ReadoutKind::explicit_odd};
constexpr JastrowMode kModes[] = {JastrowMode::none, JastrowMode::standalone, JastrowMode::symmetric_odd};
constexpr Domain kDomains[] = {Domain::linear, Domain::linlog};
constexpr double kAlphas[] = {-2.0, 0.0, 2.0};

} // namespace

SuiteAnsatz suite_ansatz(ReadoutKind readout, JastrowMode mode, Domain domain, std::optional<double> alpha,
                         std::uint64_t seed, int threads) {
  Ansatz a(molecule_preset("LiH"), lih_suite_spec(readout, mode, domain));
  auto p = perturbed_params(a, seed);
  if (alpha) {
    a.set_alpha(p, *alpha);
  } else if (domain == Domain::linlog) {
    auto batch = init_walkers(a.molecule(), 64, seed);
    std::vector<float> unused;
    const auto psi = make_psi(a, p, false, unused);
    refresh(batch, psi, threads);
    equilibrate(batch, psi, 100, 10, threads);
    a.set_alpha(p, alpha_init(max_logdets(a, p, batch, threads), 0.0));
  }
  return {std::move(a), std::move(p)};
}

std::vector<CheckReport> theorem1_suite(const SuiteOptions& opt) {
  std::vector<CheckReport> out;
  const std::uint64_t seed = opt.seed;
  for (auto readout : {ReadoutKind::implicit, ReadoutKind::explicit_odd}) {
    for (auto mode : {JastrowMode::none, JastrowMode::symmetric_odd}) {
      for (auto domain : kDomains) {
        for (double alpha : kAlphas) {
          if (domain == Domain::linear && alpha != 0.0) {
            continue; // alpha only enters through the linlog map
          }
          auto sa = suite_ansatz(readout, mode, domain, alpha, seed, opt.threads);
          const auto& a = sa.ansatz;
          const auto configs = psi2_configurations(a, sa.params, 1, seed, opt.threads);
          const auto heads = a.jastrow_heads(configs[0], sa.params);
          const auto& p = sa.params;
          const VectorFn f = [&a, &p, heads](std::span<const double> x) { return a.readout_value(x, heads, p); };
          const int k = a.spec().determinants;
          const InputGen gen = [k](std::mt19937_64& rng) { return random_dets(rng, k); };
          std::string name = "theorem1/" + cell_name(readout, mode, domain);
          if (domain == Domain::linlog) {
            name += "/alpha=" + alpha_name(alpha);
          }
          out.push_back(check_theorem1(name, f, make_v(k, opt), gen, opt.trials, seed));
        }
      }
    }
  }
  return out;
}

std::vector<CheckReport> theorem2_suite(const SuiteOptions& opt) {
  std::vector<CheckReport> out;
  for (auto readout : kReadouts) {
    for (auto mode : {JastrowMode::none, JastrowMode::symmetric_odd}) {
      for (auto domain : kDomains) {
        auto sa = suite_ansatz(readout, mode, domain, std::nullopt, opt.seed, opt.threads);
        const auto& a = sa.ansatz;
        const auto jhat = construct_jhat(a, sa.params, make_v(a.spec().determinants, opt));
        const auto configs = psi2_configurations(a, sa.params, opt.trials, opt.seed, opt.threads);
        const auto pairs = same_spin_pairs(a.molecule());
        const std::string base = "theorem2/" + cell_name(readout, mode, domain);

        CheckReport recon;
        recon.name = base + "/reconstruction";
        recon.tolerance = 1e-10;
        CheckReport perm;
        perm.name = base + "/permutation";
        perm.tolerance = 1e-8;
        std::mt19937_64 rng(opt.seed);
        std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
        for (const auto& r : configs) {
          const auto j = jhat(r);
          const auto pr = swapped(r, pairs[pick(rng)]);
          const auto jp = jhat(pr);
          if (!j || !jp) {
            ++recon.excluded;
            ++perm.excluded;
            continue;
          }
          // psi from the full evaluation against (phi^T v) * Jhat
          const auto psi = a.log_psi(r, sa.params);
          const auto proj = jhat.projection(r);
          const int sign = proj.sign * j->sign;
          const double d = std::abs(proj.logabs + j->logabs - psi.logabs);
          const double rel = std::abs(std::expm1(d));
          record(recon, rel, rel, sign == psi.sign && rel < recon.tolerance,
                 "r=" + format_vec(r) + " rel=" + std::to_string(rel));
          const double dp = std::abs(jp->logabs - j->logabs);
          const double relp = std::abs(std::expm1(dp));
          record(perm, relp, relp, jp->sign == j->sign && relp < perm.tolerance,
                 "r=" + format_vec(r) + " sign " + std::to_string(j->sign) + "->" + std::to_string(jp->sign) +
                     " rel=" + std::to_string(relp));
        }
        for (auto* rep : {&recon, &perm}) {
          rep->finish();
          // the guard region must stay negligible
          if (rep->excluded_fraction() >= 0.01) {
            rep->pass = false;
            if (rep->counterexample.empty()) {
              rep->counterexample = "excluded fraction " + std::to_string(rep->excluded_fraction());
            }
          }
          out.push_back(*rep);
        }
      }
    }
  }
  return out;
}

std::vector<CheckReport> definitions_suite(const SuiteOptions& opt) {
  std::vector<CheckReport> out;
  for (auto readout : kReadouts) {
    for (auto mode : kModes) {
      for (auto domain : kDomains) {
        for (double offset : kAlphas) {
          if (domain == Domain::linear && offset != 0.0) {
            continue;
          }
          auto sa = suite_ansatz(readout, mode, domain, std::nullopt, opt.seed, opt.threads);
          auto& p = sa.params;
          const auto& a = sa.ansatz;
          if (domain == Domain::linlog) {
            a.set_alpha(p, a.alpha(p) + offset);
          }
          std::string cell = cell_name(readout, mode, domain);
          if (domain == Domain::linlog) {
            cell += "/alpha" + std::string(offset >= 0 ? "+" : "") + alpha_name(offset);
          }
          const auto configs = psi2_configurations(a, p, std::min(opt.trials, 200), opt.seed, opt.threads);
          const auto pairs = same_spin_pairs(a.molecule());
          const SignedFn psi = [&a, &p](std::span<const double> r) { return a.log_psi(r, p); };
          out.push_back(check_definitions("antisymmetry/" + cell, psi, Symmetry::antisymmetric, cycle(configs),
                                          opt.trials, opt.seed, pairs));

          // readout oddness with the heads of one configuration
          const auto heads = a.jastrow_heads(configs[0], p);
          const VectorFn f = [&a, &p, heads](std::span<const double> x) { return a.readout_value(x, heads, p); };
          const int k = a.spec().determinants;
          out.push_back(check_definitions(
              "odd-readout/" + cell, f, Symmetry::odd, [k](std::mt19937_64& rng) { return random_dets(rng, k); },
              opt.trials, opt.seed));

          if (mode != JastrowMode::none && domain == Domain::linear) {
            // every head is a function of sum-pooled features; probe a random
            // combination of all of them under arbitrary electron swaps
            std::vector<std::pair<int, int>> all;
            for (int i = 0; i < a.n_electrons(); ++i) {
              for (int j = i + 1; j < a.n_electrons(); ++j) {
                all.emplace_back(i, j);
              }
            }
            const VectorFn jas = [&a, &p](std::span<const double> r) {
              const auto h = a.jastrow_heads(r, p);
              double s = 0.0;
              double w = 1.0;
              auto add = [&](const std::vector<double>& v) {
                for (double x : v) {
                  s += w * x;
                  w = -0.61 * w + 0.37;
                }
              };
              add(h.standalone);
              add(h.gate_in);
              add(h.gate_out);
              for (const auto& l : h.layers) {
                add(l);
              }
              return s;
            };
            out.push_back(check_definitions("jastrow-symmetric/" + cell, jas, Symmetry::symmetric,
                                            cycle(configs), opt.trials, opt.seed, all));
          }
        }
      }
    }
  }
  // the counterexample the odd check must reject
  const VectorFn square = [](std::span<const double> x) { return x[0] * x[0]; };
  auto sq = check_definitions(
      "odd-rejects-square", square, Symmetry::odd, [](std::mt19937_64& rng) { return random_dets(rng, 1); },
      std::min(opt.trials, 100), opt.seed);
  CheckReport neg;
  neg.name = "odd-rejects-square";
  neg.trials = sq.trials;
  neg.tolerance = sq.tolerance;
  neg.max_abs_error = sq.max_abs_error;
  neg.max_rel_error = sq.max_rel_error;
  neg.failures = sq.failures == sq.trials ? 0 : sq.trials - sq.failures;
  neg.counterexample = sq.failures == sq.trials ? "" : "x^2 accepted as odd";
  neg.finish();
  out.push_back(neg);
  return out;
}

namespace {

// central differences in long double; returns the quotient at h and its
// distance to the quotient at 2h
struct Quotient {
  double value = 0.0;
  double err = 0.0;
};

template <class F> Quotient central(F&& f, std::vector<long double>& x, std::size_t d, long double h) {
  const long double keep = x[d];
  auto at = [&](long double s) {
    x[d] = keep + s;
    const long double v = f(x);
    x[d] = keep;
    return v;
  };
  const long double q1 = (at(h) - at(-h)) / (2 * h);
  const long double q2 = (at(2 * h) - at(-2 * h)) / (4 * h);
  return {static_cast<double>(q1), static_cast<double>(std::abs(q2 - q1))};
}

template <class F> Quotient laplacian(F&& f, std::vector<long double>& x, long double h) {
  auto lap_at = [&](long double k) {
    const long double f0 = f(x);
    long double lap = 0.0L;
    for (std::size_t d = 0; d < x.size(); ++d) {
      const long double keep = x[d];
      long double v[4];
      const long double steps[4] = {2 * k, k, -k, -2 * k};
      for (int i = 0; i < 4; ++i) {
        x[d] = keep + steps[i];
        v[i] = f(x);
      }
      x[d] = keep;
      lap += (-v[0] + 16 * v[1] - 30 * f0 + 16 * v[2] - v[3]) / (12 * k * k);
    }
    return lap;
  };
  const long double l1 = lap_at(h);
  return {static_cast<double>(l1), static_cast<double>(std::abs(lap_at(2 * h) - l1))};
}

double rel_floor(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-3); }

} // namespace

std::vector<CheckReport> gradients_suite(const SuiteOptions& opt) {
  std::vector<CheckReport> out;
  // 18 cells x 6 configurations = 108 LiH evaluations each way
  const int per_cell = std::max(1, (std::min(opt.trials, 100) + 17) / 18);
  for (auto readout : kReadouts) {
    for (auto mode : kModes) {
      for (auto domain : kDomains) {
        auto sa = suite_ansatz(readout, mode, domain, std::nullopt, opt.seed, opt.threads);
        const auto& a = sa.ansatz;
        const auto& p = sa.params;
        const std::vector<long double> pl(p.begin(), p.end());
        const auto configs = psi2_configurations(a, p, per_cell, opt.seed, opt.threads);
        const std::string cell = cell_name(readout, mode, domain);
        CheckReport jet;
        jet.name = "jet-fd/" + cell;
        jet.tolerance = 1e-6;
        CheckReport adj;
        adj.name = "adjoint-fd/" + cell;
        adj.tolerance = 1e-5;
        for (const auto& r : configs) {
          std::vector<long double> rl(r.begin(), r.end());
          const auto fr = [&](std::span<const long double> x) { return a.log_psi(x, pl).logabs; };
          const auto j = a.log_psi_jet(r, p);
          double worst = 0.0;
          bool trusted = true;
          for (std::size_t d = 0; d < rl.size(); ++d) {
            const auto q = central(fr, rl, d, 1e-5L);
            trusted = trusted && q.err < 1e-7 * std::max(std::abs(q.value), 1e-3);
            worst = std::max(worst, rel_floor(j.logabs.grad[d], q.value));
          }
          const auto lq = laplacian(fr, rl, 1e-3L);
          trusted = trusted && lq.err < 1e-7 * std::max(std::abs(lq.value), 1e-3);
          worst = std::max(worst, rel_floor(j.logabs.lap, lq.value));
          if (!trusted) {
            ++jet.excluded; // next to a node: the quotients disagree with themselves
          } else {
            record(jet, worst, worst, worst < jet.tolerance, "r=" + format_vec(r) + " rel=" + std::to_string(worst));
          }

          const auto g = a.grad_log_psi(r, p);
          std::vector<long double> q(pl);
          const auto fp = [&](std::span<const long double> th) { return a.log_psi(rl, th).logabs; };
          double worst_p = 0.0;
          bool trusted_p = true;
          for (std::size_t i = 0; i < q.size(); ++i) {
            const auto c = central(fp, q, i, 1e-5L);
            trusted_p = trusted_p && c.err < 1e-6 * std::max(std::abs(c.value), 1e-3);
            worst_p = std::max(worst_p, rel_floor(g[i], c.value));
          }
          if (!trusted_p) {
            ++adj.excluded;
          } else {
            record(adj, worst_p, worst_p, worst_p < adj.tolerance,
                   "r=" + format_vec(r) + " rel=" + std::to_string(worst_p));
          }
        }
        jet.finish();
        adj.finish();
        out.push_back(jet);
        out.push_back(adj);
      }
    }
  }
  return out;
}

std::vector<CheckReport> zero_variance_suite(const SuiteOptions& opt) {
  AnsatzSpec s;
  s.orbital_kind = OrbitalKind::exponential;
  s.primitives = 1;
  s.exponent_min = 1.0;
  s.exponent_max = 1.0;
  const Ansatz a(molecule_preset("H"), s);
  const auto p = a.init_params(opt.seed);
  const int n = std::max(opt.trials, 10000);
  const auto configs = psi2_configurations(a, p, n, opt.seed, opt.threads);
  std::vector<double> e(configs.size());
  parallel_for(static_cast<int>(configs.size()), opt.threads,
               [&](int i) { e[static_cast<std::size_t>(i)] = local_energy(a, configs[static_cast<std::size_t>(i)], p).total; });
  CheckReport pin;
  pin.name = "zero-variance/hydrogen-local-energy";
  pin.tolerance = 1e-10;
  double mean = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double err = std::abs(e[i] + 0.5);
    record(pin, err, err / 0.5, err < pin.tolerance,
           "r=" + format_vec(configs[i]) + " E_L=" + std::to_string(e[i]));
    mean += e[i];
  }
  mean /= static_cast<double>(e.size());
  pin.finish();
  double var = 0.0;
  for (double x : e) {
    var += (x - mean) * (x - mean);
  }
  var /= static_cast<double>(e.size() - 1);
  CheckReport variance;
  variance.name = "zero-variance/hydrogen-variance";
  variance.tolerance = 1e-20;
  record(variance, var, var, var < variance.tolerance, "Var(E_L)=" + std::to_string(var));
  variance.finish();
  return {pin, variance};
}

std::vector<CheckReport> run_checks(CheckScope scope, const SuiteOptions& opt) {
  std::vector<CheckReport> out;
  auto add = [&](std::vector<CheckReport> r) { out.insert(out.end(), r.begin(), r.end()); };
  if (scope == CheckScope::all || scope == CheckScope::theorem1) {
    add(theorem1_suite(opt));
  }
  if (scope == CheckScope::all || scope == CheckScope::theorem2) {
    add(theorem2_suite(opt));
  }
  if (scope == CheckScope::all || scope == CheckScope::definitions) {
    add(definitions_suite(opt));
  }
  if (scope == CheckScope::all || scope == CheckScope::gradients) {
    add(gradients_suite(opt));
  }
  if (scope == CheckScope::all || scope == CheckScope::zero_variance) {
    add(zero_variance_suite(opt));
  }
  return out;
}

} // namespace oddvmc
