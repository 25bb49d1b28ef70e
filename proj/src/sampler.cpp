#include "oddvmc/sampler.hpp"

#include "oddvmc/linlog.hpp"
#include "oddvmc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace oddvmc {

namespace {

constexpr int kMaxRefreshTries = 1000;

bool valid(const SignedLog<double>& v) { return !v.is_zero() && std::isfinite(v.logabs); }

SignedLog<double> try_eval(const LogPsiFn& psi, std::span<const double> r) {
  try {
    return psi(r);
  } catch (const std::exception&) {
    return signed_log_zero<double>();
  }
}

} // namespace

WalkerBatch make_batch(int walkers, int dim, std::uint64_t seed,
                       const std::function<void(std::mt19937_64&, std::span<double>)>& place) {
  if (walkers < 1) {
    throw std::invalid_argument("need at least one walker");
  }
  WalkerBatch b;
  b.walkers = walkers;
  b.dim = dim;
  b.positions.assign(static_cast<std::size_t>(walkers) * static_cast<std::size_t>(dim), 0.0);
  b.logpsi.assign(static_cast<std::size_t>(walkers), signed_log_zero<double>());
  b.rng.reserve(static_cast<std::size_t>(walkers));
  for (int w = 0; w < walkers; ++w) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(w), 0x5eedu};
    b.rng.emplace_back(seq);
    place(b.rng.back(), b.walker(w));
  }
  return b;
}

std::vector<int> electron_home_nuclei(const Molecule& mol) {
  // Largest-remainder share of the N electrons by charge, then dealt out
  // alternately to up and down electrons.
  const int n = mol.n_electrons();
  const double z = mol.total_charge();
  std::vector<int> share(mol.nuclei.size(), 0);
  std::vector<std::pair<double, int>> rem;
  int given = 0;
  for (std::size_t m = 0; m < mol.nuclei.size(); ++m) {
    const double exact = n * mol.nuclei[m].charge / z;
    share[m] = static_cast<int>(std::floor(exact));
    given += share[m];
    rem.emplace_back(exact - share[m], static_cast<int>(m));
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; given < n; ++i, ++given) {
    ++share[static_cast<std::size_t>(rem[i % rem.size()].second)];
  }
  std::vector<int> slots;
  for (std::size_t m = 0; m < share.size(); ++m) {
    slots.insert(slots.end(), static_cast<std::size_t>(share[m]), static_cast<int>(m));
  }
  std::vector<int> home(static_cast<std::size_t>(n));
  int up = 0;
  int down = 0;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const bool take_up = (s % 2 == 0 && up < mol.n_up) || down >= mol.n_down;
    if (take_up) {
      home[static_cast<std::size_t>(up++)] = slots[s];
    } else {
      home[static_cast<std::size_t>(mol.n_up + down++)] = slots[s];
    }
  }
  return home;
}

WalkerBatch init_walkers(const Molecule& mol, int walkers, std::uint64_t seed) {
  const auto home = electron_home_nuclei(mol);
  return make_batch(walkers, 3 * mol.n_electrons(), seed, [&](std::mt19937_64& rng, std::span<double> r) {
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t i = 0; i < home.size(); ++i) {
      const auto& c = mol.nuclei[static_cast<std::size_t>(home[i])].position;
      for (int k = 0; k < 3; ++k) {
        r[3 * i + static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k)] + noise(rng);
      }
    }
  });
}

void refresh(WalkerBatch& batch, const LogPsiFn& psi, int threads) {
  parallel_for(batch.walkers, threads, [&](int w) {
    auto r = batch.walker(w);
    auto v = try_eval(psi, r);
    std::normal_distribution<double> noise(0.0, 0.1);
    for (int tries = 0; !valid(v); ++tries) {
      if (tries == kMaxRefreshTries) {
        throw SingularEvaluation("walker " + std::to_string(w) + " stuck on a node");
      }
      for (auto& x : r) {
        x += noise(batch.rng[static_cast<std::size_t>(w)]);
      }
      v = try_eval(psi, r);
    }
    batch.logpsi[static_cast<std::size_t>(w)] = v;
  });
}

void mcmc_sweep(WalkerBatch& batch, const LogPsiFn& psi, int n_steps, int threads) {
  if (n_steps < 1) {
    throw std::invalid_argument("mcmc_sweep needs at least one step");
  }
  std::vector<std::uint64_t> accepted(static_cast<std::size_t>(batch.walkers), 0);
  const double sigma = batch.step_sigma;
  parallel_for(batch.walkers, threads, [&](int w) {
    auto& rng = batch.rng[static_cast<std::size_t>(w)];
    auto r = batch.walker(w);
    auto& current = batch.logpsi[static_cast<std::size_t>(w)];
    std::normal_distribution<double> step(0.0, sigma);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> proposal(r.size());
    for (int s = 0; s < n_steps; ++s) {
      for (std::size_t d = 0; d < r.size(); ++d) {
        proposal[d] = r[d] + step(rng);
      }
      const double u = uniform(rng);
      const auto next = try_eval(psi, proposal);
      if (!valid(next)) {
        continue;
      }
      const double log_ratio = 2.0 * (next.logabs - current.logabs);
      if (log_ratio >= 0.0 || u < std::exp(log_ratio)) {
        std::copy(proposal.begin(), proposal.end(), r.begin());
        current = next;
        ++accepted[static_cast<std::size_t>(w)];
      }
    }
  });
  for (auto a : accepted) {
    batch.accept_count += a;
  }
  batch.proposal_count += static_cast<std::uint64_t>(batch.walkers) * static_cast<std::uint64_t>(n_steps);
}

void adapt_step_size(WalkerBatch& batch) {
  if (batch.proposal_count == 0) {
    throw std::logic_error("adapt_step_size called before any proposal");
  }
  const double rate = batch.acceptance_rate();
  batch.step_sigma = std::clamp(batch.step_sigma * std::exp(rate - 0.5), 1e-3, 10.0);
  batch.accept_count = 0;
  batch.proposal_count = 0;
}

std::string to_string(HistogramDomain d) {
  switch (d) {
  case HistogramDomain::log:
    return "log";
  case HistogramDomain::linear:
    return "linear";
  case HistogramDomain::linlog:
    return "linlog";
  }
  return "?";
}

HistogramDomain parse_histogram_domain(const std::string& s) {
  if (s == "log") {
    return HistogramDomain::log;
  }
  if (s == "linear") {
    return HistogramDomain::linear;
  }
  if (s == "linlog") {
    return HistogramDomain::linlog;
  }
  throw std::invalid_argument("unknown histogram domain '" + s + "'");
}

std::uint64_t Histogram::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) {
    t += c;
  }
  return t;
}

std::vector<double> amplitude_values(std::span<const SignedLog<double>> logpsi, double alpha, HistogramDomain domain) {
  std::vector<double> v;
  v.reserve(logpsi.size());
  for (const auto& l : logpsi) {
    if (l.is_zero()) {
      continue;
    }
    switch (domain) {
    case HistogramDomain::log:
      v.push_back(l.logabs / std::log(10.0));
      break;
    case HistogramDomain::linear:
      v.push_back(std::exp(l.logabs));
      break;
    case HistogramDomain::linlog:
      v.push_back(linlog_forward(SignedLog<double>{1, l.logabs}, alpha));
      break;
    }
  }
  return v;
}

Histogram make_histogram(std::span<const double> values, HistogramDomain domain, int n_bins) {
  if (n_bins < 1) {
    throw std::invalid_argument("histogram needs at least one bin");
  }
  Histogram h;
  h.domain = domain;
  h.counts.assign(static_cast<std::size_t>(n_bins), 0);
  if (values.empty()) {
    h.edges.assign(static_cast<std::size_t>(n_bins + 1), 0.0);
    return h;
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (hi == lo) {
    // degenerate support: one unit-width window around the value
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / n_bins;
  for (int b = 0; b <= n_bins; ++b) {
    h.edges.push_back(lo + width * b);
  }
  h.edges.back() = hi;
  for (double v : values) {
    int b = static_cast<int>((v - lo) / width);
    b = std::clamp(b, 0, n_bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

Histogram amplitude_histogram(const WalkerBatch& batch, double alpha, HistogramDomain domain, int n_bins) {
  const auto v = amplitude_values(batch.logpsi, alpha, domain);
  return make_histogram(v, domain, n_bins);
}

void write_histogram_csv(const std::string& path, const Histogram& h) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out.precision(17);
  out << "bin_left,bin_right,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    out << h.edges[b] << ',' << h.edges[b + 1] << ',' << h.counts[b] << '\n';
  }
}

} // namespace oddvmc
