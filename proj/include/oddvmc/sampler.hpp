#pragma once

// Metropolis-Hastings walkers for p(r) ~ psi^2 and amplitude histograms.

#include "oddvmc/molecule.hpp"
#include "oddvmc/signed_log.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace oddvmc {

/// sign and log|psi| of one configuration. Must be safe to call from
/// several threads at once.
using LogPsiFn = std::function<SignedLog<double>(std::span<const double>)>;

struct WalkerBatch {
  int walkers = 0;
  int dim = 0;
  std::vector<double> positions; // walkers x dim, row-major
  std::vector<SignedLog<double>> logpsi;
  std::vector<std::mt19937_64> rng; // one stream per walker
  double step_sigma = 0.5;
  std::uint64_t accept_count = 0;
  std::uint64_t proposal_count = 0;

  std::span<double> walker(int w) {
    return {positions.data() + static_cast<std::size_t>(w) * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
  std::span<const double> walker(int w) const {
    return {positions.data() + static_cast<std::size_t>(w) * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
  double acceptance_rate() const {
    return proposal_count == 0 ? 0.0 : static_cast<double>(accept_count) / static_cast<double>(proposal_count);
  }
};

/// Walkers of the given dimension with independent streams derived from
/// `seed`; positions from `place` (called once per walker with its stream).
WalkerBatch make_batch(int walkers, int dim, std::uint64_t seed,
                       const std::function<void(std::mt19937_64&, std::span<double>)>& place);

/// Electrons at nuclei plus unit gaussian noise, shared out in proportion to
/// the nuclear charges.
WalkerBatch init_walkers(const Molecule& mol, int walkers, std::uint64_t seed);

/// Which nucleus each electron starts at.
std::vector<int> electron_home_nuclei(const Molecule& mol);

/// Recomputes log|psi| of every walker (after a parameter change). A walker on
/// a node or failing to evaluate is re-jittered from its stream until valid.
void refresh(WalkerBatch& batch, const LogPsiFn& psi, int threads = 1);

/// n_steps all-electron gaussian proposals per walker.
void mcmc_sweep(WalkerBatch& batch, const LogPsiFn& psi, int n_steps, int threads = 1);

/// sigma <- sigma exp(rate - 0.5), clipped to [1e-3, 10]; counters reset.
void adapt_step_size(WalkerBatch& batch);

enum class HistogramDomain { log, linear, linlog };
std::string to_string(HistogramDomain d);
HistogramDomain parse_histogram_domain(const std::string& s);

struct Histogram {
  HistogramDomain domain = HistogramDomain::log;
  std::vector<double> edges; // n_bins + 1
  std::vector<std::uint64_t> counts;
  std::uint64_t total() const;
};

/// Amplitude values of the walkers: log10|psi|, |psi|, or linlog_alpha(|psi|).
std::vector<double> amplitude_values(std::span<const SignedLog<double>> logpsi, double alpha, HistogramDomain domain);

Histogram make_histogram(std::span<const double> values, HistogramDomain domain, int n_bins);

Histogram amplitude_histogram(const WalkerBatch& batch, double alpha, HistogramDomain domain, int n_bins);

/// CSV with columns bin_left, bin_right, count.
void write_histogram_csv(const std::string& path, const Histogram& h);

} // namespace oddvmc
