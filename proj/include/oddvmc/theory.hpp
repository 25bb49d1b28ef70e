#pragma once

// Randomised numerical checks of the structural claims behind the odd
// readouts: the g(x) - g(-x) construction, the factorisation
// psi = (phi^T v) * Jhat with a permutation-invariant Jhat, and the
// odd / even / symmetric / antisymmetric definitions.

#include "oddvmc/ansatz.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace oddvmc {

struct CheckReport {
  std::string name;
  int trials = 0;
  int excluded = 0; // guarded points left out of the statistics
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  int failures = 0;
  bool pass = false;
  std::string counterexample; // first failing trial, human readable

  /// Sets pass from failures; call after the trials are in.
  void finish() { pass = failures == 0 && trials > 0; }
  double excluded_fraction() const {
    return trials + excluded > 0 ? static_cast<double>(excluded) / (trials + excluded) : 0.0;
  }
  std::string to_json() const;
};

using VectorFn = std::function<double(std::span<const double>)>;
using SignedFn = std::function<SignedLog<double>(std::span<const double>)>;
using InputGen = std::function<std::vector<double>(std::mt19937_64&)>;

/// g(x) = f(x) if x^T v > 0, else 0. Throws if v is zero.
VectorFn construct_g(VectorFn f, std::vector<double> v);

/// Checks f is odd, then |g(x) - g(-x) - f(x)| < tol over random x.
CheckReport check_theorem1(const std::string& name, const VectorFn& f, const std::vector<double>& v,
                           const InputGen& gen, int n_trials, std::uint64_t seed, double tol = 1e-12);

inline constexpr double kJhatGuard = 1e-30;

/// Jhat(r) = psi(r) / (phi(r)^T v) as a signed log; empty at guarded points
/// (|phi^T v| < kJhatGuard).
class Jhat {
public:
  Jhat(const Ansatz& ansatz, std::vector<double> params, std::vector<double> v);
  std::optional<SignedLog<double>> operator()(std::span<const double> r) const;
  /// phi(r)^T v from the determinant stack, signed log
  SignedLog<double> projection(std::span<const double> r) const;
  /// psi rebuilt from the readout stage applied to phi(r) and J(r)
  SignedLog<double> readout(std::span<const double> r) const;

private:
  const Ansatz* ansatz_;
  std::vector<double> params_;
  std::vector<double> v_;
};

Jhat construct_jhat(const Ansatz& ansatz, std::vector<double> params, std::vector<double> v);

enum class Symmetry { odd, even, antisymmetric, symmetric };
std::string to_string(Symmetry s);

/// Same-spin pairs (i, j), i < j, of a molecule's electrons.
std::vector<std::pair<int, int>> same_spin_pairs(const Molecule& mol);

/// Randomised check of the claimed symmetry. odd/even negate the whole
/// input; (anti)symmetric swap a random pair from `pairs` (3 coordinates per
/// particle). Values are compared as signed logs: the sign must match exactly
/// and |delta log| < tol.
CheckReport check_definitions(const std::string& name, const SignedFn& f, Symmetry symmetry, const InputGen& gen,
                              int n_trials, std::uint64_t seed, std::span<const std::pair<int, int>> pairs = {},
                              double tol = 1e-10);
/// Real-valued variant: |f(Px) - s f(x)| <= tol max(|f(x)|, |f(Px)|).
CheckReport check_definitions(const std::string& name, const VectorFn& f, Symmetry symmetry, const InputGen& gen,
                              int n_trials, std::uint64_t seed, std::span<const std::pair<int, int>> pairs = {},
                              double tol = 1e-10);

// ---- suites ---------------------------------------------------------------

enum class CheckScope { all, theorem1, theorem2, definitions, gradients, zero_variance };
std::string to_string(CheckScope s);
CheckScope parse_check_scope(const std::string& s);

struct SuiteOptions {
  std::uint64_t seed = 0;
  bool random_v = false; // otherwise v = all ones
  int trials = 1000;
  int threads = 1;
};

/// Initial parameters perturbed by N(0, scale) so no symmetry holds by
/// accident.
std::vector<double> perturbed_params(const Ansatz& ansatz, std::uint64_t seed, double scale = 0.1);

/// Configurations sampled from psi^2 of the given parameters.
std::vector<std::vector<double>> psi2_configurations(const Ansatz& ansatz, const std::vector<double>& params, int n,
                                                     std::uint64_t seed, int threads = 1);

/// The LiH ansatz used by the suites, with alpha from psi^2 samples in the
/// linlog domain unless `alpha` is given.
struct SuiteAnsatz {
  Ansatz ansatz;
  std::vector<double> params;
};
SuiteAnsatz suite_ansatz(ReadoutKind readout, JastrowMode mode, Domain domain, std::optional<double> alpha,
                         std::uint64_t seed, int threads = 1);

std::vector<CheckReport> theorem1_suite(const SuiteOptions& opt);
std::vector<CheckReport> theorem2_suite(const SuiteOptions& opt);
std::vector<CheckReport> definitions_suite(const SuiteOptions& opt);
std::vector<CheckReport> gradients_suite(const SuiteOptions& opt);
std::vector<CheckReport> zero_variance_suite(const SuiteOptions& opt);
std::vector<CheckReport> run_checks(CheckScope scope, const SuiteOptions& opt);

} // namespace oddvmc
