#pragma once

// VMC optimisation: centred score-function gradient of the energy, Adam
// updates with a 1/(1 + t/T) schedule, and the training loop.

#include "oddvmc/ansatz.hpp"
#include "oddvmc/sampler.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace oddvmc {

struct AdamConfig {
  double base_lr = 0.05;
  double multiplier = 1.0;
  double decay_steps = 1000.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  int t = 0;
  std::vector<double> m;
  std::vector<double> v;
};

/// multiplier * base_lr / (1 + t / decay_steps)
double learning_rate(const AdamConfig& cfg, int t);

/// One bias-corrected Adam update. Returns false (and leaves everything
/// untouched) when the gradient has a non-finite entry.
bool optimizer_step(AdamState& state, const AdamConfig& cfg, std::span<const double> grad, std::span<double> params);

// Spread measure for the clipping window: absolute deviations from the median,
// averaged (mean) or their median.
enum class ClipScale { mean_abs, median_abs };
std::string to_string(ClipScale s);
ClipScale parse_clip_scale(const std::string& s);

struct ClipStats {
  double median = 0.0;
  double scale = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  int clipped = 0;
};

/// Clips finite entries to median +- width * scale in place; non-finite
/// entries are left alone.
ClipStats clip_local_energies(std::span<double> e_local, double width = 5.0,
                              ClipScale scale = ClipScale::mean_abs);

/// Relative spread below which the local energies count as constant.
inline constexpr double kEnergyResolution = 1e-12;

struct GradientEstimate {
  std::vector<double> gradient;
  int used = 0;
  int excluded = 0; // walkers with a non-finite energy or gradient
  ClipStats clip;
};

/// mean_i (E_i - mean E) grad_i over walkers with finite data, after
/// clipping. grads is walkers x n_params, row-major. Zero when the energies
/// agree to kEnergyResolution.
GradientEstimate energy_gradient(std::span<const double> e_local, std::span<const double> grads, int n_params,
                                 double clip_width = 5.0, ClipScale clip_scale = ClipScale::mean_abs);

/// alpha = offset - median_i max_k log|det Phi_k(r_i)|. Non-finite entries
/// (nodal samples) are skipped; throws if nothing is left.
double alpha_init(std::span<const double> max_logdets, double offset);

struct BlockStats {
  double mean = 0.0;
  double stderr_ = 0.0;
  int blocks = 0;
};

/// Mean with the standard error of block means (block length `block`). With
/// fewer than two full blocks the plain standard error is used.
BlockStats blocked_mean(std::span<const double> series, int block);

struct TrainConfig {
  Molecule molecule;
  AnsatzSpec ansatz;
  int batch = 512;
  int mcmc_steps = 20;
  int burn_in = 500;
  int adapt_interval = 10; // burn-in sweeps between step-size updates
  int steps = 2000;
  std::uint64_t seed = 0;
  int threads = 1;
  bool single_precision = false;
  double alpha_init_offset = 0.0;
  bool alpha_from_probe = true; // linlog domain only
  bool train_alpha = false;
  double initial_sigma = 0.5;
  AdamConfig adam;
  double final_fraction = 0.2;
  int block_size = 50;
  int max_bad_steps = 10; // consecutive non-finite or below-floor steps before the run is abandoned
  double clip_width = 5.0;
  ClipScale clip_scale = ClipScale::mean_abs;
  int eval_steps = 0; // frozen-parameter sweeps after training; 0 uses the final window
  std::vector<double> initial_params; // empty: ansatz initialisation from seed
};

struct TrainRecord {
  int step = 0;
  double energy = 0.0;
  double stderr_ = 0.0;
  double accept_rate = 0.0;
  double alpha = 0.0;
  double wall_ms = 0.0;
  int excluded = 0;
  bool skipped = false;
};

struct TrainResult {
  std::vector<double> params;
  std::vector<TrainRecord> records;
  double energy = 0.0;
  double stderr_ = 0.0;
  double alpha = 0.0;
  int energy_samples = 0; // step means behind `energy`
  bool diverged = false;
  std::string diagnostic;
  WalkerBatch walkers;
};

using RecordCallback = std::function<void(const TrainRecord&)>;

/// Burn-in, optional alpha initialisation, then `steps` optimisation steps.
/// Deterministic for a fixed config, independent of `threads`. A step whose
/// batch energy is non-finite, or 3 stderr under energy_lower_bound, is not
/// applied; too many in a row, or a final estimate under the floor, marks the
/// run diverged.
TrainResult train(const TrainConfig& cfg, const RecordCallback& on_record = {});

/// log|psi| evaluator at fixed parameters, double or single precision.
LogPsiFn make_psi(const Ansatz& ansatz, const std::vector<double>& params, bool single_precision,
                  std::vector<float>& float_params);

/// Walkers equilibrated under psi for `sweeps` sweeps with step-size
/// adaptation every `adapt_interval` sweeps.
void equilibrate(WalkerBatch& batch, const LogPsiFn& psi, int sweeps, int adapt_interval, int threads);

/// Per walker: max_k log|det Phi_k| of the given ansatz.
std::vector<double> max_logdets(const Ansatz& ansatz, std::span<const double> params, const WalkerBatch& batch,
                                int threads);

} // namespace oddvmc
