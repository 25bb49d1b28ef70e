#include "oddvmc/trainer.hpp"

#include "oddvmc/hamiltonian.hpp"
#include "oddvmc/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oddvmc {

double learning_rate(const AdamConfig& cfg, int t) {
  return cfg.multiplier * cfg.base_lr / (1.0 + static_cast<double>(t) / cfg.decay_steps);
}

bool optimizer_step(AdamState& state, const AdamConfig& cfg, std::span<const double> grad, std::span<double> params) {
  if (grad.size() != params.size()) {
    throw ShapeError("gradient and parameters differ in length");
  }
  for (double g : grad) {
    if (!std::isfinite(g)) {
      return false;
    }
  }
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  const double lr = learning_rate(cfg, state.t);
  ++state.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, state.t);
  const double c2 = 1.0 - std::pow(cfg.beta2, state.t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double mh = state.m[i] / c1;
    const double vh = state.v[i] / c2;
    params[i] -= lr * mh / (std::sqrt(vh) + cfg.eps);
  }
  return true;
}

namespace {

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  const double hi = v[mid];
  if (n % 2 == 1) {
    return hi;
  }
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
  return 0.5 * (lo + hi);
}

} // namespace

std::string to_string(ClipScale s) { return s == ClipScale::mean_abs ? "mean_abs" : "median_abs"; }

ClipScale parse_clip_scale(const std::string& s) {
  if (s == "mean_abs") {
    return ClipScale::mean_abs;
  }
  if (s == "median_abs") {
    return ClipScale::median_abs;
  }
  throw std::invalid_argument("unknown clip scale '" + s + "'");
}

ClipStats clip_local_energies(std::span<double> e_local, double width, ClipScale scale) {
  ClipStats s;
  std::vector<double> finite;
  for (double e : e_local) {
    if (std::isfinite(e)) {
      finite.push_back(e);
    }
  }
  if (finite.empty()) {
    return s;
  }
  s.median = median_of(finite);
  for (auto& e : finite) {
    e = std::abs(e - s.median);
  }
  if (scale == ClipScale::median_abs) {
    s.scale = median_of(finite);
  } else {
    double sum = 0.0;
    for (double d : finite) {
      sum += d;
    }
    s.scale = sum / static_cast<double>(finite.size());
  }
  s.lower = s.median - width * s.scale;
  s.upper = s.median + width * s.scale;
  for (double& e : e_local) {
    if (!std::isfinite(e)) {
      continue;
    }
    if (e < s.lower || e > s.upper) {
      e = std::clamp(e, s.lower, s.upper);
      ++s.clipped;
    }
  }
  return s;
}

GradientEstimate energy_gradient(std::span<const double> e_local, std::span<const double> grads, int n_params,
                                 double clip_width, ClipScale clip_scale) {
  const std::size_t walkers = e_local.size();
  if (grads.size() != walkers * static_cast<std::size_t>(n_params)) {
    throw ShapeError("gradient matrix does not match walkers x parameters");
  }
  if (walkers < 2) {
    throw std::invalid_argument("energy gradient needs at least two walkers");
  }
  GradientEstimate out;
  out.gradient.assign(static_cast<std::size_t>(n_params), 0.0);

  std::vector<double> e;
  std::vector<std::size_t> rows;
  for (std::size_t w = 0; w < walkers; ++w) {
    bool ok = std::isfinite(e_local[w]);
    for (int p = 0; ok && p < n_params; ++p) {
      ok = std::isfinite(grads[w * static_cast<std::size_t>(n_params) + static_cast<std::size_t>(p)]);
    }
    if (ok) {
      e.push_back(e_local[w]);
      rows.push_back(w);
    } else {
      ++out.excluded;
    }
  }
  out.used = static_cast<int>(e.size());
  if (e.empty()) {
    std::fill(out.gradient.begin(), out.gradient.end(), std::numeric_limits<double>::quiet_NaN());
    return out;
  }
  out.clip = clip_local_energies(e, clip_width, clip_scale);
  double mean = 0.0;
  for (double v : e) {
    mean += v;
  }
  mean /= static_cast<double>(e.size());
  // energies that agree to rounding carry no signal; Adam would blow the
  // rounding noise up to full-size steps
  double spread = 0.0;
  for (double v : e) {
    spread = std::max(spread, std::abs(v - mean));
  }
  if (spread <= kEnergyResolution * std::max(1.0, std::abs(mean))) {
    return out;
  }
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double c = e[i] - mean;
    const double* g = grads.data() + rows[i] * static_cast<std::size_t>(n_params);
    for (int p = 0; p < n_params; ++p) {
      out.gradient[static_cast<std::size_t>(p)] += c * g[p];
    }
  }
  for (auto& g : out.gradient) {
    g /= static_cast<double>(e.size());
  }
  return out;
}

double alpha_init(std::span<const double> max_logdets, double offset) {
  std::vector<double> v;
  for (double x : max_logdets) {
    if (std::isfinite(x)) {
      v.push_back(x);
    }
  }
  if (v.empty()) {
    throw SingularEvaluation("alpha initialisation: every sample sits on a node");
  }
  return offset - median_of(std::move(v));
}

BlockStats blocked_mean(std::span<const double> series, int block) {
  BlockStats s;
  const std::size_t n = series.size();
  if (n == 0) {
    s.mean = std::numeric_limits<double>::quiet_NaN();
    s.stderr_ = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double x : series) {
    sum += x;
  }
  s.mean = sum / static_cast<double>(n);
  const std::size_t b = block > 0 ? static_cast<std::size_t>(block) : 1;
  const std::size_t nb = n / b;
  if (nb >= 2) {
    std::vector<double> means;
    // blocks aligned to the end of the series so the freshest data counts
    const std::size_t start = n - nb * b;
    for (std::size_t k = 0; k < nb; ++k) {
      double m = 0.0;
      for (std::size_t i = 0; i < b; ++i) {
        m += series[start + k * b + i];
      }
      means.push_back(m / static_cast<double>(b));
    }
    double mm = 0.0;
    for (double m : means) {
      mm += m;
    }
    mm /= static_cast<double>(nb);
    double var = 0.0;
    for (double m : means) {
      var += (m - mm) * (m - mm);
    }
    var /= static_cast<double>(nb - 1);
    s.stderr_ = std::sqrt(var / static_cast<double>(nb));
    s.blocks = static_cast<int>(nb);
  } else if (n >= 2) {
    double var = 0.0;
    for (double x : series) {
      var += (x - s.mean) * (x - s.mean);
    }
    var /= static_cast<double>(n - 1);
    s.stderr_ = std::sqrt(var / static_cast<double>(n));
    s.blocks = static_cast<int>(n);
  }
  return s;
}

LogPsiFn make_psi(const Ansatz& ansatz, const std::vector<double>& params, bool single_precision,
                  std::vector<float>& float_params) {
  if (single_precision) {
    float_params.assign(params.begin(), params.end());
    const std::vector<float>* fp = &float_params;
    return [&ansatz, fp](std::span<const double> r) {
      const auto v = ansatz.log_psi(r, std::span<const float>(*fp));
      return SignedLog<double>{v.sign, static_cast<double>(v.logabs)};
    };
  }
  const std::vector<double>* p = &params;
  return [&ansatz, p](std::span<const double> r) { return ansatz.log_psi(r, *p); };
}

void equilibrate(WalkerBatch& batch, const LogPsiFn& psi, int sweeps, int adapt_interval, int threads) {
  const int chunk = std::max(1, adapt_interval);
  for (int done = 0; done < sweeps;) {
    const int n = std::min(chunk, sweeps - done);
    mcmc_sweep(batch, psi, n, threads);
    adapt_step_size(batch);
    done += n;
  }
}

std::vector<double> max_logdets(const Ansatz& ansatz, std::span<const double> params, const WalkerBatch& batch,
                                int threads) {
  std::vector<double> out(static_cast<std::size_t>(batch.walkers), std::numeric_limits<double>::quiet_NaN());
  parallel_for(batch.walkers, threads, [&](int w) {
    try {
      const auto dets = ansatz.determinants(batch.walker(w), params);
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& d : dets) {
        if (!d.is_zero()) {
          best = std::max(best, d.logabs);
        }
      }
      out[static_cast<std::size_t>(w)] = best;
    } catch (const std::exception&) {
      // left as NaN: a nodal sample
    }
  });
  return out;
}

namespace {

// mean and plain standard error over the finite entries
std::pair<double, double> batch_moments(std::span<const double> e_local) {
  double sum = 0.0;
  double sum2 = 0.0;
  int n_ok = 0;
  for (double e : e_local) {
    if (std::isfinite(e)) {
      sum += e;
      ++n_ok;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double mean = n_ok > 0 ? sum / n_ok : nan;
  for (double e : e_local) {
    if (std::isfinite(e)) {
      sum2 += (e - mean) * (e - mean);
    }
  }
  return {mean, n_ok > 1 ? std::sqrt(sum2 / (n_ok - 1) / n_ok) : nan};
}

// Linear-readout, Jastrow-free copy of the determinant stack, sharing the
// orbital parameters of the main ansatz.
std::pair<Ansatz, std::vector<double>> linear_probe(const Ansatz& main, std::span<const double> params,
                                                    std::uint64_t seed) {
  AnsatzSpec s = main.spec();
  s.readout = ReadoutKind::linear;
  s.jastrow = JastrowMode::none;
  s.domain = Domain::linear;
  Ansatz probe(main.molecule(), s);
  auto p = probe.init_params(seed);
  for (const char* name : {"orbital.coeff", "orbital.log_exponent"}) {
    const auto& src = main.layout().at(name);
    const auto& dst = probe.layout().at(name);
    std::copy_n(params.begin() + static_cast<long>(src.offset), src.size(), p.begin() + static_cast<long>(dst.offset));
  }
  return {std::move(probe), std::move(p)};
}

} // namespace

TrainResult train(const TrainConfig& cfg, const RecordCallback& on_record) {
  if (cfg.batch < 2) {
    throw std::invalid_argument("batch must hold at least two walkers");
  }
  if (cfg.steps < 0 || cfg.burn_in < 0 || cfg.mcmc_steps < 1) {
    throw std::invalid_argument("steps and burn-in must be non-negative, mcmc_steps positive");
  }
  const Ansatz ansatz(cfg.molecule, cfg.ansatz);
  TrainResult res;
  res.params = cfg.initial_params.empty() ? ansatz.init_params(cfg.seed) : cfg.initial_params;
  if (res.params.size() != ansatz.layout().size()) {
    throw ShapeError("initial parameters do not match the ansatz layout");
  }
  auto& params = res.params;
  const int n_params = static_cast<int>(params.size());
  const std::size_t alpha_at = ansatz.offsets().alpha;

  res.walkers = init_walkers(cfg.molecule, cfg.batch, cfg.seed);
  auto& batch = res.walkers;
  batch.step_sigma = cfg.initial_sigma;

  if (cfg.ansatz.domain == Domain::linlog && cfg.alpha_from_probe && cfg.initial_params.empty()) {
    auto [probe, probe_params] = linear_probe(ansatz, params, cfg.seed);
    std::vector<float> fprobe;
    const auto probe_psi = make_psi(probe, probe_params, cfg.single_precision, fprobe);
    refresh(batch, probe_psi, cfg.threads);
    equilibrate(batch, probe_psi, cfg.burn_in, cfg.adapt_interval, cfg.threads);
    const auto logdets = max_logdets(probe, probe_params, batch, cfg.threads);
    ansatz.set_alpha(params, alpha_init(logdets, cfg.alpha_init_offset));
  } else if (cfg.initial_params.empty()) {
    ansatz.set_alpha(params, cfg.alpha_init_offset);
  }

  std::vector<float> fparams;
  auto psi = make_psi(ansatz, params, cfg.single_precision, fparams);
  refresh(batch, psi, cfg.threads);
  equilibrate(batch, psi, cfg.burn_in, cfg.adapt_interval, cfg.threads);

  AdamState adam;
  std::vector<double> e_local(static_cast<std::size_t>(cfg.batch));
  std::vector<double> grads(static_cast<std::size_t>(cfg.batch) * static_cast<std::size_t>(n_params));
  int bad_run = 0;
  bool last_bad_unphysical = false;
  // a mean this far under the floor is a broken estimator, not physics.
  // The floor is exact for hydrogen, hence the rounding slack.
  const double e_floor = energy_lower_bound(cfg.molecule);
  const auto unphysical = [&](double e, double se) {
    return e + 3.0 * se < e_floor - 1e-9 * std::max(1.0, std::abs(e_floor));
  };

  const auto evaluate = [&](bool with_grads) {
    parallel_for(cfg.batch, cfg.threads, [&](int w) {
      const auto r = batch.walker(w);
      double* g = grads.data() + static_cast<std::size_t>(w) * static_cast<std::size_t>(n_params);
      try {
        e_local[static_cast<std::size_t>(w)] =
            cfg.single_precision ? local_energy(ansatz, r, std::span<const float>(fparams)).total
                                 : local_energy(ansatz, r, params).total;
        if (with_grads) {
          const auto gw = ansatz.grad_log_psi(r, params);
          std::copy(gw.begin(), gw.end(), g);
        }
      } catch (const std::exception&) {
        e_local[static_cast<std::size_t>(w)] = std::numeric_limits<double>::quiet_NaN();
        std::fill(g, g + n_params, std::numeric_limits<double>::quiet_NaN());
      }
    });
  };

  for (int step = 0; step < cfg.steps; ++step) {
    const auto t0 = std::chrono::steady_clock::now();
    mcmc_sweep(batch, psi, cfg.mcmc_steps, cfg.threads);
    TrainRecord rec;
    rec.step = step;
    rec.accept_rate = batch.acceptance_rate();
    adapt_step_size(batch);

    evaluate(true);
    const auto moments = batch_moments(e_local);
    rec.energy = moments.first;
    rec.stderr_ = moments.second;

    auto est = energy_gradient(e_local, grads, n_params, cfg.clip_width, cfg.clip_scale);
    rec.excluded = est.excluded;
    if (!cfg.train_alpha) {
      est.gradient[alpha_at] = 0.0;
    }
    const bool finite_energy = std::isfinite(rec.energy);
    const bool below_floor = finite_energy && unphysical(rec.energy, rec.stderr_);
    const bool stepped =
        finite_energy && !below_floor && est.used >= 2 && optimizer_step(adam, cfg.adam, est.gradient, params);
    rec.skipped = !stepped;
    if (stepped) {
      bad_run = 0;
      if (cfg.single_precision) {
        fparams.assign(params.begin(), params.end());
      }
      try {
        refresh(batch, psi, cfg.threads);
      } catch (const SingularEvaluation& e) {
        rec.skipped = true;
        res.diverged = true;
        res.diagnostic = std::string("walkers lost after update: ") + e.what();
      }
    } else {
      ++bad_run;
      last_bad_unphysical = below_floor;
    }
    rec.alpha = params[alpha_at];
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    res.records.push_back(rec);
    if (on_record) {
      on_record(rec);
    }
    if (res.diverged) {
      break;
    }
    if (bad_run > cfg.max_bad_steps) {
      res.diverged = true;
      res.diagnostic = last_bad_unphysical
                           ? "diverged: " + std::to_string(bad_run) + " consecutive steps below the energy floor " +
                                 std::to_string(e_floor) + " ending at step " + std::to_string(step) + " (E = " +
                                 std::to_string(rec.energy) + ")"
                           : "NaN: " + std::to_string(bad_run) + " consecutive non-finite steps ending at step " +
                                 std::to_string(step);
      break;
    }
  }

  res.alpha = params[alpha_at];
  if (res.diverged) {
    res.energy = std::numeric_limits<double>::quiet_NaN();
    res.stderr_ = std::numeric_limits<double>::quiet_NaN();
    return res;
  }
  std::vector<double> tail;
  if (cfg.eval_steps > 0) {
    for (int step = 0; step < cfg.eval_steps; ++step) {
      mcmc_sweep(batch, psi, cfg.mcmc_steps, cfg.threads);
      evaluate(false);
      const double e = batch_moments(e_local).first;
      if (std::isfinite(e)) {
        tail.push_back(e);
      }
    }
  } else {
    const int window = std::max(1, static_cast<int>(std::lround(cfg.final_fraction * cfg.steps)));
    for (std::size_t i = res.records.size() > static_cast<std::size_t>(window) ? res.records.size() - window : 0;
         i < res.records.size(); ++i) {
      if (!res.records[i].skipped && std::isfinite(res.records[i].energy)) {
        tail.push_back(res.records[i].energy);
      }
    }
  }
  const auto bs = blocked_mean(tail, cfg.block_size);
  res.energy_samples = static_cast<int>(tail.size());
  if (unphysical(bs.mean, bs.stderr_)) {
    res.diverged = true;
    res.diagnostic = "diverged: final energy " + std::to_string(bs.mean) + " below the floor " + std::to_string(e_floor);
    res.energy = std::numeric_limits<double>::quiet_NaN();
    res.stderr_ = std::numeric_limits<double>::quiet_NaN();
    return res;
  }
  res.energy = bs.mean;
  res.stderr_ = bs.stderr_;
  return res;
}

} // namespace oddvmc
