// oddvmc command line: run, matrix, check, histogram, cusp.

#include "oddvmc/config.hpp"
#include "oddvmc/errors.hpp"
#include "oddvmc/experiment.hpp"
#include "oddvmc/theory.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

using namespace oddvmc;

namespace {

constexpr int kExitFailed = 1; // failing check or runtime error
constexpr int kExitConfig = 2;
constexpr int kExitNaN = 3;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> precision;
  std::optional<std::string> out;
  std::string checkpoint;
};

void add_common(CLI::App* app, Common& c, bool needs_config = true) {
  auto* cfg = app->add_option("--config", c.config, "run configuration (JSON)")->check(CLI::ExistingFile);
  if (needs_config) {
    cfg->required();
  }
  app->add_option("--seed", c.seed, "override the config seed");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::Range(1, 1024));
  app->add_option("--precision", c.precision, "single or double")->check(CLI::IsMember({"single", "double"}));
  app->add_option("--out", c.out, "output directory (overrides output_dir)");
}

RunConfig resolve(const Common& o) {
  RunConfig c = load_run_config(o.config);
  if (o.seed) {
    c.train.seed = *o.seed;
  }
  if (o.threads) {
    c.train.threads = *o.threads;
  }
  if (o.precision) {
    c.train.single_precision = parse_precision(*o.precision) == Precision::single;
  }
  if (o.out) {
    c.output_dir = *o.out;
  }
  return c;
}

std::optional<std::vector<double>> load_params(const std::string& path, const RunConfig& c) {
  if (path.empty()) {
    return std::nullopt;
  }
  const auto ck = read_checkpoint(path);
  const Ansatz a(c.train.molecule, c.train.ansatz);
  if (ck.params.size() != a.layout().size()) {
    throw ConfigError(path, "checkpoint has " + std::to_string(ck.params.size()) + " parameters, the config's ansatz " +
                                std::to_string(a.layout().size()));
  }
  if (ck.config_hash != config_hash(c)) {
    std::cerr << "note: checkpoint was written under config " << ck.config_hash << "\n";
  }
  return ck.params;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

int cmd_run(const Common& o) {
  const auto c = resolve(o);
  const auto res = run_experiment(c, c.output_dir);
  std::cout << c.train.molecule.name << " energy " << fmt(res.row.energy) << " +- " << fmt(res.row.stderr_)
            << " Ha  (config " << res.config_hash << ", out " << c.output_dir << ")\n";
  if (res.row.nan_flag) {
    std::cerr << "run aborted: " << (res.row.diagnostic.empty() ? "non-finite energy" : res.row.diagnostic) << "\n";
    return kExitNaN;
  }
  return 0;
}

int cmd_matrix(const Common& o, int jobs) {
  const auto c = resolve(o);
  const auto rows = run_matrix(c, c.output_dir, jobs);
  int flagged = 0;
  for (const auto& r : rows) {
    std::cout << r.cell_id << "  " << (r.nan_flag ? "NaN" : fmt(r.energy) + " +- " + fmt(r.stderr_)) << "\n";
    flagged += r.nan_flag ? 1 : 0;
  }
  std::cout << rows.size() << " cells, " << flagged << " flagged; summary in "
            << (std::filesystem::path(c.output_dir) / "summary.csv").string() << "\n";
  return 0;
}

int cmd_check(const Common& o, const std::string& scope, bool random_v, int trials) {
  SuiteOptions opt;
  opt.seed = o.seed.value_or(0);
  opt.threads = o.threads.value_or(1);
  opt.random_v = random_v;
  opt.trials = trials;
  const auto reports = run_checks(parse_check_scope(scope), opt);
  nlohmann::json all = nlohmann::json::array();
  int failed = 0;
  for (const auto& r : reports) {
    all.push_back(nlohmann::json::parse(r.to_json()));
    if (!r.pass) {
      ++failed;
      std::cerr << "FAIL " << r.to_json() << "\n";
    }
  }
  if (o.out) {
    std::filesystem::create_directories(*o.out);
    std::ofstream(std::filesystem::path(*o.out) / "checks.json") << all.dump(2) << "\n";
  }
  std::cout << all.dump(2) << "\n";
  std::cerr << reports.size() - static_cast<std::size_t>(failed) << "/" << reports.size() << " checks passed\n";
  return failed == 0 ? 0 : kExitFailed;
}

int cmd_histogram(const Common& o, const std::vector<std::string>& domains) {
  auto c = resolve(o);
  if (!domains.empty()) {
    c.histogram_domains.clear();
    for (const auto& d : domains) {
      c.histogram_domains.push_back(parse_histogram_domain(d));
    }
  }
  for (const auto& p : run_histograms(c, c.output_dir, load_params(o.checkpoint, c))) {
    std::cout << p << "\n";
  }
  return 0;
}

int cmd_cusp(const Common& o, int nucleus) {
  const auto c = resolve(o);
  const auto scan = run_cusp(c, nucleus, c.output_dir, load_params(o.checkpoint, c));
  for (const auto& p : scan) {
    std::cout << fmt(p.radius) << "  " << fmt(p.averaged) << (p.flagged ? "  (flagged)" : "") << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational Monte Carlo with odd readouts over determinant stacks"};
  app.require_subcommand(1);

  Common run_o, matrix_o, check_o, hist_o, cusp_o;
  auto* run = app.add_subcommand("run", "train one configuration");
  add_common(run, run_o);

  int jobs = 1;
  auto* matrix = app.add_subcommand("matrix", "train every cell of the config's matrix section");
  add_common(matrix, matrix_o);
  matrix->add_option("--jobs", jobs, "cells run as parallel processes")->check(CLI::Range(1, 256));

  std::string scope = "all";
  bool random_v = false;
  int trials = 1000;
  auto* check = app.add_subcommand("check", "randomised structural and derivative checks");
  add_common(check, check_o, false);
  check->add_option("--scope", scope, "all, theorem1, theorem2, definitions, gradients, zero-variance")
      ->check(CLI::IsMember({"all", "theorem1", "theorem2", "definitions", "gradients", "zero-variance"}));
  check->add_flag("--random-v", random_v, "random projection vector instead of all ones");
  check->add_option("--trials", trials, "trials per check")->check(CLI::Range(1, 10000000));

  std::vector<std::string> domains;
  auto* hist = app.add_subcommand("histogram", "amplitude histograms of psi^2 samples");
  add_common(hist, hist_o);
  hist->add_option("--domains", domains, "subset of log, linear, linlog")
      ->delimiter(',')
      ->check(CLI::IsMember({"log", "linear", "linlog"}));
  hist->add_option("--checkpoint", hist_o.checkpoint, "parameters to use instead of the initialisation")
      ->check(CLI::ExistingFile);

  int nucleus = 0;
  auto* cusp = app.add_subcommand("cusp", "radial log-derivative of psi approaching a nucleus");
  add_common(cusp, cusp_o);
  cusp->add_option("--nucleus", nucleus, "nucleus index")->required();
  cusp->add_option("--checkpoint", cusp_o.checkpoint, "parameters to use instead of the initialisation")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      return cmd_run(run_o);
    }
    if (*matrix) {
      return cmd_matrix(matrix_o, jobs);
    }
    if (*check) {
      return cmd_check(check_o, scope, random_v, trials);
    }
    if (*hist) {
      return cmd_histogram(hist_o, domains);
    }
    if (*cusp) {
      return cmd_cusp(cusp_o, nucleus);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return 0;
}
