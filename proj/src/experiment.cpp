#include "oddvmc/experiment.hpp"

#include "oddvmc/parallel.hpp"

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace oddvmc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_nan(const json& j) { return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN(); }

std::string format_double(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) {
    throw std::runtime_error("cannot write " + p.string());
  }
  return out;
}

json row_json(const SummaryRow& r) {
  return {{"cell_id", r.cell_id},   {"system", r.system},         {"readout", r.readout},
          {"jastrow_mode", r.jastrow_mode}, {"domain", r.domain}, {"alpha", r.alpha},
          {"energy", finite_or_null(r.energy)}, {"stderr", finite_or_null(r.stderr_)},
          {"nan_flag", r.nan_flag}, {"diagnostic", r.diagnostic}};
}

SummaryRow row_from_json(const json& j) {
  SummaryRow r;
  r.cell_id = j.at("cell_id").get<std::string>();
  r.system = j.at("system").get<std::string>();
  r.readout = j.at("readout").get<std::string>();
  r.jastrow_mode = j.at("jastrow_mode").get<std::string>();
  r.domain = j.at("domain").get<std::string>();
  r.alpha = j.at("alpha").get<double>();
  r.energy = number_or_nan(j.at("energy"));
  r.stderr_ = number_or_nan(j.at("stderr"));
  r.nan_flag = j.at("nan_flag").get<bool>();
  r.diagnostic = j.value("diagnostic", "");
  return r;
}

std::string alpha_tag(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", a);
  return buf;
}

// Burn-in and alpha initialisation exactly as training does them, without
// any optimisation step.
TrainResult equilibrated(const RunConfig& c, const std::optional<std::vector<double>>& params, int sweeps) {
  TrainConfig t = c.train;
  t.steps = 0;
  t.eval_steps = 0;
  t.burn_in = std::max(t.burn_in, sweeps);
  if (params) {
    t.initial_params = *params;
  }
  return train(t);
}

} // namespace

SummaryRow summary_row(const std::string& cell_id, const RunConfig& c) {
  SummaryRow r;
  r.cell_id = cell_id;
  r.system = c.train.molecule.name;
  r.readout = to_string(c.train.ansatz.readout);
  r.jastrow_mode = to_string(c.train.ansatz.jastrow);
  r.domain = to_string(c.train.ansatz.domain);
  r.alpha = c.train.alpha_init_offset;
  return r;
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
  auto out = open_out(path);
  out << "cell_id,system,readout,jastrow_mode,domain,alpha,energy,stderr,nan_flag\n";
  for (const auto& r : rows) {
    out << r.cell_id << ',' << r.system << ',' << r.readout << ',' << r.jastrow_mode << ',' << r.domain << ','
        << format_double(r.alpha) << ',' << format_double(r.energy) << ',' << format_double(r.stderr_) << ','
        << (r.nan_flag ? 1 : 0) << '\n';
  }
}

std::vector<SummaryRow> read_summary_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read " + path);
  }
  std::string line;
  std::getline(in, line);
  if (line != "cell_id,system,readout,jastrow_mode,domain,alpha,energy,stderr,nan_flag") {
    throw std::runtime_error(path + ": unexpected header");
  }
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      f.push_back(cell);
    }
    if (f.size() != 9) {
      throw std::runtime_error(path + ": expected 9 fields in '" + line + "'");
    }
    SummaryRow r;
    r.cell_id = f[0];
    r.system = f[1];
    r.readout = f[2];
    r.jastrow_mode = f[3];
    r.domain = f[4];
    r.alpha = std::stod(f[5]);
    r.energy = std::stod(f[6]);
    r.stderr_ = std::stod(f[7]);
    r.nan_flag = f[8] == "1";
    rows.push_back(r);
  }
  return rows;
}

void write_resolved_config(const std::string& dir, const RunConfig& c) {
  fs::create_directories(dir);
  open_out(fs::path(dir) / "config.json") << to_json(c).dump(2) << '\n';
  open_out(fs::path(dir) / "config.sha1") << config_hash(c) << '\n';
}

RunOutcome run_experiment(const RunConfig& c, const std::string& dir, const std::string& cell_id) {
  write_resolved_config(dir, c);
  RunOutcome out;
  out.config_hash = config_hash(c);
  out.row = summary_row(cell_id, c);

  auto metrics = open_out(fs::path(dir) / "metrics.jsonl");
  const RecordCallback on_record = [&](const TrainRecord& r) {
    const json line = {{"step", r.step},
                       {"energy", finite_or_null(r.energy)},
                       {"stderr", finite_or_null(r.stderr_)},
                       {"accept_rate", r.accept_rate},
                       {"alpha", r.alpha},
                       {"wall_ms", r.wall_ms}};
    metrics << line.dump() << '\n';
    metrics.flush();
  };
  try {
    out.result = train(c.train, on_record);
    out.row.energy = out.result.energy;
    out.row.stderr_ = out.result.stderr_;
    out.row.nan_flag = out.result.diverged || !std::isfinite(out.result.energy);
    out.row.diagnostic = out.result.diagnostic;
  } catch (const std::exception& e) {
    out.row.energy = std::numeric_limits<double>::quiet_NaN();
    out.row.stderr_ = std::numeric_limits<double>::quiet_NaN();
    out.row.nan_flag = true;
    out.row.diagnostic = e.what();
  }
  metrics.close();

  Checkpoint ck;
  ck.config_hash = out.config_hash;
  ck.params = out.result.params;
  ck.alpha = out.result.alpha;
  ck.energy = out.row.energy;
  ck.stderr_ = out.row.stderr_;
  ck.steps = static_cast<int>(out.result.records.size());
  write_checkpoint((fs::path(dir) / "checkpoint.json").string(), ck);
  write_summary_csv((fs::path(dir) / "summary.csv").string(), {out.row});
  open_out(fs::path(dir) / "result.json") << row_json(out.row).dump(2) << '\n';
  return out;
}

std::vector<MatrixCell> matrix_cells(const RunConfig& base) {
  const auto& m = base.matrix;
  if (m.cells() == 0) {
    throw ConfigError("matrix", "no axes given (every axis needs at least one value)");
  }
  std::vector<MatrixCell> cells;
  std::set<std::string> ids;
  for (auto r : m.readout) {
    for (auto j : m.jastrow) {
      for (auto d : m.domain) {
        for (double a : m.alpha) {
          MatrixCell cell;
          cell.config = base;
          cell.config.matrix = {};
          cell.config.train.ansatz.readout = r;
          cell.config.train.ansatz.jastrow = j;
          cell.config.train.ansatz.domain = d;
          cell.config.train.alpha_init_offset = a;
          cell.id = to_string(r) + "_" + to_string(j) + "_" + to_string(d) + "_a" + alpha_tag(a);
          if (!ids.insert(cell.id).second) {
            throw ConfigError("matrix", "duplicate cell " + cell.id);
          }
          cells.push_back(std::move(cell));
        }
      }
    }
  }
  return cells;
}

std::vector<SummaryRow> run_matrix(const RunConfig& base, const std::string& dir, int jobs) {
  const auto cells = matrix_cells(base);
  write_resolved_config(dir, base);
  const auto cell_dir = [&](const MatrixCell& cell) { return (fs::path(dir) / "cells" / cell.id).string(); };

  if (jobs <= 1) {
    for (const auto& cell : cells) {
      run_experiment(cell.config, cell_dir(cell), cell.id);
    }
  } else {
    std::fflush(nullptr);
    int running = 0;
    const auto reap = [&] {
      int status = 0;
      if (::wait(&status) > 0) {
        --running;
      }
    };
    for (const auto& cell : cells) {
      while (running >= jobs) {
        reap();
      }
      const pid_t pid = ::fork();
      if (pid < 0) {
        throw std::runtime_error("fork failed");
      }
      if (pid == 0) {
        int code = 0;
        try {
          run_experiment(cell.config, cell_dir(cell), cell.id);
        } catch (...) {
          code = 1;
        }
        std::fflush(nullptr);
        ::_exit(code);
      }
      ++running;
    }
    while (running > 0) {
      reap();
    }
  }

  std::vector<SummaryRow> rows;
  auto plot = open_out(fs::path(dir) / "plot.csv");
  plot << "cell_id,readout,jastrow_mode,domain,alpha,step,energy,stderr\n";
  for (const auto& cell : cells) {
    SummaryRow row = summary_row(cell.id, cell.config);
    const fs::path cd = cell_dir(cell);
    std::ifstream res(cd / "result.json");
    if (res) {
      try {
        row = row_from_json(json::parse(res));
      } catch (const std::exception& e) {
        row.nan_flag = true;
        row.diagnostic = std::string("unreadable result: ") + e.what();
      }
    } else {
      row.energy = std::numeric_limits<double>::quiet_NaN();
      row.stderr_ = std::numeric_limits<double>::quiet_NaN();
      row.nan_flag = true;
      row.diagnostic = "cell produced no result";
    }
    rows.push_back(row);
    std::ifstream metrics(cd / "metrics.jsonl");
    for (std::string line; std::getline(metrics, line);) {
      const auto j = json::parse(line, nullptr, false);
      if (j.is_discarded()) {
        continue;
      }
      plot << cell.id << ',' << row.readout << ',' << row.jastrow_mode << ',' << row.domain << ','
           << format_double(row.alpha) << ',' << j.at("step").get<int>() << ','
           << format_double(number_or_nan(j.at("energy"))) << ',' << format_double(number_or_nan(j.at("stderr")))
           << '\n';
    }
  }
  write_summary_csv((fs::path(dir) / "summary.csv").string(), rows);
  return rows;
}

std::vector<std::string> run_histograms(const RunConfig& c, const std::string& dir,
                                        const std::optional<std::vector<double>>& params) {
  write_resolved_config(dir, c);
  const auto eq = equilibrated(c, params, c.histogram_sweeps);
  const Ansatz ansatz(c.train.molecule, c.train.ansatz);
  std::vector<std::vector<SignedLog<double>>> per_walker(static_cast<std::size_t>(eq.walkers.walkers));
  parallel_for(eq.walkers.walkers, c.train.threads, [&](int w) {
    try {
      per_walker[static_cast<std::size_t>(w)] = ansatz.determinants(eq.walkers.walker(w), eq.params);
    } catch (const std::exception&) {
      // nodal sample, left out
    }
  });
  std::vector<SignedLog<double>> dets;
  for (const auto& v : per_walker) {
    dets.insert(dets.end(), v.begin(), v.end());
  }
  const double alpha =
      alpha_init(max_logdets(ansatz, eq.params, eq.walkers, c.train.threads), c.train.alpha_init_offset);
  std::vector<std::string> paths;
  for (auto d : c.histogram_domains) {
    const auto h = make_histogram(amplitude_values(dets, alpha, d), d, c.histogram_bins);
    const auto path = (fs::path(dir) / ("histogram_" + to_string(d) + ".csv")).string();
    write_histogram_csv(path, h);
    paths.push_back(path);
  }
  return paths;
}

std::vector<CuspPoint> run_cusp(const RunConfig& c, int nucleus, const std::string& dir,
                                const std::optional<std::vector<double>>& params) {
  if (nucleus < 0 || nucleus >= c.train.molecule.n_nuclei()) {
    throw std::out_of_range("nucleus " + std::to_string(nucleus) + " out of range for " + c.train.molecule.name);
  }
  write_resolved_config(dir, c);
  const auto eq = equilibrated(c, params, 0);
  const Ansatz ansatz(c.train.molecule, c.train.ansatz);
  const auto bg = eq.walkers.walker(0);
  const auto radii = log_radii(-1.0, -6.0, 26);
  const auto scan = cusp_scan(ansatz, eq.params, nucleus, {0.0, 0.0, 1.0}, radii, bg);
  auto out = open_out(fs::path(dir) / ("cusp_" + std::to_string(nucleus) + ".csv"));
  out << "radius,log_derivative,averaged,flagged\n";
  for (const auto& p : scan) {
    out << format_double(p.radius) << ',' << format_double(p.along) << ',' << format_double(p.averaged) << ','
        << (p.flagged ? 1 : 0) << '\n';
  }
  return scan;
}

} // namespace oddvmc
