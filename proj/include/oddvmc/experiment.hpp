#pragma once

// Experiment drivers behind the command line: single runs, the readout x
// Jastrow x domain x alpha matrix, amplitude histograms and cusp traces.
// Every output directory gets config.json (resolved) and config.sha1.

#include "oddvmc/config.hpp"
#include "oddvmc/hamiltonian.hpp"

#include <optional>
#include <string>
#include <vector>

namespace oddvmc {

struct SummaryRow {
  std::string cell_id;
  std::string system;
  std::string readout;
  std::string jastrow_mode;
  std::string domain;
  double alpha = 0.0; // alpha_init_offset of the cell
  double energy = 0.0;
  double stderr_ = 0.0;
  bool nan_flag = false;
  std::string diagnostic; // not part of summary.csv; kept in result.json
};

SummaryRow summary_row(const std::string& cell_id, const RunConfig& c);
void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary_csv(const std::string& path);

/// config.json + config.sha1 in `dir` (created if needed).
void write_resolved_config(const std::string& dir, const RunConfig& c);

struct RunOutcome {
  SummaryRow row;
  TrainResult result;
  std::string config_hash;
};

/// Trains and writes metrics.jsonl, summary.csv, checkpoint.json,
/// result.json, config.json, config.sha1 into `dir`. A diverged run is not an
/// exception; it comes back with nan_flag set.
RunOutcome run_experiment(const RunConfig& c, const std::string& dir, const std::string& cell_id = "run");

/// One config per matrix cell, in readout, jastrow, domain, alpha order.
struct MatrixCell {
  std::string id;
  RunConfig config;
};
std::vector<MatrixCell> matrix_cells(const RunConfig& base);

/// Runs every cell into dir/cells/<id>. jobs > 1 forks one process per cell,
/// at most `jobs` at a time. Failing cells are flagged, never fatal. Writes
/// dir/summary.csv and dir/plot.csv (long format: one row per cell and step).
std::vector<SummaryRow> run_matrix(const RunConfig& base, const std::string& dir, int jobs = 1);

/// Walkers equilibrated under psi^2, then histograms of the determinant
/// values phi_k(r) (all k, all walkers), one CSV per configured domain
/// (histogram_<domain>.csv). Linlog uses alpha = alpha_init of the samples'
/// max_k log|det| with the config's alpha_init_offset. Returns the paths.
std::vector<std::string> run_histograms(const RunConfig& c, const std::string& dir,
                                        const std::optional<std::vector<double>>& params = std::nullopt);

/// cusp_<nucleus>.csv over radii 1e-1 .. 1e-6 Bohr, other electrons at an
/// equilibrated walker. Returns the scan.
std::vector<CuspPoint> run_cusp(const RunConfig& c, int nucleus, const std::string& dir,
                                const std::optional<std::vector<double>>& params = std::nullopt);

} // namespace oddvmc
