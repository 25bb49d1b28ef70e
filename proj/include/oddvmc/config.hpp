#pragma once

// Run configuration files (JSON with a schema version), content hashes and
// checkpoints.

#include "oddvmc/trainer.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace oddvmc {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kCheckpointVersion = 1;

enum class Precision { single, double_ };
std::string to_string(Precision p);
Precision parse_precision(const std::string& s);

/// Axes of an experiment matrix. Each cell overrides readout, Jastrow mode,
/// domain and alpha_init_offset of the base config.
struct MatrixAxes {
  std::vector<ReadoutKind> readout;
  std::vector<JastrowMode> jastrow;
  std::vector<Domain> domain;
  std::vector<double> alpha;
  std::size_t cells() const { return readout.size() * jastrow.size() * domain.size() * alpha.size(); }
};

struct RunConfig {
  TrainConfig train;
  std::string output_dir = "out";
  MatrixAxes matrix; // empty unless the file has a "matrix" section
  std::vector<HistogramDomain> histogram_domains{HistogramDomain::log, HistogramDomain::linear,
                                                 HistogramDomain::linlog};
  int histogram_bins = 60;
  int histogram_sweeps = 200; // equilibration sweeps before histogramming

  Precision precision() const { return train.single_precision ? Precision::single : Precision::double_; }
};

/// Validates every field before anything runs. Unknown keys, wrong types and
/// out-of-range values throw ConfigError naming the path (e.g.
/// "ansatz.odd_hidden[1]").
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

/// Fully resolved form: presets expanded to geometry, every default written
/// out. parse_run_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& c);

/// git-style blob hash: sha1("blob <len>\0" + content), lowercase hex.
std::string git_blob_sha1(const std::string& content);

/// Hash of the resolved config without fields that cannot change the
/// numbers (output directory, thread count).
std::string config_hash(const RunConfig& c);

struct Checkpoint {
  std::string config_hash;
  std::vector<double> params;
  double alpha = 0.0;
  double energy = 0.0;
  double stderr_ = 0.0;
  int steps = 0;
};

void write_checkpoint(const std::string& path, const Checkpoint& ck);
/// Throws ConfigError on a wrong format or version.
Checkpoint read_checkpoint(const std::string& path);

} // namespace oddvmc
