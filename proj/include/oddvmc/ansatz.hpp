#pragma once

// Wave function ansatz: analytic orbitals -> K spin-factorised determinants
// -> optional linlog domain map -> readout (linear, implicit odd, explicit
// odd) -> optional Jastrow factor. Evaluated as sign and log|psi|, either as
// plain values, as coordinate jets (for the local energy), or on the adjoint
// tape (for parameter gradients).

#include "oddvmc/jet.hpp"
#include "oddvmc/molecule.hpp"
#include "oddvmc/signed_log.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oddvmc {

enum class OrbitalKind { gaussian, exponential };
enum class ReadoutKind { linear, implicit, explicit_odd };
enum class JastrowMode { none, standalone, symmetric_odd };
enum class Domain { linear, linlog };
enum class Spin { up, down };

std::string to_string(OrbitalKind k);
std::string to_string(ReadoutKind k);
std::string to_string(JastrowMode m);
std::string to_string(Domain d);
OrbitalKind parse_orbital_kind(std::string_view s);
ReadoutKind parse_readout_kind(std::string_view s);
JastrowMode parse_jastrow_mode(std::string_view s);
Domain parse_domain(std::string_view s);

/// Structure of an ansatz; the numbers live in a flat parameter vector
/// described by ParamLayout.
struct AnsatzSpec {
  OrbitalKind orbital_kind = OrbitalKind::gaussian;
  int primitives = 2; // per orbital and nucleus
  int determinants = 1;
  // Per determinant, indices into the orbital pool. Empty: the default
  // assignment (shared core plus one distinct top orbital per determinant).
  std::vector<std::vector<int>> up_orbitals;
  std::vector<std::vector<int>> down_orbitals;
  ReadoutKind readout = ReadoutKind::linear;
  JastrowMode jastrow = JastrowMode::none;
  Domain domain = Domain::linear;
  std::vector<int> odd_hidden{16, 16};
  std::vector<int> jastrow_hidden{16, 16};
  double exponent_min = 0.1;
  double exponent_max = 5.0;
  double init_alpha = 0.0;
};

/// Named contiguous blocks of the flat parameter vector. Matrices are
/// row-major (rows = fan-in).
class ParamLayout {
public:
  struct Block {
    std::string name;
    std::size_t offset = 0;
    int rows = 0;
    int cols = 0;
    std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
  };

  void add(std::string name, int rows, int cols);
  bool has(std::string_view name) const;
  const Block& at(std::string_view name) const;
  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t size() const { return size_; }

private:
  std::vector<Block> blocks_;
  std::size_t size_ = 0;
};

/// Which Jastrow head to read: the standalone scalar, the per-layer vector
/// J^(t) of the implicit readout, or the input/output gates of the explicit
/// readout.
struct JastrowSlot {
  enum class Kind { standalone, layer, gate_in, gate_out } kind = Kind::standalone;
  int layer = 0;
};

/// Head outputs of the Jastrow network; empty members mean "all ones" (or 0
/// for the standalone log-factor).
template <class T> struct JastrowHeads {
  std::vector<T> standalone;
  std::vector<std::vector<T>> layers;
  std::vector<T> gate_in;
  std::vector<T> gate_out;
};

/// Offsets of every block the evaluator reads; npos when absent.
struct ParamOffsets {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t coeff = npos;
  std::size_t log_exponent = npos;
  std::size_t det_weight = npos;
  std::size_t alpha = npos;
  std::vector<int> readout_widths; // output width of each readout layer
  std::vector<std::size_t> readout_w;
  std::vector<std::size_t> readout_b; // explicit readout only
  std::vector<int> trunk_widths;
  std::vector<std::size_t> trunk_w;
  std::vector<std::size_t> trunk_b;
  int trunk_out = 0;
  std::size_t standalone_w = npos, standalone_b = npos;
  std::vector<std::size_t> layer_w, layer_b;
  std::size_t gate_in_w = npos, gate_in_b = npos;
  std::size_t gate_out_w = npos, gate_out_b = npos;
};

class Ansatz {
public:
  Ansatz(Molecule molecule, AnsatzSpec spec);

  const Molecule& molecule() const { return molecule_; }
  const AnsatzSpec& spec() const { return spec_; }
  const ParamLayout& layout() const { return layout_; }
  const ParamOffsets& offsets() const { return offsets_; }
  int n_electrons() const { return molecule_.n_electrons(); }
  int dim() const { return 3 * molecule_.n_electrons(); }
  int n_orbitals() const { return n_orbitals_; }
  const std::vector<int>& orbital_set(int det, Spin spin) const;
  /// Widths of the implicit readout layers' outputs (last is 1).
  std::vector<int> implicit_widths() const;

  std::vector<double> init_params(std::uint64_t seed) const;
  double alpha(std::span<const double> params) const;
  void set_alpha(std::span<double> params, double alpha) const;

  SignedLog<double> log_psi(std::span<const double> r, std::span<const double> params) const;
  SignedLog<float> log_psi(std::span<const double> r, std::span<const float> params) const;
  /// Extended-precision path; positions in long double too so that finite
  /// differences of small steps stay accurate.
  SignedLog<long double> log_psi(std::span<const long double> r, std::span<const long double> params) const;

  /// log|psi| with gradient and Laplacian in the electron coordinates.
  SignedLogJet log_psi_jet(std::span<const double> r, std::span<const double> params) const;
  SignedLog<BasicJet<float>> log_psi_jet(std::span<const double> r, std::span<const float> params) const;

  /// d log|psi| / d params via the adjoint tape. Throws SingularEvaluation
  /// on a nodal configuration.
  std::vector<double> grad_log_psi(std::span<const double> r, std::span<const double> params,
                                   SignedLog<double>* value = nullptr) const;

  /// Orbital matrix phi_j(r_i) of one spin block of determinant `det`.
  JetMatrix orbital_matrix(std::span<const double> r, std::span<const double> params, Spin spin,
                           int det = 0) const;
  std::vector<SignedLogJet> determinants_jet(std::span<const double> r, std::span<const double> params) const;
  std::vector<SignedLog<double>> determinants(std::span<const double> r, std::span<const double> params) const;

  std::vector<Jet> jastrow_jet(std::span<const double> r, std::span<const double> params, JastrowSlot slot) const;
  JastrowHeads<double> jastrow_heads(std::span<const double> r, std::span<const double> params) const;

  /// Readout stage alone: combines given determinant values with given
  /// Jastrow heads into sign and log|psi|.
  SignedLog<double> combine(std::span<const SignedLog<double>> dets, const JastrowHeads<double>& heads,
                            std::span<const double> params) const;

  /// Scalar readout output (readout domain, before any inverse map) for
  /// plain signed determinant values x.
  double readout_value(std::span<const double> x, const JastrowHeads<double>& heads,
                       std::span<const double> params) const;

private:
  Molecule molecule_;
  AnsatzSpec spec_;
  ParamLayout layout_;
  ParamOffsets offsets_;
  int n_orbitals_ = 0;
  std::vector<std::vector<int>> up_sets_;
  std::vector<std::vector<int>> down_sets_;
};

/// Throws ShapeError unless r holds 3N finite coordinates.
void check_positions(const Ansatz& ansatz, std::span<const double> r);

} // namespace oddvmc
