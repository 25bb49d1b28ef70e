#include "oddvmc/ansatz.hpp"

#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace oddvmc {

std::string to_string(OrbitalKind k) { return k == OrbitalKind::gaussian ? "gaussian" : "exponential"; }

std::string to_string(ReadoutKind k) {
  switch (k) {
  case ReadoutKind::linear:
    return "linear";
  case ReadoutKind::implicit:
    return "implicit";
  case ReadoutKind::explicit_odd:
    return "explicit";
  }
  return "?";
}

std::string to_string(JastrowMode m) {
  switch (m) {
  case JastrowMode::none:
    return "none";
  case JastrowMode::standalone:
    return "standalone";
  case JastrowMode::symmetric_odd:
    return "symmetric-odd";
  }
  return "?";
}

std::string to_string(Domain d) { return d == Domain::linear ? "linear" : "linlog"; }

OrbitalKind parse_orbital_kind(std::string_view s) {
  if (s == "gaussian") {
    return OrbitalKind::gaussian;
  }
  if (s == "exponential") {
    return OrbitalKind::exponential;
  }
  throw std::invalid_argument("unknown orbital kind '" + std::string(s) + "'");
}

ReadoutKind parse_readout_kind(std::string_view s) {
  if (s == "linear") {
    return ReadoutKind::linear;
  }
  if (s == "implicit") {
    return ReadoutKind::implicit;
  }
  if (s == "explicit") {
    return ReadoutKind::explicit_odd;
  }
  throw std::invalid_argument("unknown readout '" + std::string(s) + "'");
}

JastrowMode parse_jastrow_mode(std::string_view s) {
  if (s == "none") {
    return JastrowMode::none;
  }
  if (s == "standalone") {
    return JastrowMode::standalone;
  }
  if (s == "symmetric-odd") {
    return JastrowMode::symmetric_odd;
  }
  throw std::invalid_argument("unknown jastrow mode '" + std::string(s) + "'");
}

Domain parse_domain(std::string_view s) {
  if (s == "linear") {
    return Domain::linear;
  }
  if (s == "linlog") {
    return Domain::linlog;
  }
  throw std::invalid_argument("unknown domain '" + std::string(s) + "'");
}

void ParamLayout::add(std::string name, int rows, int cols) {
  if (has(name)) {
    throw std::logic_error("duplicate parameter block " + name);
  }
  Block b{std::move(name), size_, rows, cols};
  size_ += b.size();
  blocks_.push_back(std::move(b));
}

bool ParamLayout::has(std::string_view name) const {
  return std::any_of(blocks_.begin(), blocks_.end(), [&](const Block& b) { return b.name == name; });
}

const ParamLayout::Block& ParamLayout::at(std::string_view name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) {
      return b;
    }
  }
  throw std::out_of_range("no parameter block " + std::string(name));
}

namespace {

std::vector<int> default_set(int n_spin, int det) {
  std::vector<int> set;
  for (int i = 0; i + 1 < n_spin; ++i) {
    set.push_back(i);
  }
  if (n_spin > 0) {
    set.push_back(n_spin - 1 + det);
  }
  return set;
}

void check_sets(const std::vector<std::vector<int>>& sets, int k, int n_spin, const char* what) {
  if (static_cast<int>(sets.size()) != k) {
    throw std::invalid_argument(std::string(what) + " orbital sets must list one set per determinant");
  }
  for (const auto& s : sets) {
    if (static_cast<int>(s.size()) != n_spin) {
      throw std::invalid_argument(std::string(what) + " orbital set size must equal the electron count");
    }
    for (int j : s) {
      if (j < 0) {
        throw std::invalid_argument("orbital indices must be non-negative");
      }
    }
  }
}

} // namespace

Ansatz::Ansatz(Molecule molecule, AnsatzSpec spec) : molecule_(std::move(molecule)), spec_(std::move(spec)) {
  molecule_.validate();
  if (dim() > kMaxJetDim) {
    throw std::invalid_argument("at most " + std::to_string(kMaxJetDim / 3) + " electrons are supported");
  }
  const int k_count = spec_.determinants;
  if (k_count < 1) {
    throw std::invalid_argument("need at least one determinant");
  }
  if (spec_.primitives < 1) {
    throw std::invalid_argument("need at least one primitive per orbital and nucleus");
  }
  if (!(spec_.exponent_min > 0.0) || spec_.exponent_max < spec_.exponent_min) {
    throw std::invalid_argument("exponent range must satisfy 0 < min <= max");
  }
  for (int w : spec_.odd_hidden) {
    if (w < 1) {
      throw std::invalid_argument("readout hidden widths must be positive");
    }
  }
  for (int w : spec_.jastrow_hidden) {
    if (w < 1) {
      throw std::invalid_argument("jastrow hidden widths must be positive");
    }
  }

  const int n_up = molecule_.n_up;
  const int n_down = molecule_.n_down;
  if (spec_.up_orbitals.empty() && spec_.down_orbitals.empty()) {
    for (int k = 0; k < k_count; ++k) {
      up_sets_.push_back(default_set(n_up, k));
      down_sets_.push_back(default_set(n_down, k));
    }
  } else {
    check_sets(spec_.up_orbitals, k_count, n_up, "up");
    check_sets(spec_.down_orbitals, k_count, n_down, "down");
    up_sets_ = spec_.up_orbitals;
    down_sets_ = spec_.down_orbitals;
  }
  n_orbitals_ = 1;
  for (const auto* sets : {&up_sets_, &down_sets_}) {
    for (const auto& s : *sets) {
      for (int j : s) {
        n_orbitals_ = std::max(n_orbitals_, j + 1);
      }
    }
  }

  const int m_count = molecule_.n_nuclei();
  auto& o = offsets_;
  auto add = [&](const std::string& name, int rows, int cols) {
    layout_.add(name, rows, cols);
    return layout_.at(name).offset;
  };
  o.coeff = add("orbital.coeff", n_orbitals_, m_count * spec_.primitives);
  o.log_exponent = add("orbital.log_exponent", n_orbitals_, m_count * spec_.primitives);

  switch (spec_.readout) {
  case ReadoutKind::linear:
    o.det_weight = add("det.weight", 1, k_count);
    break;
  case ReadoutKind::implicit:
  case ReadoutKind::explicit_odd: {
    const bool expl = spec_.readout == ReadoutKind::explicit_odd;
    o.readout_widths = spec_.odd_hidden;
    o.readout_widths.push_back(1);
    int in = k_count;
    for (std::size_t t = 0; t < o.readout_widths.size(); ++t) {
      const int out = o.readout_widths[t];
      const std::string base = expl ? "explicit." : "implicit.";
      o.readout_w.push_back(add(base + "W" + std::to_string(t), in, out));
      if (expl) {
        o.readout_b.push_back(add(base + "b" + std::to_string(t), 1, out));
      }
      in = out;
    }
    break;
  }
  }

  if (spec_.jastrow != JastrowMode::none) {
    int in = 4 * m_count;
    for (std::size_t l = 0; l < spec_.jastrow_hidden.size(); ++l) {
      const int out = spec_.jastrow_hidden[l];
      o.trunk_widths.push_back(out);
      o.trunk_w.push_back(add("jastrow.W" + std::to_string(l), in, out));
      o.trunk_b.push_back(add("jastrow.b" + std::to_string(l), 1, out));
      in = out;
    }
    o.trunk_out = in;
    if (spec_.jastrow == JastrowMode::standalone) {
      o.standalone_w = add("jastrow.standalone.W", in, 1);
      o.standalone_b = add("jastrow.standalone.b", 1, 1);
    } else {
      switch (spec_.readout) {
      case ReadoutKind::implicit:
        for (std::size_t t = 0; t < o.readout_widths.size(); ++t) {
          o.layer_w.push_back(add("jastrow.layer" + std::to_string(t) + ".W", in, o.readout_widths[t]));
          o.layer_b.push_back(add("jastrow.layer" + std::to_string(t) + ".b", 1, o.readout_widths[t]));
        }
        break;
      case ReadoutKind::explicit_odd:
        o.gate_in_w = add("jastrow.gate_in.W", in, k_count);
        o.gate_in_b = add("jastrow.gate_in.b", 1, k_count);
        [[fallthrough]];
      case ReadoutKind::linear:
        o.gate_out_w = add("jastrow.gate_out.W", in, 1);
        o.gate_out_b = add("jastrow.gate_out.b", 1, 1);
        break;
      }
    }
  }
  o.alpha = add("alpha", 1, 1);
}

const std::vector<int>& Ansatz::orbital_set(int det, Spin spin) const {
  return spin == Spin::up ? up_sets_.at(static_cast<std::size_t>(det)) : down_sets_.at(static_cast<std::size_t>(det));
}

std::vector<int> Ansatz::implicit_widths() const { return offsets_.readout_widths; }

std::vector<double> Ansatz::init_params(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> p(layout_.size(), 0.0);

  const int per_orbital = spec_.primitives;
  const int n_exp = n_orbitals_ * per_orbital;
  // Log-uniform grid, most compact first: orbital 0 is the shared core.
  auto grid_exponent = [&](int q) {
    if (n_exp == 1) {
      return std::sqrt(spec_.exponent_min * spec_.exponent_max);
    }
    const double t = static_cast<double>(q) / static_cast<double>(n_exp - 1);
    return spec_.exponent_max * std::pow(spec_.exponent_min / spec_.exponent_max, t);
  };

  for (const auto& b : layout_.blocks()) {
    double* v = p.data() + b.offset;
    const double fan_in = static_cast<double>(b.rows);
    const bool head = b.name.rfind("jastrow.standalone", 0) == 0 || b.name.rfind("jastrow.layer", 0) == 0 ||
                      b.name.rfind("jastrow.gate", 0) == 0;
    const bool bias = b.name.size() > 2 && b.name.substr(b.name.size() - 2) == ".b";
    if (b.name == "orbital.coeff") {
      for (std::size_t i = 0; i < b.size(); ++i) {
        v[i] = 1.0 + 0.1 * normal(rng);
      }
    } else if (b.name == "orbital.log_exponent") {
      const int cols = b.cols; // nuclei x primitives
      for (int j = 0; j < b.rows; ++j) {
        for (int c = 0; c < cols; ++c) {
          const int prim = c % per_orbital;
          v[j * cols + c] = std::log(grid_exponent(j * per_orbital + prim));
        }
      }
    } else if (b.name == "det.weight") {
      std::fill(v, v + b.size(), 1.0 / static_cast<double>(spec_.determinants));
    } else if (b.name == "alpha") {
      v[0] = spec_.init_alpha;
    } else if (bias) {
      const double fill = head && b.name != "jastrow.standalone.b" ? 1.0 : 0.0;
      std::fill(v, v + b.size(), fill);
    } else {
      const double scale = (head ? 0.1 : 1.0) / std::sqrt(fan_in);
      for (std::size_t i = 0; i < b.size(); ++i) {
        v[i] = scale * normal(rng);
      }
    }
  }
  return p;
}

double Ansatz::alpha(std::span<const double> params) const { return params[offsets_.alpha]; }

void Ansatz::set_alpha(std::span<double> params, double alpha) const { params[offsets_.alpha] = alpha; }

void check_positions(const Ansatz& ansatz, std::span<const double> r) {
  if (static_cast<int>(r.size()) != ansatz.dim()) {
    throw ShapeError("expected " + std::to_string(ansatz.dim()) + " coordinates, got " + std::to_string(r.size()));
  }
  for (double x : r) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("non-finite electron coordinate");
    }
  }
}

namespace {

void check_params(const Ansatz& a, std::size_t n) {
  if (n != a.layout().size()) {
    throw ShapeError("expected " + std::to_string(a.layout().size()) + " parameters, got " + std::to_string(n));
  }
}

template <std::floating_point R>
SignedLog<R> value_path(const Ansatz& a, std::span<const double> r, std::span<const R> params) {
  check_positions(a, r);
  check_params(a, params.size());
  if constexpr (std::is_same_v<R, double>) {
    return detail::Pipeline<double, double>(a, params).log_psi(r);
  } else {
    std::vector<R> x(r.begin(), r.end());
    return detail::Pipeline<R, R>(a, params).log_psi(std::span<const R>(x));
  }
}

template <std::floating_point R> std::vector<BasicJet<R>> seed(std::span<const double> r) {
  const int dim = static_cast<int>(r.size());
  std::vector<BasicJet<R>> x;
  x.reserve(r.size());
  for (int i = 0; i < dim; ++i) {
    x.push_back(BasicJet<R>::variable(static_cast<R>(r[static_cast<std::size_t>(i)]), dim, i));
  }
  return x;
}

} // namespace

SignedLog<double> Ansatz::log_psi(std::span<const double> r, std::span<const double> params) const {
  return value_path(*this, r, params);
}

SignedLog<float> Ansatz::log_psi(std::span<const double> r, std::span<const float> params) const {
  return value_path(*this, r, params);
}

SignedLog<long double> Ansatz::log_psi(std::span<const long double> r, std::span<const long double> params) const {
  if (static_cast<int>(r.size()) != dim()) {
    throw ShapeError("expected " + std::to_string(dim()) + " coordinates, got " + std::to_string(r.size()));
  }
  check_params(*this, params.size());
  return detail::Pipeline<long double, long double>(*this, params).log_psi(r);
}

SignedLogJet Ansatz::log_psi_jet(std::span<const double> r, std::span<const double> params) const {
  check_positions(*this, r);
  check_params(*this, params.size());
  const auto x = seed<double>(r);
  return detail::Pipeline<Jet, double>(*this, params).log_psi(x);
}

SignedLog<BasicJet<float>> Ansatz::log_psi_jet(std::span<const double> r, std::span<const float> params) const {
  check_positions(*this, r);
  check_params(*this, params.size());
  const auto x = seed<float>(r);
  return detail::Pipeline<BasicJet<float>, float>(*this, params).log_psi(x);
}

std::vector<double> Ansatz::grad_log_psi(std::span<const double> r, std::span<const double> params,
                                         SignedLog<double>* value) const {
  check_positions(*this, r);
  check_params(*this, params.size());
  AdjointSession session(params);
  std::vector<Var> x(r.begin(), r.end());
  const auto out = detail::Pipeline<Var, Var>(*this, session.leaves()).log_psi(std::span<const Var>(x));
  if (out.is_zero()) {
    throw SingularEvaluation("parameter gradient requested on a nodal configuration");
  }
  if (value != nullptr) {
    *value = SignedLog<double>{out.sign, out.logabs.value};
  }
  return session.gradient(out.logabs);
}

JetMatrix Ansatz::orbital_matrix(std::span<const double> r, std::span<const double> params, Spin spin,
                                 int det) const {
  check_positions(*this, r);
  check_params(*this, params.size());
  const auto x = seed<double>(r);
  detail::Pipeline<Jet, double> pipe(*this, params);
  const auto table = pipe.orbitals(x);
  const int n = spin == Spin::up ? molecule_.n_up : molecule_.n_down;
  JetMatrix m(n, n);
  m.entries = pipe.block_matrix(table, det, spin);
  return m;
}

std::vector<SignedLogJet> Ansatz::determinants_jet(std::span<const double> r, std::span<const double> params) const {
  check_positions(*this, r);
  check_params(*this, params.size());
  const auto x = seed<double>(r);
  detail::Pipeline<Jet, double> pipe(*this, params);
  return pipe.determinants(pipe.orbitals(x));
}

std::vector<SignedLog<double>> Ansatz::determinants(std::span<const double> r, std::span<const double> params) const {
  check_positions(*this, r);
  check_params(*this, params.size());
  detail::Pipeline<double, double> pipe(*this, params);
  return pipe.determinants(pipe.orbitals(r));
}

std::vector<Jet> Ansatz::jastrow_jet(std::span<const double> r, std::span<const double> params,
                                     JastrowSlot slot) const {
  check_positions(*this, r);
  check_params(*this, params.size());
  const auto x = seed<double>(r);
  auto heads = detail::Pipeline<Jet, double>(*this, params).heads(x);
  std::vector<Jet>* out = nullptr;
  switch (slot.kind) {
  case JastrowSlot::Kind::standalone:
    out = &heads.standalone;
    break;
  case JastrowSlot::Kind::layer:
    if (slot.layer >= 0 && slot.layer < static_cast<int>(heads.layers.size())) {
      out = &heads.layers[static_cast<std::size_t>(slot.layer)];
    }
    break;
  case JastrowSlot::Kind::gate_in:
    out = &heads.gate_in;
    break;
  case JastrowSlot::Kind::gate_out:
    out = &heads.gate_out;
    break;
  }
  if (out == nullptr || out->empty()) {
    throw std::invalid_argument("this ansatz has no such Jastrow head");
  }
  return std::move(*out);
}

JastrowHeads<double> Ansatz::jastrow_heads(std::span<const double> r, std::span<const double> params) const {
  check_positions(*this, r);
  check_params(*this, params.size());
  return detail::Pipeline<double, double>(*this, params).heads(r);
}

SignedLog<double> Ansatz::combine(std::span<const SignedLog<double>> dets, const JastrowHeads<double>& heads,
                                  std::span<const double> params) const {
  check_params(*this, params.size());
  if (static_cast<int>(dets.size()) != spec_.determinants) {
    throw ShapeError("expected one value per determinant");
  }
  const std::vector<SignedLog<double>> d(dets.begin(), dets.end());
  return detail::Pipeline<double, double>(*this, params).combine(d, heads);
}

double Ansatz::readout_value(std::span<const double> x, const JastrowHeads<double>& heads,
                             std::span<const double> params) const {
  check_params(*this, params.size());
  if (static_cast<int>(x.size()) != spec_.determinants) {
    throw ShapeError("expected one value per determinant");
  }
  std::vector<SignedLog<double>> d;
  d.reserve(x.size());
  for (double v : x) {
    d.push_back(detail::to_signed(v));
  }
  return detail::Pipeline<double, double>(*this, params).readout_value(d, heads);
}

} // namespace oddvmc
