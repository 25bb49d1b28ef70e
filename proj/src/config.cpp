#include "oddvmc/config.hpp"

#include "oddvmc/errors.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace oddvmc {

using nlohmann::json;

std::string to_string(Precision p) { return p == Precision::single ? "single" : "double"; }

Precision parse_precision(const std::string& s) {
  if (s == "single") {
    return Precision::single;
  }
  if (s == "double") {
    return Precision::double_;
  }
  throw std::invalid_argument("precision must be 'single' or 'double', got '" + s + "'");
}

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) {
    throw ConfigError(path, "expected a number");
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    throw ConfigError(path, "must be finite");
  }
  return v;
}

long long as_integer(const json& j, const std::string& path, long long lo, long long hi) {
  if (!j.is_number_integer()) {
    throw ConfigError(path, "expected an integer");
  }
  const long long v = j.get<long long>();
  if (v < lo || v > hi) {
    std::ostringstream os;
    os << "must be in [" << lo << ", " << hi << "], got " << v;
    throw ConfigError(path, os.str());
  }
  return v;
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) {
    throw ConfigError(path, "expected a string");
  }
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) {
    throw ConfigError(path, "expected true or false");
  }
  return j.get<bool>();
}

const json& as_array(const json& j, const std::string& path, bool allow_empty) {
  if (!j.is_array()) {
    throw ConfigError(path, "expected an array");
  }
  if (!allow_empty && j.empty()) {
    throw ConfigError(path, "must not be empty");
  }
  return j;
}

// Enum parsers throw std::invalid_argument; rethrow with the path.
template <class F> auto named(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
}

// Object reader that remembers which keys were consumed; finish() rejects
// the rest.
class Section {
public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string at(const std::string& key) const { return join(path_, key); }

  void number(const std::string& key, double& out) {
    if (const auto* v = find(key)) {
      out = as_number(*v, at(key));
    }
  }
  void positive(const std::string& key, double& out) {
    if (const auto* v = find(key)) {
      out = as_number(*v, at(key));
      if (!(out > 0.0)) {
        throw ConfigError(at(key), "must be positive");
      }
    }
  }
  void integer(const std::string& key, int& out, long long lo, long long hi = std::numeric_limits<int>::max()) {
    if (const auto* v = find(key)) {
      out = static_cast<int>(as_integer(*v, at(key), lo, hi));
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const auto* v = find(key)) {
      out = as_bool(*v, at(key));
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const auto* v = find(key)) {
      out = as_string(*v, at(key));
    }
  }
  template <class E, class P> void enumeration(const std::string& key, E& out, P parse) {
    if (const auto* v = find(key)) {
      const auto s = as_string(*v, at(key));
      out = named(at(key), [&] { return parse(s); });
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ConfigError(join(path_, it.key()), "unknown key");
      }
    }
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<int> int_list(const json& j, const std::string& path, bool allow_empty, int lo) {
  std::vector<int> out;
  const auto& a = as_array(j, path, allow_empty);
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.push_back(static_cast<int>(as_integer(a[i], index(path, i), lo, std::numeric_limits<int>::max())));
  }
  return out;
}

template <class E, class P> std::vector<E> enum_list(const json& j, const std::string& path, P parse) {
  std::vector<E> out;
  const auto& a = as_array(j, path, false);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto s = as_string(a[i], index(path, i));
    out.push_back(named(index(path, i), [&] { return parse(s); }));
  }
  return out;
}

Molecule parse_molecule(const json& j, const std::string& path) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    return named(path, [&] { return molecule_preset(name); });
  }
  Section s(j, path);
  Molecule m;
  if (const auto* p = s.find("preset")) {
    const auto name = as_string(*p, s.at("preset"));
    m = named(s.at("preset"), [&] { return molecule_preset(name); });
    s.finish();
    return m;
  }
  s.string("name", m.name);
  const auto* nuclei = s.find("nuclei");
  if (!nuclei) {
    throw ConfigError(s.at("nuclei"), "required (or give a preset)");
  }
  const auto& arr = as_array(*nuclei, s.at("nuclei"), false);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto np = index(s.at("nuclei"), i);
    Section n(arr[i], np);
    Nucleus nuc;
    const auto* pos = n.find("position");
    if (!pos) {
      throw ConfigError(n.at("position"), "required");
    }
    const auto& pa = as_array(*pos, n.at("position"), false);
    if (pa.size() != 3) {
      throw ConfigError(n.at("position"), "needs exactly 3 coordinates");
    }
    for (std::size_t k = 0; k < 3; ++k) {
      nuc.position[k] = as_number(pa[k], index(n.at("position"), k));
    }
    if (!n.find("charge")) {
      throw ConfigError(n.at("charge"), "required");
    }
    n.positive("charge", nuc.charge);
    n.finish();
    m.nuclei.push_back(nuc);
  }
  if (!s.find("n_up") || !s.find("n_down")) {
    throw ConfigError(path, "n_up and n_down are required with inline geometry");
  }
  s.integer("n_up", m.n_up, 0);
  s.integer("n_down", m.n_down, 0);
  s.finish();
  named(path, [&] {
    m.validate();
    return 0;
  });
  return m;
}

void parse_ansatz(const json& j, const std::string& path, AnsatzSpec& a) {
  Section s(j, path);
  s.enumeration("orbital_kind", a.orbital_kind, parse_orbital_kind);
  s.integer("primitives", a.primitives, 1);
  s.integer("determinants", a.determinants, 1);
  s.enumeration("readout", a.readout, parse_readout_kind);
  s.enumeration("jastrow_mode", a.jastrow, parse_jastrow_mode);
  s.enumeration("domain", a.domain, parse_domain);
  if (const auto* v = s.find("odd_hidden")) {
    a.odd_hidden = int_list(*v, s.at("odd_hidden"), true, 1);
  }
  if (const auto* v = s.find("jastrow_hidden")) {
    a.jastrow_hidden = int_list(*v, s.at("jastrow_hidden"), true, 1);
  }
  s.positive("exponent_min", a.exponent_min);
  s.positive("exponent_max", a.exponent_max);
  if (a.exponent_max < a.exponent_min) {
    throw ConfigError(s.at("exponent_max"), "must not be below exponent_min");
  }
  for (const char* key : {"up_orbitals", "down_orbitals"}) {
    if (const auto* v = s.find(key)) {
      auto& dst = std::string(key) == "up_orbitals" ? a.up_orbitals : a.down_orbitals;
      dst.clear();
      const auto& arr = as_array(*v, s.at(key), true);
      for (std::size_t i = 0; i < arr.size(); ++i) {
        dst.push_back(int_list(arr[i], index(s.at(key), i), true, 0));
      }
    }
  }
  s.finish();
}

void parse_optimizer(const json& j, const std::string& path, AdamConfig& o) {
  Section s(j, path);
  s.positive("base_lr", o.base_lr);
  s.positive("multiplier", o.multiplier);
  s.positive("decay_steps", o.decay_steps);
  s.number("beta1", o.beta1);
  s.number("beta2", o.beta2);
  s.positive("eps", o.eps);
  for (const char* key : {"beta1", "beta2"}) {
    const double b = std::string(key) == "beta1" ? o.beta1 : o.beta2;
    if (b < 0.0 || b >= 1.0) {
      throw ConfigError(s.at(key), "must be in [0, 1)");
    }
  }
  s.finish();
}

void parse_matrix(const json& j, const std::string& path, MatrixAxes& m) {
  Section s(j, path);
  const auto need = [&](const char* key) -> const json& {
    const auto* v = s.find(key);
    if (!v) {
      throw ConfigError(s.at(key), "required");
    }
    return *v;
  };
  m.readout = enum_list<ReadoutKind>(need("readout"), s.at("readout"), parse_readout_kind);
  m.jastrow = enum_list<JastrowMode>(need("jastrow_mode"), s.at("jastrow_mode"), parse_jastrow_mode);
  m.domain = enum_list<Domain>(need("domain"), s.at("domain"), parse_domain);
  const auto& al = as_array(need("alpha"), s.at("alpha"), false);
  m.alpha.clear();
  for (std::size_t i = 0; i < al.size(); ++i) {
    m.alpha.push_back(as_number(al[i], index(s.at("alpha"), i)));
  }
  s.finish();
}

void parse_histogram(const json& j, const std::string& path, RunConfig& c) {
  Section s(j, path);
  if (const auto* v = s.find("domains")) {
    c.histogram_domains =
        enum_list<HistogramDomain>(*v, s.at("domains"), [](const std::string& x) { return parse_histogram_domain(x); });
  }
  s.integer("bins", c.histogram_bins, 2);
  s.integer("sweeps", c.histogram_sweeps, 0);
  s.finish();
}

} // namespace

RunConfig parse_run_config(const json& j) {
  Section s(j, "");
  const auto* ver = s.find("schema_version");
  if (!ver) {
    throw ConfigError("schema_version", "required");
  }
  as_integer(*ver, "schema_version", kConfigSchemaVersion, kConfigSchemaVersion);

  RunConfig c;
  auto& t = c.train;
  const auto* mol = s.find("molecule");
  if (!mol) {
    throw ConfigError("molecule", "required");
  }
  t.molecule = parse_molecule(*mol, "molecule");
  if (const auto* v = s.find("ansatz")) {
    parse_ansatz(*v, "ansatz", t.ansatz);
  }
  if (const auto* v = s.find("optimizer")) {
    parse_optimizer(*v, "optimizer", t.adam);
  }
  s.integer("batch", t.batch, 2);
  s.integer("mcmc_steps", t.mcmc_steps, 1);
  s.integer("burn_in", t.burn_in, 0);
  s.integer("adapt_interval", t.adapt_interval, 1);
  s.integer("steps", t.steps, 0);
  s.integer("eval_steps", t.eval_steps, 0);
  s.integer("block_size", t.block_size, 1);
  s.integer("max_bad_steps", t.max_bad_steps, 0);
  s.integer("threads", t.threads, 1, 1024);
  if (const auto* v = s.find("seed")) {
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
      throw ConfigError("seed", "expected a non-negative integer");
    }
    t.seed = v->get<std::uint64_t>();
  }
  if (const auto* v = s.find("precision")) {
    const auto p = named("precision", [&] { return parse_precision(as_string(*v, "precision")); });
    t.single_precision = p == Precision::single;
  }
  s.number("alpha_init_offset", t.alpha_init_offset);
  s.boolean("alpha_from_probe", t.alpha_from_probe);
  s.boolean("train_alpha", t.train_alpha);
  s.positive("initial_sigma", t.initial_sigma);
  s.number("final_fraction", t.final_fraction);
  if (t.final_fraction <= 0.0 || t.final_fraction > 1.0) {
    throw ConfigError("final_fraction", "must be in (0, 1]");
  }
  if (const auto* v = s.find("clip")) {
    Section cl(*v, "clip");
    cl.positive("width", t.clip_width);
    cl.enumeration("scale", t.clip_scale, parse_clip_scale);
    cl.finish();
  }
  s.string("output_dir", c.output_dir);
  if (const auto* v = s.find("matrix")) {
    parse_matrix(*v, "matrix", c.matrix);
  }
  if (const auto* v = s.find("histogram")) {
    parse_histogram(*v, "histogram", c);
  }
  s.finish();

  // structural problems (orbital shortage, bad index lists) surface here
  named("ansatz", [&] {
    Ansatz probe(t.molecule, t.ansatz);
    return probe.layout().size();
  });
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path, "cannot open config file");
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("not valid JSON: ") + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& c) {
  const auto& t = c.train;
  json nuclei = json::array();
  for (const auto& n : t.molecule.nuclei) {
    nuclei.push_back({{"position", n.position}, {"charge", n.charge}});
  }
  const auto& a = t.ansatz;
  json j = {
      {"schema_version", kConfigSchemaVersion},
      {"molecule", {{"name", t.molecule.name}, {"nuclei", nuclei}, {"n_up", t.molecule.n_up}, {"n_down", t.molecule.n_down}}},
      {"ansatz",
       {{"orbital_kind", to_string(a.orbital_kind)},
        {"primitives", a.primitives},
        {"determinants", a.determinants},
        {"readout", to_string(a.readout)},
        {"jastrow_mode", to_string(a.jastrow)},
        {"domain", to_string(a.domain)},
        {"odd_hidden", a.odd_hidden},
        {"jastrow_hidden", a.jastrow_hidden},
        {"exponent_min", a.exponent_min},
        {"exponent_max", a.exponent_max},
        {"up_orbitals", a.up_orbitals},
        {"down_orbitals", a.down_orbitals}}},
      {"optimizer",
       {{"base_lr", t.adam.base_lr},
        {"multiplier", t.adam.multiplier},
        {"decay_steps", t.adam.decay_steps},
        {"beta1", t.adam.beta1},
        {"beta2", t.adam.beta2},
        {"eps", t.adam.eps}}},
      {"batch", t.batch},
      {"mcmc_steps", t.mcmc_steps},
      {"burn_in", t.burn_in},
      {"adapt_interval", t.adapt_interval},
      {"steps", t.steps},
      {"eval_steps", t.eval_steps},
      {"block_size", t.block_size},
      {"max_bad_steps", t.max_bad_steps},
      {"threads", t.threads},
      {"seed", t.seed},
      {"precision", to_string(c.precision())},
      {"alpha_init_offset", t.alpha_init_offset},
      {"alpha_from_probe", t.alpha_from_probe},
      {"train_alpha", t.train_alpha},
      {"initial_sigma", t.initial_sigma},
      {"final_fraction", t.final_fraction},
      {"clip", {{"width", t.clip_width}, {"scale", to_string(t.clip_scale)}}},
      {"output_dir", c.output_dir},
  };
  json hist_domains = json::array();
  for (auto d : c.histogram_domains) {
    hist_domains.push_back(to_string(d));
  }
  j["histogram"] = {{"domains", hist_domains}, {"bins", c.histogram_bins}, {"sweeps", c.histogram_sweeps}};
  if (c.matrix.cells() > 0) {
    json r = json::array(), m = json::array(), d = json::array();
    for (auto x : c.matrix.readout) {
      r.push_back(to_string(x));
    }
    for (auto x : c.matrix.jastrow) {
      m.push_back(to_string(x));
    }
    for (auto x : c.matrix.domain) {
      d.push_back(to_string(x));
    }
    j["matrix"] = {{"readout", r}, {"jastrow_mode", m}, {"domain", d}, {"alpha", c.matrix.alpha}};
  }
  return j;
}

std::string git_blob_sha1(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx, content.data(), content.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha1 digest failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::string config_hash(const RunConfig& c) {
  auto j = to_json(c);
  j.erase("output_dir");
  j.erase("threads");
  return git_blob_sha1(j.dump());
}

void write_checkpoint(const std::string& path, const Checkpoint& ck) {
  const json j = {{"format", "oddvmc-checkpoint"}, {"version", kCheckpointVersion}, {"config_hash", ck.config_hash},
                  {"steps", ck.steps},             {"alpha", ck.alpha},             {"energy", ck.energy},
                  {"stderr", ck.stderr_},          {"params", ck.params}};
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write checkpoint " + path);
  }
  // NaN (diverged run) is written as null
  out << j.dump(1) << '\n';
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path, "cannot open checkpoint");
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("not valid JSON: ") + e.what());
  }
  Section s(j, "");
  const auto* fmt = s.find("format");
  if (!fmt || as_string(*fmt, "format") != "oddvmc-checkpoint") {
    throw ConfigError("format", "not an oddvmc checkpoint");
  }
  const auto* ver = s.find("version");
  if (!ver) {
    throw ConfigError("version", "required");
  }
  as_integer(*ver, "version", kCheckpointVersion, kCheckpointVersion);
  Checkpoint ck;
  s.string("config_hash", ck.config_hash);
  s.integer("steps", ck.steps, 0);
  const auto maybe_nan = [&](const char* key, double& out) {
    if (const auto* v = s.find(key)) {
      out = v->is_null() ? std::numeric_limits<double>::quiet_NaN() : as_number(*v, key);
    }
  };
  maybe_nan("alpha", ck.alpha);
  maybe_nan("energy", ck.energy);
  maybe_nan("stderr", ck.stderr_);
  if (const auto* v = s.find("params")) {
    const auto& a = as_array(*v, "params", true);
    for (std::size_t i = 0; i < a.size(); ++i) {
      ck.params.push_back(as_number(a[i], index("params", i)));
    }
  }
  s.finish();
  return ck;
}

} // namespace oddvmc
