#pragma once

// Scalar-generic evaluation of the ansatz. T is the working scalar (double,
// float, long double, BasicJet<R>, Var) and P the parameter scalar (R for
// the value and jet paths, Var for the adjoint path).

#include "oddvmc/adjoint.hpp"
#include "oddvmc/ansatz.hpp"
#include "oddvmc/linlog.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace oddvmc::detail {

inline constexpr double kDistanceGuard = 1e-24;

template <class T, class P> T from_param(const P& v) { return T(v); }

template <class T> T negate_if(const T& x, bool neg) { return neg ? -x : x; }

template <class T> SignedLog<T> to_signed(const T& y) {
  using std::log;
  const int s = sign_of(y);
  if (s == 0) {
    return signed_log_zero<T>();
  }
  return SignedLog<T>{s, log(negate_if(y, s < 0))};
}

/// y_j = b_j + sum_i x_i W_ij.
template <class T, class P>
std::vector<T> affine(const std::vector<T>& x, const P* w, const P* b, int out) {
  const std::size_t in = x.size();
  std::vector<T> y(static_cast<std::size_t>(out));
  for (int j = 0; j < out; ++j) {
    T acc = b != nullptr ? from_param<T>(b[j]) : lift<T>(0.0);
    for (std::size_t i = 0; i < in; ++i) {
      add_scaled(acc, w[i * static_cast<std::size_t>(out) + static_cast<std::size_t>(j)], x[i]);
    }
    y[static_cast<std::size_t>(j)] = acc;
  }
  return y;
}

// On the tape each output is one node with fan-in 2*in + 1.
template <>
inline std::vector<Var> affine<Var, Var>(const std::vector<Var>& x, const Var* w, const Var* b, int out) {
  thread_local std::vector<Tape::Edge> edges;
  const std::size_t in = x.size();
  std::vector<Var> y(static_cast<std::size_t>(out));
  for (int j = 0; j < out; ++j) {
    edges.clear();
    double v = 0.0;
    if (b != nullptr) {
      v = b[j].value;
      edges.push_back({b[j].id, 1.0});
    }
    for (std::size_t i = 0; i < in; ++i) {
      const Var& wij = w[i * static_cast<std::size_t>(out) + static_cast<std::size_t>(j)];
      v += wij.value * x[i].value;
      edges.push_back({wij.id, x[i].value});
      edges.push_back({x[i].id, wij.value});
    }
    bool constant = true;
    for (const auto& e : edges) {
      constant = constant && e.parent < 0;
    }
    y[static_cast<std::size_t>(j)] = constant ? Var(v) : Var(v, thread_tape().add_node(edges));
  }
  return y;
}

template <class T, class P> class Pipeline {
public:
  using Real = real_t<T>;

  Pipeline(const Ansatz& ansatz, std::span<const P> params)
      : a_(ansatz), spec_(ansatz.spec()), off_(ansatz.offsets()), p_(params) {}

  const P* at(std::size_t offset) const { return p_.data() + offset; }
  const P& alpha() const { return p_[off_.alpha]; }

  /// phi_j(r_i), row-major N x n_orbitals.
  std::vector<T> orbitals(std::span<const T> x) const {
    const auto& mol = a_.molecule();
    const int n = a_.n_electrons();
    const int m_count = mol.n_nuclei();
    const int prim = spec_.primitives;
    const int n_orb = a_.n_orbitals();
    const bool expo = spec_.orbital_kind == OrbitalKind::exponential;
    const P* coeff = at(off_.coeff);
    const P* log_zeta = at(off_.log_exponent);
    const std::size_t n_prim = static_cast<std::size_t>(n_orb * m_count * prim);

    if constexpr (is_jet_v<T>) {
      // Each entry depends on three coordinates only; derivatives are formed
      // analytically and scattered into the dense jet.
      const int dim = x.empty() ? 0 : x[0].dim;
      std::vector<Real> zeta(n_prim);
      for (std::size_t q = 0; q < n_prim; ++q) {
        zeta[q] = std::exp(value_of(log_zeta[q]));
      }
      std::vector<T> table(static_cast<std::size_t>(n * n_orb), T::constant(Real(0), dim));
      for (int i = 0; i < n; ++i) {
        for (int m = 0; m < m_count; ++m) {
          Real d[3];
          Real r2(0);
          for (int k = 0; k < 3; ++k) {
            d[k] = x[static_cast<std::size_t>(3 * i + k)].value - static_cast<Real>(mol.nuclei[m].position[k]);
            r2 += d[k] * d[k];
          }
          const Real s = std::sqrt(r2 + Real(kDistanceGuard));
          for (int j = 0; j < n_orb; ++j) {
            T& e = table[static_cast<std::size_t>(i * n_orb + j)];
            for (int p = 0; p < prim; ++p) {
              const std::size_t q = static_cast<std::size_t>((j * m_count + m) * prim + p);
              const Real c = value_of(coeff[q]);
              const Real z = zeta[q];
              Real g, radial, lap;
              if (expo) {
                g = c * std::exp(-z * s);
                radial = -z / s; // grad g = radial * d * g
                lap = g * (z * z * r2 / (s * s) - z * (Real(3) / s - r2 / (s * s * s)));
              } else {
                g = c * std::exp(-z * r2);
                radial = Real(-2) * z;
                lap = g * (Real(4) * z * z * r2 - Real(6) * z);
              }
              e.value += g;
              e.lap += lap;
              for (int k = 0; k < 3; ++k) {
                e.grad[static_cast<std::size_t>(3 * i + k)] += radial * d[k] * g;
              }
            }
          }
        }
      }
      return table;
    } else {
      using std::exp;
      using std::sqrt;
      std::vector<P> zeta(n_prim);
      for (std::size_t q = 0; q < n_prim; ++q) {
        zeta[q] = exp(log_zeta[q]);
      }
      std::vector<T> table(static_cast<std::size_t>(n * n_orb), lift<T>(0.0));
      for (int i = 0; i < n; ++i) {
        for (int m = 0; m < m_count; ++m) {
          T d[3];
          for (int k = 0; k < 3; ++k) {
            d[k] = x[static_cast<std::size_t>(3 * i + k)] - static_cast<Real>(mol.nuclei[m].position[k]);
          }
          T r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
          const T s = expo ? sqrt(r2 + static_cast<Real>(kDistanceGuard)) : r2;
          for (int j = 0; j < n_orb; ++j) {
            T& e = table[static_cast<std::size_t>(i * n_orb + j)];
            for (int p = 0; p < prim; ++p) {
              const std::size_t q = static_cast<std::size_t>((j * m_count + m) * prim + p);
              add_scaled(e, coeff[q], exp(-(zeta[q] * s)));
            }
          }
        }
      }
      return table;
    }
  }

  std::vector<T> block_matrix(const std::vector<T>& table, int det, Spin spin) const {
    const auto& set = a_.orbital_set(det, spin);
    const int n = static_cast<int>(set.size());
    const int row0 = spin == Spin::up ? 0 : a_.molecule().n_up;
    const int n_orb = a_.n_orbitals();
    std::vector<T> m(static_cast<std::size_t>(n * n));
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        m[static_cast<std::size_t>(r * n + c)] = table[static_cast<std::size_t>((row0 + r) * n_orb + set[c])];
      }
    }
    return m;
  }

  std::vector<SignedLog<T>> determinants(const std::vector<T>& table) const {
    std::vector<SignedLog<T>> out;
    out.reserve(static_cast<std::size_t>(spec_.determinants));
    for (int k = 0; k < spec_.determinants; ++k) {
      const auto up = block_matrix(table, k, Spin::up);
      const auto dn = block_matrix(table, k, Spin::down);
      const auto su = slogdet(std::span<const T>(up), a_.molecule().n_up);
      const auto sd = slogdet(std::span<const T>(dn), a_.molecule().n_down);
      out.push_back(su * sd);
    }
    return out;
  }

  /// Sum-pooled per-nucleus features [r_i - R_m, |r_i - R_m|] fed through
  /// the shared trunk.
  std::vector<T> trunk(std::span<const T> x) const {
    using std::sqrt;
    const auto& mol = a_.molecule();
    const int n = a_.n_electrons();
    const int m_count = mol.n_nuclei();
    std::vector<T> h(static_cast<std::size_t>(4 * m_count), lift<T>(0.0));
    for (int m = 0; m < m_count; ++m) {
      for (int i = 0; i < n; ++i) {
        T d[3];
        for (int k = 0; k < 3; ++k) {
          d[k] = x[static_cast<std::size_t>(3 * i + k)] - static_cast<Real>(mol.nuclei[m].position[k]);
          h[static_cast<std::size_t>(4 * m + k)] += d[k];
        }
        h[static_cast<std::size_t>(4 * m + 3)] += sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
      }
    }
    for (std::size_t l = 0; l < off_.trunk_w.size(); ++l) {
      h = affine(h, at(off_.trunk_w[l]), at(off_.trunk_b[l]), off_.trunk_widths[l]);
      for (auto& v : h) {
        v = silu(v);
      }
    }
    return h;
  }

  JastrowHeads<T> heads(std::span<const T> x) const {
    JastrowHeads<T> out;
    if (spec_.jastrow == JastrowMode::none) {
      return out;
    }
    const auto h = trunk(x);
    if (off_.standalone_w != ParamOffsets::npos) {
      out.standalone = affine(h, at(off_.standalone_w), at(off_.standalone_b), 1);
    }
    for (std::size_t t = 0; t < off_.layer_w.size(); ++t) {
      out.layers.push_back(affine(h, at(off_.layer_w[t]), at(off_.layer_b[t]), off_.readout_widths[t]));
    }
    if (off_.gate_in_w != ParamOffsets::npos) {
      out.gate_in = affine(h, at(off_.gate_in_w), at(off_.gate_in_b), spec_.determinants);
    }
    if (off_.gate_out_w != ParamOffsets::npos) {
      out.gate_out = affine(h, at(off_.gate_out_w), at(off_.gate_out_b), 1);
    }
    return out;
  }

  /// Explicit-readout MLP g: silu on hidden layers, linear output.
  T mlp(std::vector<T> u) const {
    const std::size_t layers = off_.readout_w.size();
    for (std::size_t l = 0; l < layers; ++l) {
      u = affine(u, at(off_.readout_w[l]), at(off_.readout_b[l]), off_.readout_widths[l]);
      if (l + 1 < layers) {
        for (auto& v : u) {
          v = silu(v);
        }
      }
    }
    return u[0];
  }

  /// Readout output in the readout domain: f(x^(0)) with x^(0) the
  /// determinants mapped into the configured domain.
  T readout_value(const std::vector<SignedLog<T>>& dets, const JastrowHeads<T>& jas) const {
    using std::exp;
    using std::tanh;
    const std::size_t k_count = dets.size();
    std::vector<T> x(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
      if (spec_.domain == Domain::linlog) {
        x[k] = linlog_forward(dets[k], alpha());
      } else {
        x[k] = dets[k].is_zero() ? lift<T>(0.0) : negate_if(exp(dets[k].logabs), dets[k].sign < 0);
      }
    }
    T y = lift<T>(0.0);
    switch (spec_.readout) {
    case ReadoutKind::linear: {
      const P* w = at(off_.det_weight);
      for (std::size_t k = 0; k < k_count; ++k) {
        add_scaled(y, w[k], x[k]);
      }
      if (!jas.gate_out.empty()) {
        y = y * jas.gate_out[0];
      }
      break;
    }
    case ReadoutKind::implicit: {
      std::vector<T> h = std::move(x);
      for (std::size_t t = 0; t < off_.readout_w.size(); ++t) {
        h = affine<T, P>(h, at(off_.readout_w[t]), nullptr, off_.readout_widths[t]);
        for (std::size_t u = 0; u < h.size(); ++u) {
          h[u] = tanh(h[u]);
          if (!jas.layers.empty()) {
            h[u] = h[u] * jas.layers[t][u];
          }
        }
      }
      y = h[0];
      break;
    }
    case ReadoutKind::explicit_odd: {
      std::vector<T> plus = std::move(x);
      if (!jas.gate_in.empty()) {
        for (std::size_t k = 0; k < k_count; ++k) {
          plus[k] = plus[k] * jas.gate_in[k];
        }
      }
      std::vector<T> minus(plus.size());
      for (std::size_t k = 0; k < plus.size(); ++k) {
        minus[k] = -plus[k];
      }
      y = mlp(std::move(plus)) - mlp(std::move(minus));
      if (!jas.gate_out.empty()) {
        y = y * jas.gate_out[0];
      }
      break;
    }
    }
    return y;
  }

  SignedLog<T> combine(const std::vector<SignedLog<T>>& dets, const JastrowHeads<T>& jas) const {
    using std::exp;
    const std::size_t k_count = dets.size();
    SignedLog<T> out;

    if (spec_.readout == ReadoutKind::linear && spec_.domain == Domain::linear) {
      // Signed log-sum-exp of sum_k w_k det_k.
      const P* w = at(off_.det_weight);
      bool any = false;
      Real shift(0);
      for (const auto& d : dets) {
        if (!d.is_zero() && (!any || value_of(d.logabs) > shift)) {
          shift = value_of(d.logabs);
          any = true;
        }
      }
      if (!any) {
        return signed_log_zero<T>();
      }
      T s = lift<T>(0.0);
      for (std::size_t k = 0; k < k_count; ++k) {
        if (!dets[k].is_zero()) {
          add_scaled(s, w[k] * static_cast<Real>(dets[k].sign), exp(dets[k].logabs - shift));
        }
      }
      out = to_signed(s);
      if (!out.is_zero()) {
        out.logabs = out.logabs + shift;
      }
      if (!jas.gate_out.empty()) {
        out = out * to_signed(jas.gate_out[0]);
      }
    } else {
      const T y = readout_value(dets, jas);
      out = spec_.domain == Domain::linlog ? linlog_inverse(y, alpha()) : to_signed(y);
    }

    if (!jas.standalone.empty() && !out.is_zero()) {
      out.logabs = out.logabs + jas.standalone[0];
    }
    return out;
  }

  SignedLog<T> log_psi(std::span<const T> x) const {
    const auto table = orbitals(x);
    const auto dets = determinants(table);
    return combine(dets, heads(x));
  }

private:
  const Ansatz& a_;
  const AnsatzSpec& spec_;
  const ParamOffsets& off_;
  std::span<const P> p_;
};

} // namespace oddvmc::detail
