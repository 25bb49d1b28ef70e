#include "oddvmc/adjoint.hpp"
#include "oddvmc/errors.hpp"
#include "oddvmc/signed_log.hpp"

#include <cmath>

namespace oddvmc {

std::vector<double> Tape::backward(int output, int n_leading) const {
  std::vector<double> adj(static_cast<std::size_t>(size()), 0.0);
  if (output < 0) {
    return std::vector<double>(static_cast<std::size_t>(n_leading), 0.0);
  }
  adj[static_cast<std::size_t>(output)] = 1.0;
  for (int node = output; node >= n_leading; --node) {
    const double a = adj[static_cast<std::size_t>(node)];
    if (a == 0.0) {
      continue;
    }
    const std::uint32_t begin = node == 0 ? 0U : edge_end_[static_cast<std::size_t>(node - 1)];
    const std::uint32_t end = edge_end_[static_cast<std::size_t>(node)];
    for (std::uint32_t e = begin; e < end; ++e) {
      adj[static_cast<std::size_t>(edges_[e].parent)] += edges_[e].partial * a;
    }
  }
  adj.resize(static_cast<std::size_t>(n_leading));
  return adj;
}

Tape& thread_tape() {
  thread_local Tape tape;
  return tape;
}

Var operator/(const Var& a, const Var& b) {
  if (b.value == 0.0) {
    throw SingularEvaluation("adjoint division by zero");
  }
  const double inv = 1.0 / b.value;
  return binary(a.value * inv, a, inv, b, -a.value * inv * inv);
}

Var exp(const Var& a) {
  const double e = std::exp(a.value);
  return chain(a, e, e);
}

Var log(const Var& a) {
  if (!(a.value > 0.0)) {
    throw SingularEvaluation("adjoint log of non-positive value");
  }
  return chain(a, std::log(a.value), 1.0 / a.value);
}

Var sqrt(const Var& a) {
  if (!(a.value > 0.0)) {
    throw SingularEvaluation("adjoint sqrt at or below zero");
  }
  const double s = std::sqrt(a.value);
  return chain(a, s, 0.5 / s);
}

Var tanh(const Var& a) {
  const auto d = tanh_derivs(a.value);
  return chain(a, d.f, d.d1);
}

Var softplus(const Var& a) { return chain(a, oddvmc::softplus(a.value), sigmoid(a.value)); }

Var silu(const Var& a) {
  const auto d = silu_derivs(a.value);
  return chain(a, d.f, d.d1);
}

Var abs(const Var& a) { return chain(a, std::abs(a.value), static_cast<double>(sign_of(a.value))); }

Var log_expm1(const Var& a) {
  if (!(a.value > 0.0)) {
    throw SingularEvaluation("adjoint log_expm1 at or below zero");
  }
  return chain(a, oddvmc::log_expm1(a.value), -1.0 / std::expm1(-a.value));
}

AdjointSession::AdjointSession(std::span<const double> values) {
  Tape& tape = thread_tape();
  tape.clear();
  leaves_.reserve(values.size());
  for (double v : values) {
    leaves_.emplace_back(v, tape.add_leaf());
  }
}

AdjointSession::~AdjointSession() { thread_tape().clear(); }

std::vector<double> AdjointSession::gradient(const Var& output) const {
  return thread_tape().backward(output.id, static_cast<int>(leaves_.size()));
}

SignedLog<Var> slogdet(std::span<const Var> a, int n) {
  if (n == 0) {
    return {1, Var(0.0)};
  }
  std::vector<double> values(static_cast<std::size_t>(n * n));
  bool any_variable = false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = a[i].value;
    any_variable = any_variable || !a[i].is_constant();
  }
  const auto f = detail::lu_factor(std::span<const double>(values), n);
  if (f.singular) {
    return {0, Var(0.0)};
  }
  const int sign = f.parity * f.diag_sign;
  if (!any_variable) {
    return {sign, Var(f.logabs)};
  }
  const auto inv = detail::lu_inverse_permuted(f);
  // inv = (PA)^-1, so d/dA_{perm[j],k} = inv(k, j).
  std::vector<Tape::Edge> edges;
  edges.reserve(values.size());
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const Var& entry = a[static_cast<std::size_t>(f.perm[j] * n + k)];
      edges.push_back({entry.id, inv[static_cast<std::size_t>(k * n + j)]});
    }
  }
  return {sign, Var(f.logabs, thread_tape().add_node(edges))};
}

} // namespace oddvmc
