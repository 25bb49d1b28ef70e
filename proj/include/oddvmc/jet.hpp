#pragma once

// Forward-Laplacian jets: every quantity carries its value, its gradient with
// respect to all 3N electron coordinates, and its Laplacian (sum of the
// diagonal second derivatives). Propagation is exact, so the kinetic energy
// obtained from a jet of log|psi| has no discretisation error.

#include "oddvmc/errors.hpp"
#include "oddvmc/scalar.hpp"

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace oddvmc {

// 3N for up to 14 electrons (the N2 presets).
inline constexpr int kMaxJetDim = 42;

/// Value, dense gradient and Laplacian of a scalar field over R^dim.
///
/// A jet of dimension 0 is a constant; it combines with jets of any
/// dimension as if its gradient were the zero vector.
template <std::floating_point R> struct BasicJet {
  R value{};
  R lap{};
  int dim = 0;
  std::array<R, kMaxJetDim> grad;

  BasicJet() = default;
  BasicJet(R v) : value(v) {} // NOLINT(google-explicit-constructor)

  static BasicJet constant(R v, int dim) {
    BasicJet j(v);
    j.dim = dim;
    j.grad.fill(R(0));
    return j;
  }

  /// Independent variable: one-hot gradient at `index`, zero Laplacian.
  static BasicJet variable(R v, int dim, int index) {
    BasicJet j = constant(v, dim);
    j.grad[static_cast<std::size_t>(index)] = R(1);
    return j;
  }

  std::span<const R> gradient() const { return {grad.data(), static_cast<std::size_t>(dim)}; }

  R grad_at(int d) const { return d < dim ? grad[static_cast<std::size_t>(d)] : R(0); }

  R grad_norm2() const {
    R s(0);
    for (int d = 0; d < dim; ++d) {
      s += grad[d] * grad[d];
    }
    return s;
  }
};

using Jet = BasicJet<double>;

template <std::floating_point R> struct ScalarTraits<BasicJet<R>> {
  using real = R;
  static BasicJet<R> constant(double v) { return BasicJet<R>(static_cast<R>(v)); }
};

template <class T> inline constexpr bool is_jet_v = false;
template <std::floating_point R> inline constexpr bool is_jet_v<BasicJet<R>> = true;

template <std::floating_point R> R value_of(const BasicJet<R>& a) { return a.value; }

namespace detail {

inline int joint_dim(int a, int b) {
  if (a == b || b == 0) {
    return a;
  }
  if (a == 0) {
    return b;
  }
  throw ShapeError("jet dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

} // namespace detail

/// Chain rule for y = f(a): grad = f' grad a, lap = f' lap a + f'' |grad a|^2.
template <std::floating_point R> BasicJet<R> chain(const BasicJet<R>& a, const Derivs<R>& d) {
  BasicJet<R> out;
  out.dim = a.dim;
  out.value = d.f;
  R g2(0);
  for (int k = 0; k < a.dim; ++k) {
    out.grad[k] = d.d1 * a.grad[k];
    g2 += a.grad[k] * a.grad[k];
  }
  out.lap = d.d1 * a.lap + d.d2 * g2;
  return out;
}

template <std::floating_point R> BasicJet<R> operator-(const BasicJet<R>& a) {
  BasicJet<R> out;
  out.dim = a.dim;
  out.value = -a.value;
  out.lap = -a.lap;
  for (int k = 0; k < a.dim; ++k) {
    out.grad[k] = -a.grad[k];
  }
  return out;
}

template <std::floating_point R> BasicJet<R> operator+(const BasicJet<R>& a, const BasicJet<R>& b) {
  BasicJet<R> out;
  out.dim = detail::joint_dim(a.dim, b.dim);
  out.value = a.value + b.value;
  out.lap = a.lap + b.lap;
  for (int k = 0; k < out.dim; ++k) {
    out.grad[k] = a.grad_at(k) + b.grad_at(k);
  }
  return out;
}

template <std::floating_point R> BasicJet<R> operator-(const BasicJet<R>& a, const BasicJet<R>& b) {
  BasicJet<R> out;
  out.dim = detail::joint_dim(a.dim, b.dim);
  out.value = a.value - b.value;
  out.lap = a.lap - b.lap;
  for (int k = 0; k < out.dim; ++k) {
    out.grad[k] = a.grad_at(k) - b.grad_at(k);
  }
  return out;
}

template <std::floating_point R> BasicJet<R> operator*(const BasicJet<R>& a, const BasicJet<R>& b) {
  BasicJet<R> out;
  out.dim = detail::joint_dim(a.dim, b.dim);
  out.value = a.value * b.value;
  R cross(0);
  for (int k = 0; k < out.dim; ++k) {
    const R ga = a.grad_at(k);
    const R gb = b.grad_at(k);
    out.grad[k] = ga * b.value + gb * a.value;
    cross += ga * gb;
  }
  out.lap = a.lap * b.value + b.lap * a.value + R(2) * cross;
  return out;
}

template <std::floating_point R> BasicJet<R> operator/(const BasicJet<R>& a, const BasicJet<R>& b) {
  if (b.value == R(0)) {
    throw SingularEvaluation("jet division by zero");
  }
  // a / b = a * (1/b); 1/b has derivatives -1/b^2 and 2/b^3.
  const R inv = R(1) / b.value;
  return a * chain(b, Derivs<R>{inv, -inv * inv, R(2) * inv * inv * inv});
}

template <std::floating_point R> BasicJet<R> operator+(const BasicJet<R>& a, R s) {
  BasicJet<R> out = a;
  out.value += s;
  return out;
}
template <std::floating_point R> BasicJet<R> operator+(R s, const BasicJet<R>& a) { return a + s; }
template <std::floating_point R> BasicJet<R> operator-(const BasicJet<R>& a, R s) { return a + (-s); }
template <std::floating_point R> BasicJet<R> operator-(R s, const BasicJet<R>& a) { return (-a) + s; }

template <std::floating_point R> BasicJet<R> operator*(const BasicJet<R>& a, R s) {
  BasicJet<R> out;
  out.dim = a.dim;
  out.value = a.value * s;
  out.lap = a.lap * s;
  for (int k = 0; k < a.dim; ++k) {
    out.grad[k] = a.grad[k] * s;
  }
  return out;
}
template <std::floating_point R> BasicJet<R> operator*(R s, const BasicJet<R>& a) { return a * s; }

template <std::floating_point R> BasicJet<R> operator/(const BasicJet<R>& a, R s) {
  if (s == R(0)) {
    throw SingularEvaluation("jet division by zero");
  }
  return a * (R(1) / s);
}

template <std::floating_point R> BasicJet<R>& operator+=(BasicJet<R>& a, const BasicJet<R>& b) {
  if (a.dim == b.dim) {
    a.value += b.value;
    a.lap += b.lap;
    for (int k = 0; k < a.dim; ++k) {
      a.grad[k] += b.grad[k];
    }
    return a;
  }
  a = a + b;
  return a;
}
template <std::floating_point R> BasicJet<R>& operator-=(BasicJet<R>& a, const BasicJet<R>& b) {
  a = a - b;
  return a;
}
template <std::floating_point R> BasicJet<R>& operator*=(BasicJet<R>& a, const BasicJet<R>& b) {
  a = a * b;
  return a;
}

/// acc += s * x, without a temporary.
template <std::floating_point R> void add_scaled(BasicJet<R>& acc, R s, const BasicJet<R>& x) {
  if (acc.dim != x.dim) {
    if (acc.dim == 0) {
      const R v = acc.value;
      const R l = acc.lap;
      acc = BasicJet<R>::constant(v, x.dim);
      acc.lap = l;
    } else if (x.dim != 0) {
      throw ShapeError("jet dimension mismatch in add_scaled");
    }
  }
  acc.value += s * x.value;
  acc.lap += s * x.lap;
  for (int k = 0; k < x.dim; ++k) {
    acc.grad[k] += s * x.grad[k];
  }
}

template <std::floating_point R> BasicJet<R> exp(const BasicJet<R>& a) { return chain(a, exp_derivs(a.value)); }

template <std::floating_point R> BasicJet<R> log(const BasicJet<R>& a) {
  if (!(a.value > R(0))) {
    throw SingularEvaluation("jet log of non-positive value");
  }
  return chain(a, log_derivs(a.value));
}

template <std::floating_point R> BasicJet<R> sqrt(const BasicJet<R>& a) {
  if (!(a.value > R(0))) {
    throw SingularEvaluation("jet sqrt at or below zero");
  }
  return chain(a, sqrt_derivs(a.value));
}

template <std::floating_point R> BasicJet<R> tanh(const BasicJet<R>& a) { return chain(a, tanh_derivs(a.value)); }
template <std::floating_point R> BasicJet<R> softplus(const BasicJet<R>& a) {
  return chain(a, softplus_derivs(a.value));
}
template <std::floating_point R> BasicJet<R> silu(const BasicJet<R>& a) { return chain(a, silu_derivs(a.value)); }
template <std::floating_point R> BasicJet<R> abs(const BasicJet<R>& a) { return chain(a, abs_derivs(a.value)); }

template <std::floating_point R> BasicJet<R> log_expm1(const BasicJet<R>& a) {
  if (!(a.value > R(0))) {
    throw SingularEvaluation("jet log_expm1 at or below zero");
  }
  return chain(a, log_expm1_derivs(a.value));
}

template <std::floating_point R> int sign_of(const BasicJet<R>& a) { return sign_of(a.value); }

enum class ArithKind { add, sub, mul, div };
enum class UnaryKind { exp, log, sqrt, tanh, softplus, silu, abs, negate };

Jet arith(const Jet& a, const Jet& b, ArithKind kind);
Jet apply_unary(const Jet& a, UnaryKind kind);

/// Row-major matrix of jets.
struct JetMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Jet> entries;

  JetMatrix() = default;
  JetMatrix(int r, int c) : rows(r), cols(c), entries(static_cast<std::size_t>(r * c)) {}

  Jet& operator()(int i, int j) { return entries[static_cast<std::size_t>(i * cols + j)]; }
  const Jet& operator()(int i, int j) const { return entries[static_cast<std::size_t>(i * cols + j)]; }
};

/// Seeds N x 3 positions (flattened row-major) as independent variables:
/// entry (i, d) has gradient e_{3i+d}.
JetMatrix seed_coordinates(std::span<const double> positions);

inline Jet seed_constant(double v, int dim = 0) { return Jet::constant(v, dim); }

/// y_j = sum_i x_i W_ij + b_j for row-major W of shape (x.size(), out).
std::vector<Jet> linear(std::span<const Jet> x, std::span<const double> weights, int out,
                        std::span<const double> bias = {});

} // namespace oddvmc
