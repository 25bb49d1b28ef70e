#pragma once

// Elementary functions on plain floating-point values, with their first and
// second derivatives. The jet and adjoint scalar types build on these.

#include <cmath>
#include <concepts>

namespace oddvmc {

template <class T> struct ScalarTraits;

template <std::floating_point R> struct ScalarTraits<R> {
  using real = R;
  static R constant(double v) { return static_cast<R>(v); }
};

template <class T> using real_t = typename ScalarTraits<T>::real;

/// Constant of scalar type T.
template <class T> T lift(double v) { return ScalarTraits<T>::constant(v); }

template <std::floating_point R> constexpr R value_of(R x) { return x; }

/// acc += s * x.
template <std::floating_point R> void add_scaled(R& acc, R s, R x) { acc += s * x; }

template <std::floating_point R> constexpr int sign_of(R x) {
  return (x > R(0)) - (x < R(0));
}

/// f, f', f'' at a point.
template <std::floating_point R> struct Derivs {
  R f;
  R d1;
  R d2;
};

template <std::floating_point R> R sigmoid(R x) {
  if (x >= R(0)) {
    return R(1) / (R(1) + std::exp(-x));
  }
  const R e = std::exp(x);
  return e / (R(1) + e);
}

/// log(1 + e^x) without overflow.
template <std::floating_point R> R softplus(R x) {
  return x > R(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <std::floating_point R> R silu(R x) { return x * sigmoid(x); }

/// log(e^z - 1) for z > 0; the inverse of softplus.
template <std::floating_point R> R log_expm1(R z) {
  if (z > R(30)) {
    return z + std::log1p(-std::exp(-z));
  }
  return std::log(std::expm1(z));
}

template <std::floating_point R> Derivs<R> exp_derivs(R x) {
  const R e = std::exp(x);
  return {e, e, e};
}

template <std::floating_point R> Derivs<R> log_derivs(R x) {
  return {std::log(x), R(1) / x, R(-1) / (x * x)};
}

template <std::floating_point R> Derivs<R> sqrt_derivs(R x) {
  const R s = std::sqrt(x);
  return {s, R(0.5) / s, R(-0.25) / (s * x)};
}

template <std::floating_point R> Derivs<R> tanh_derivs(R x) {
  const R t = std::tanh(x);
  const R d = R(1) - t * t;
  return {t, d, R(-2) * t * d};
}

template <std::floating_point R> Derivs<R> softplus_derivs(R x) {
  const R s = sigmoid(x);
  return {softplus(x), s, s * (R(1) - s)};
}

template <std::floating_point R> Derivs<R> silu_derivs(R x) {
  const R s = sigmoid(x);
  const R ds = s * (R(1) - s);
  return {x * s, s + x * ds, ds * (R(2) + x * (R(1) - R(2) * s))};
}

template <std::floating_point R> Derivs<R> log_expm1_derivs(R z) {
  // d/dz log(e^z - 1) = 1 / (1 - e^{-z})
  const R em = std::expm1(-z); // e^{-z} - 1, negative for z > 0
  const R d1 = R(-1) / em;
  const R d2 = -std::exp(-z) / (em * em);
  return {log_expm1(z), d1, d2};
}

/// |x| with derivative sign(x); the kink at 0 is assigned derivative 0.
template <std::floating_point R> Derivs<R> abs_derivs(R x) {
  return {std::abs(x), static_cast<R>(sign_of(x)), R(0)};
}

} // namespace oddvmc
