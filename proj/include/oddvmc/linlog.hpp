#pragma once

// linlog_alpha(x) = sign(x) log(|x| e^alpha + 1): linear near zero,
// logarithmic far from it, odd and smooth. Evaluated from a signed-log input
// as sign(x) softplus(log|x| + alpha), which never forms |x| itself.

#include "oddvmc/signed_log.hpp"

#include <cmath>

namespace oddvmc {

/// Direct form, for plain values. Needs |x| itself, which underflows long
/// before log|x| does; the pipeline uses the signed-log overload.
template <std::floating_point R> R linlog_direct(R x, R alpha) {
  return static_cast<R>(sign_of(x)) * std::log1p(std::abs(x) * std::exp(alpha));
}

template <class T, class P> T linlog_forward(const SignedLog<T>& x, const P& alpha) {
  if (x.is_zero()) {
    return lift<T>(0.0);
  }
  T y = softplus(x.logabs + alpha);
  return x.sign > 0 ? y : -y;
}

/// Inverse map: |x| = (e^{|y|} - 1) e^{-alpha}, kept in log space.
template <class T, class P> SignedLog<T> linlog_inverse(const T& y, const P& alpha) {
  const int s = sign_of(y);
  if (s == 0) {
    return signed_log_zero<T>();
  }
  T mag = s > 0 ? y : -y;
  return SignedLog<T>{s, log_expm1(mag) - alpha};
}

} // namespace oddvmc
