#pragma once

#include "oddvmc/adjoint.hpp"
#include "oddvmc/jet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace oddvmc {

/// sign * exp(logabs). sign == 0 marks an exact zero; logabs is then
/// meaningless and must not be consumed.
template <class T> struct SignedLog {
  int sign = 0;
  T logabs{};

  bool is_zero() const { return sign == 0; }
};

using SignedLogJet = SignedLog<Jet>;

template <class T> SignedLog<T> signed_log_zero() { return SignedLog<T>{0, lift<T>(0.0)}; }

template <class T> SignedLog<T> operator*(const SignedLog<T>& a, const SignedLog<T>& b) {
  if (a.is_zero() || b.is_zero()) {
    return signed_log_zero<T>();
  }
  return SignedLog<T>{a.sign * b.sign, a.logabs + b.logabs};
}

// log(1e-300): |det| below this fraction of the Hadamard bound counts as zero.
inline constexpr double kLogSingularThreshold = -690.7755278982137;

namespace detail {

/// LU factorisation with partial pivoting of a row-major n x n matrix.
/// Rows are kept in pivot order (`perm[i]` is the original row at position
/// i), so the factors depend only on the set of rows, not on their order.
template <std::floating_point R> struct LuFactor {
  int n = 0;
  std::vector<R> lu; // packed L (unit diagonal, below) and U (on/above)
  std::vector<int> perm;
  int parity = 1;
  bool singular = false;
  R logabs = R(0);
  int diag_sign = 1;
};

template <std::floating_point R> LuFactor<R> lu_factor(std::span<const R> a, int n) {
  LuFactor<R> f;
  f.n = n;
  f.lu.assign(a.begin(), a.end());
  f.perm.resize(static_cast<std::size_t>(n));
  std::iota(f.perm.begin(), f.perm.end(), 0);
  auto at = [&](int i, int j) -> R& { return f.lu[static_cast<std::size_t>(i * n + j)]; };

  // Hadamard bound, in log space.
  R log_bound(0);
  for (int i = 0; i < n; ++i) {
    R s(0);
    for (int j = 0; j < n; ++j) {
      s += at(i, j) * at(i, j);
    }
    if (!(s > R(0))) {
      f.singular = true;
      return f;
    }
    log_bound += R(0.5) * std::log(s);
  }

  for (int k = 0; k < n; ++k) {
    int p = k;
    R best = std::abs(at(k, k));
    for (int i = k + 1; i < n; ++i) {
      const R v = std::abs(at(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best == R(0)) {
      f.singular = true;
      return f;
    }
    if (p != k) {
      for (int j = 0; j < n; ++j) {
        std::swap(at(k, j), at(p, j));
      }
      std::swap(f.perm[k], f.perm[p]);
      f.parity = -f.parity;
    }
    const R pivot = at(k, k);
    if (pivot < R(0)) {
      f.diag_sign = -f.diag_sign;
    }
    f.logabs += std::log(std::abs(pivot));
    for (int i = k + 1; i < n; ++i) {
      const R l = at(i, k) / pivot;
      at(i, k) = l;
      for (int j = k + 1; j < n; ++j) {
        at(i, j) -= l * at(k, j);
      }
    }
  }
  if (f.logabs - log_bound < R(kLogSingularThreshold)) {
    f.singular = true;
  }
  return f;
}

/// Inverse of the row-permuted matrix P A (row-major).
template <std::floating_point R> std::vector<R> lu_inverse_permuted(const LuFactor<R>& f) {
  const int n = f.n;
  std::vector<R> inv(static_cast<std::size_t>(n * n), R(0));
  std::vector<R> col(static_cast<std::size_t>(n));
  auto lu = [&](int i, int j) { return f.lu[static_cast<std::size_t>(i * n + j)]; };
  for (int c = 0; c < n; ++c) {
    std::fill(col.begin(), col.end(), R(0));
    col[c] = R(1);
    for (int i = 0; i < n; ++i) {
      R s = col[i];
      for (int j = 0; j < i; ++j) {
        s -= lu(i, j) * col[j];
      }
      col[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
      R s = col[i];
      for (int j = i + 1; j < n; ++j) {
        s -= lu(i, j) * col[j];
      }
      col[i] = s / lu(i, i);
    }
    for (int i = 0; i < n; ++i) {
      inv[static_cast<std::size_t>(i * n + c)] = col[i];
    }
  }
  return inv;
}

} // namespace detail

/// sign and log|det A| of a row-major n x n matrix. n == 0 gives +1, 0.
template <std::floating_point R> SignedLog<R> slogdet(std::span<const R> a, int n) {
  if (n == 0) {
    return {1, R(0)};
  }
  const auto f = detail::lu_factor(a, n);
  if (f.singular) {
    return signed_log_zero<R>();
  }
  return {f.parity * f.diag_sign, f.logabs};
}

/// Jet log-determinant: grad = tr(A^-1 dA) and
/// lap = tr(A^-1 lap A) - sum_d tr((A^-1 d_d A)^2).
template <std::floating_point R> SignedLog<BasicJet<R>> slogdet(std::span<const BasicJet<R>> a, int n) {
  using J = BasicJet<R>;
  if (n == 0) {
    return {1, J(R(0))};
  }
  std::vector<R> values(static_cast<std::size_t>(n * n));
  int dim = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = a[i].value;
    dim = detail::joint_dim(dim, a[i].dim);
  }
  const auto f = detail::lu_factor(std::span<const R>(values), n);
  if (f.singular) {
    return {0, J(R(0))};
  }
  const auto inv = detail::lu_inverse_permuted(f);
  // Entry (j, k) of P A.
  auto pa = [&](int j, int k) -> const J& { return a[static_cast<std::size_t>(f.perm[j] * n + k)]; };
  auto b = [&](int k, int j) { return inv[static_cast<std::size_t>(k * n + j)]; };

  J out = J::constant(f.logabs, dim);
  R lap(0);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      lap += b(k, j) * pa(j, k).lap;
    }
  }
  std::vector<R> m(static_cast<std::size_t>(n * n));
  for (int d = 0; d < dim; ++d) {
    // m = B * d_d(PA)
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        R s(0);
        for (int j = 0; j < n; ++j) {
          s += b(k, j) * pa(j, l).grad_at(d);
        }
        m[static_cast<std::size_t>(k * n + l)] = s;
      }
    }
    R tr(0);
    R tr2(0);
    for (int k = 0; k < n; ++k) {
      tr += m[static_cast<std::size_t>(k * n + k)];
      for (int l = 0; l < n; ++l) {
        tr2 += m[static_cast<std::size_t>(k * n + l)] * m[static_cast<std::size_t>(l * n + k)];
      }
    }
    out.grad[d] = tr;
    lap -= tr2;
  }
  out.lap = lap;
  return {f.parity * f.diag_sign, out};
}

/// Adjoint log-determinant: d log|det A| / dA_jk = (A^-1)_kj.
SignedLog<Var> slogdet(std::span<const Var> a, int n);

inline SignedLogJet slogdet(const JetMatrix& m) {
  if (m.rows != m.cols) {
    throw ShapeError("slogdet needs a square matrix");
  }
  return slogdet(std::span<const Jet>(m.entries), m.rows);
}

} // namespace oddvmc
