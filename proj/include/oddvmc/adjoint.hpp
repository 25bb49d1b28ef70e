#pragma once

// Reverse-mode (adjoint) differentiation over the variational parameters.
//
// A Var is a value plus a node id on the calling thread's tape; id < 0 marks
// a constant, which never touches the tape. Parameters are registered as the
// first nodes of a session so their adjoints come out in parameter order.

#include "oddvmc/scalar.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace oddvmc {

class Tape {
public:
  struct Edge {
    int parent;
    double partial;
  };

  void clear() {
    edge_end_.clear();
    edges_.clear();
  }

  int size() const { return static_cast<int>(edge_end_.size()); }

  int add_leaf() {
    edge_end_.push_back(static_cast<std::uint32_t>(edges_.size()));
    return size() - 1;
  }

  int add_node(int p0, double d0) {
    edges_.push_back({p0, d0});
    return add_leaf();
  }

  int add_node(int p0, double d0, int p1, double d1) {
    if (p0 >= 0) {
      edges_.push_back({p0, d0});
    }
    if (p1 >= 0) {
      edges_.push_back({p1, d1});
    }
    return add_leaf();
  }

  /// Node with an arbitrary fan-in; edges with parent < 0 are dropped.
  int add_node(std::span<const Edge> in) {
    for (const Edge& e : in) {
      if (e.parent >= 0) {
        edges_.push_back(e);
      }
    }
    return add_leaf();
  }

  /// Adjoints d(output)/d(node) for nodes [0, n_leading).
  std::vector<double> backward(int output, int n_leading) const;

private:
  std::vector<std::uint32_t> edge_end_;
  std::vector<Edge> edges_;
};

/// The calling thread's tape.
Tape& thread_tape();

struct Var {
  double value = 0.0;
  int id = -1;

  Var() = default;
  Var(double v) : value(v) {} // NOLINT(google-explicit-constructor)
  Var(double v, int node) : value(v), id(node) {}

  bool is_constant() const { return id < 0; }
};

template <> struct ScalarTraits<Var> {
  using real = double;
  static Var constant(double v) { return Var(v); }
};

inline double value_of(const Var& a) { return a.value; }
inline int sign_of(const Var& a) { return sign_of(a.value); }

inline Var chain(const Var& a, double f, double df) {
  if (a.is_constant()) {
    return Var(f);
  }
  return Var(f, thread_tape().add_node(a.id, df));
}

inline Var binary(double f, const Var& a, double da, const Var& b, double db) {
  if (a.is_constant() && b.is_constant()) {
    return Var(f);
  }
  return Var(f, thread_tape().add_node(a.id, da, b.id, db));
}

inline Var operator-(const Var& a) { return chain(a, -a.value, -1.0); }
inline Var operator+(const Var& a, const Var& b) { return binary(a.value + b.value, a, 1.0, b, 1.0); }
inline Var operator-(const Var& a, const Var& b) { return binary(a.value - b.value, a, 1.0, b, -1.0); }
inline Var operator*(const Var& a, const Var& b) {
  return binary(a.value * b.value, a, b.value, b, a.value);
}
Var operator/(const Var& a, const Var& b);

inline Var operator+(const Var& a, double s) { return chain(a, a.value + s, 1.0); }
inline Var operator+(double s, const Var& a) { return a + s; }
inline Var operator-(const Var& a, double s) { return chain(a, a.value - s, 1.0); }
inline Var operator-(double s, const Var& a) { return chain(a, s - a.value, -1.0); }
inline Var operator*(const Var& a, double s) { return chain(a, a.value * s, s); }
inline Var operator*(double s, const Var& a) { return a * s; }

inline Var& operator+=(Var& a, const Var& b) {
  a = a + b;
  return a;
}
inline Var& operator-=(Var& a, const Var& b) {
  a = a - b;
  return a;
}
inline Var& operator*=(Var& a, const Var& b) {
  a = a * b;
  return a;
}

inline void add_scaled(Var& acc, const Var& s, const Var& x) { acc = acc + s * x; }

Var exp(const Var& a);
Var log(const Var& a);
Var sqrt(const Var& a);
Var tanh(const Var& a);
Var softplus(const Var& a);
Var silu(const Var& a);
Var abs(const Var& a);
Var log_expm1(const Var& a);

/// RAII scope that clears the thread's tape and registers `values` as leaves
/// 0..n-1. The tape is cleared again on destruction.
class AdjointSession {
public:
  explicit AdjointSession(std::span<const double> values);
  ~AdjointSession();
  AdjointSession(const AdjointSession&) = delete;
  AdjointSession& operator=(const AdjointSession&) = delete;

  std::span<const Var> leaves() const { return leaves_; }

  /// Gradient of `output` with respect to every leaf.
  std::vector<double> gradient(const Var& output) const;

private:
  std::vector<Var> leaves_;
};

} // namespace oddvmc
