#include "oddvmc/jet.hpp"

#include <cmath>

namespace oddvmc {

Jet arith(const Jet& a, const Jet& b, ArithKind kind) {
  switch (kind) {
  case ArithKind::add:
    return a + b;
  case ArithKind::sub:
    return a - b;
  case ArithKind::mul:
    return a * b;
  case ArithKind::div:
    return a / b;
  }
  throw ShapeError("unknown arithmetic kind");
}

Jet apply_unary(const Jet& a, UnaryKind kind) {
  switch (kind) {
  case UnaryKind::exp:
    return exp(a);
  case UnaryKind::log:
    return log(a);
  case UnaryKind::sqrt:
    return sqrt(a);
  case UnaryKind::tanh:
    return tanh(a);
  case UnaryKind::softplus:
    return softplus(a);
  case UnaryKind::silu:
    return silu(a);
  case UnaryKind::abs:
    return abs(a);
  case UnaryKind::negate:
    return -a;
  }
  throw ShapeError("unknown unary kind");
}

JetMatrix seed_coordinates(std::span<const double> positions) {
  if (positions.size() % 3 != 0) {
    throw ShapeError("positions must be N x 3");
  }
  const int n = static_cast<int>(positions.size() / 3);
  const int dim = 3 * n;
  if (dim > kMaxJetDim) {
    throw ShapeError("too many electrons for jet dimension " + std::to_string(kMaxJetDim));
  }
  JetMatrix m(n, 3);
  for (int i = 0; i < dim; ++i) {
    if (!std::isfinite(positions[static_cast<std::size_t>(i)])) {
      throw std::invalid_argument("non-finite coordinate at index " + std::to_string(i));
    }
    m.entries[static_cast<std::size_t>(i)] = Jet::variable(positions[static_cast<std::size_t>(i)], dim, i);
  }
  return m;
}

std::vector<Jet> linear(std::span<const Jet> x, std::span<const double> weights, int out,
                        std::span<const double> bias) {
  const auto in = x.size();
  if (out < 0 || weights.size() != in * static_cast<std::size_t>(out)) {
    throw ShapeError("linear: weight shape does not match input width");
  }
  if (!bias.empty() && bias.size() != static_cast<std::size_t>(out)) {
    throw ShapeError("linear: bias width does not match output width");
  }
  std::vector<Jet> y(static_cast<std::size_t>(out));
  for (int j = 0; j < out; ++j) {
    Jet acc(bias.empty() ? 0.0 : bias[static_cast<std::size_t>(j)]);
    for (std::size_t i = 0; i < in; ++i) {
      add_scaled(acc, weights[i * static_cast<std::size_t>(out) + static_cast<std::size_t>(j)], x[i]);
    }
    y[static_cast<std::size_t>(j)] = acc;
  }
  return y;
}

} // namespace oddvmc
