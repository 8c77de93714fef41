#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "svsnn/autodiff/dual.hpp"
#include "svsnn/error.hpp"

namespace svsnn::autodiff {

enum class Op : std::uint8_t { Leaf, Const, Add, Sub, Mul, Div, Neg, Sin, Cos, Tanh, Exp, PowConst };

class Tape;

// Handle to a tape node. A Var without a tape is a plain constant and never
// touches any tape; mixing it with a taped Var records a Const node.
struct Var {
  Tape* tape = nullptr;
  std::int32_t index = -1;
  double value = 0.0;

  Var() = default;
  Var(double x) : value(x) {}  // NOLINT(google-explicit-constructor)
  Var(Tape* t, std::int32_t i, double x) : tape(t), index(i), value(x) {}

  bool is_constant() const { return tape == nullptr; }
};

inline double primal(const Var& x) { return x.value; }

class Tape {
 public:
  struct Node {
    Op op;
    std::int32_t a;
    std::int32_t b;
    double c;      // exponent for PowConst, value for Const
    double value;
    double da;     // local partials with respect to a and b
    double db;
  };

  // Leaves. Inputs and parameters are both leaves; parameters are the
  // coordinates reported by backward().
  Var input(double x);
  Var parameter(double x);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::span<const std::int32_t> leaves() const { return leaves_; }
  std::span<const std::int32_t> parameters() const { return params_; }

  void clear();
  void reserve(std::size_t n) { nodes_.reserve(n); }

  // Changing a leaf invalidates the cached values until forward() runs.
  void set_leaf(Var leaf, double x);
  void forward();
  bool evaluated() const { return evaluated_; }
  double value(Var v) const;

  // Seeds the adjoint of `out` and propagates to every node. Returns the
  // gradient over parameters in registration order.
  std::vector<double> backward(Var out, double seed = 1.0);
  double adjoint(Var v) const;

  // Re-evaluates the recorded graph in scalar type S. leaf_values follows the
  // order of leaves().
  template <class S>
  std::vector<S> replay(std::span<const S> leaf_values) const;

  // Reverse sweep carried in scalar type S over values from replay<S>.
  // Returns adjoints of every node.
  template <class S>
  std::vector<S> reverse(std::span<const S> values, std::int32_t out, S seed) const;

  // Recording interface used by the Var operators.
  Var push(Op op, std::int32_t a, std::int32_t b, double c, double value, double da, double db);
  std::int32_t constant(double x);

 private:
  std::vector<Node> nodes_;
  std::vector<std::int32_t> leaves_;
  std::vector<std::int32_t> params_;
  std::vector<double> adjoints_;
  bool evaluated_ = true;
  bool has_adjoints_ = false;
};

Var operator+(const Var& x, const Var& y);
Var operator-(const Var& x, const Var& y);
Var operator*(const Var& x, const Var& y);
Var operator/(const Var& x, const Var& y);
Var operator-(const Var& x);
inline Var& operator+=(Var& x, const Var& y) { return x = x + y; }
inline Var& operator-=(Var& x, const Var& y) { return x = x - y; }
inline Var& operator*=(Var& x, const Var& y) { return x = x * y; }
Var sin(const Var& x);
Var cos(const Var& x);
Var tanh(const Var& x);
Var exp(const Var& x);
Var pow(const Var& x, double c);

// Derivative of `out` with respect to leaf `input`, order 1 (dual) or
// 2 (dual over dual). Other orders throw UnsupportedOrder.
double input_derivative(const Tape& tape, Var out, Var input, int order);

// Forward-over-reverse: gradient over parameters of d^order out / d input^order.
std::vector<double> parameter_gradient_of_input_derivative(const Tape& tape, Var out, Var input,
                                                           int order);

enum class Activation { Tanh, Identity };
// Only "tanh" (hidden layers) and "identity" (output) are accepted.
Activation parse_activation(std::string_view name);

namespace detail {

template <class S>
S local_value(Op op, const S& a, const S& b, double c) {
  using std::cos;
  using std::exp;
  using std::pow;
  using std::sin;
  using std::tanh;
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    case Op::Neg: return -a;
    case Op::Sin: return sin(a);
    case Op::Cos: return cos(a);
    case Op::Tanh: return tanh(a);
    case Op::Exp: return exp(a);
    case Op::PowConst: return pow(a, c);
    default: return S(c);
  }
}

}  // namespace detail

template <class S>
std::vector<S> Tape::replay(std::span<const S> leaf_values) const {
  if (leaf_values.size() != leaves_.size()) throw InvalidInput("Tape::replay: leaf count mismatch");
  std::vector<S> v(nodes_.size());
  std::size_t next_leaf = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.op == Op::Leaf) {
      v[i] = leaf_values[next_leaf++];
    } else if (n.op == Op::Const) {
      v[i] = S(n.c);
    } else {
      const S& a = v[n.a];
      const S& b = n.b >= 0 ? v[n.b] : a;
      if (n.op == Op::Div && primal(b) == 0.0) throw EvaluationError("tape: division by zero at node " + std::to_string(i));
      v[i] = detail::local_value(n.op, a, b, n.c);
    }
  }
  return v;
}

template <class S>
std::vector<S> Tape::reverse(std::span<const S> values, std::int32_t out, S seed) const {
  using std::cos;
  using std::pow;
  using std::sin;
  std::vector<S> adj(nodes_.size(), S(0.0));
  adj[out] = seed;
  for (std::int32_t i = out; i >= 0; --i) {
    const Node& n = nodes_[i];
    if (n.op == Op::Leaf || n.op == Op::Const) continue;
    const S& g = adj[i];
    const S& a = values[n.a];
    switch (n.op) {
      case Op::Add: adj[n.a] += g; adj[n.b] += g; break;
      case Op::Sub: adj[n.a] += g; adj[n.b] -= g; break;
      case Op::Mul: adj[n.a] += g * values[n.b]; adj[n.b] += g * a; break;
      case Op::Div: {
        const S& b = values[n.b];
        adj[n.a] += g / b;
        adj[n.b] -= g * values[i] / b;
        break;
      }
      case Op::Neg: adj[n.a] -= g; break;
      case Op::Sin: adj[n.a] += g * cos(a); break;
      case Op::Cos: adj[n.a] -= g * sin(a); break;
      case Op::Tanh: adj[n.a] += g * (S(1.0) - values[i] * values[i]); break;
      case Op::Exp: adj[n.a] += g * values[i]; break;
      case Op::PowConst: adj[n.a] += g * (S(n.c) * pow(a, n.c - 1.0)); break;
      default: break;
    }
  }
  return adj;
}

}  // namespace svsnn::autodiff
