#include "svsnn/autodiff/tape.hpp"

#include <algorithm>
#include <string>

namespace svsnn::autodiff {

Var Tape::input(double x) {
  const auto i = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({Op::Leaf, -1, -1, 0.0, x, 0.0, 0.0});
  leaves_.push_back(i);
  has_adjoints_ = false;
  return {this, i, x};
}

Var Tape::parameter(double x) {
  Var v = input(x);
  params_.push_back(v.index);
  return v;
}

void Tape::clear() {
  nodes_.clear();
  leaves_.clear();
  params_.clear();
  adjoints_.clear();
  evaluated_ = true;
  has_adjoints_ = false;
}

std::int32_t Tape::constant(double x) {
  const auto i = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({Op::Const, -1, -1, x, x, 0.0, 0.0});
  return i;
}

Var Tape::push(Op op, std::int32_t a, std::int32_t b, double c, double value, double da, double db) {
  const auto i = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({op, a, b, c, value, da, db});
  has_adjoints_ = false;
  return {this, i, value};
}

void Tape::set_leaf(Var leaf, double x) {
  if (leaf.tape != this || nodes_.at(leaf.index).op != Op::Leaf) {
    throw InvalidInput("Tape::set_leaf: not a leaf of this tape");
  }
  nodes_[leaf.index].value = x;
  evaluated_ = false;
  has_adjoints_ = false;
}

void Tape::forward() {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    if (n.op == Op::Leaf || n.op == Op::Const) continue;
    const double a = nodes_[n.a].value;
    const double b = n.b >= 0 ? nodes_[n.b].value : 0.0;
    switch (n.op) {
      case Op::Add: n.value = a + b; n.da = 1.0; n.db = 1.0; break;
      case Op::Sub: n.value = a - b; n.da = 1.0; n.db = -1.0; break;
      case Op::Mul: n.value = a * b; n.da = b; n.db = a; break;
      case Op::Div:
        if (b == 0.0) throw EvaluationError("tape: division by zero at node " + std::to_string(i));
        n.value = a / b; n.da = 1.0 / b; n.db = -n.value / b;
        break;
      case Op::Neg: n.value = -a; n.da = -1.0; break;
      case Op::Sin: n.value = std::sin(a); n.da = std::cos(a); break;
      case Op::Cos: n.value = std::cos(a); n.da = -std::sin(a); break;
      case Op::Tanh: n.value = std::tanh(a); n.da = 1.0 - n.value * n.value; break;
      case Op::Exp: n.value = std::exp(a); n.da = n.value; break;
      case Op::PowConst:
        if ((a < 0.0 && n.c != std::floor(n.c)) || (a == 0.0 && n.c < 1.0 && n.c != 0.0)) {
          throw EvaluationError("tape: pow domain violation at node " + std::to_string(i));
        }
        n.value = std::pow(a, n.c);
        n.da = n.c == 0.0 ? 0.0 : n.c * std::pow(a, n.c - 1.0);
        break;
      default: break;
    }
  }
  evaluated_ = true;
}

double Tape::value(Var v) const {
  if (v.tape == nullptr) return v.value;
  if (!evaluated_) throw StateError("Tape::value: tape not evaluated");
  return nodes_.at(v.index).value;
}

std::vector<double> Tape::backward(Var out, double seed) {
  if (!evaluated_) throw StateError("Tape::backward: tape not evaluated");
  adjoints_.assign(nodes_.size(), 0.0);
  if (out.tape == this) {
    adjoints_[out.index] = seed;
    for (std::int32_t i = out.index; i >= 0; --i) {
      const Node& n = nodes_[i];
      const double g = adjoints_[i];
      if (g == 0.0 || n.op == Op::Leaf || n.op == Op::Const) continue;
      adjoints_[n.a] += g * n.da;
      if (n.b >= 0) adjoints_[n.b] += g * n.db;
    }
  } else if (out.tape != nullptr) {
    throw InvalidInput("Tape::backward: output belongs to another tape");
  }
  has_adjoints_ = true;
  std::vector<double> grad(params_.size());
  for (std::size_t k = 0; k < params_.size(); ++k) grad[k] = adjoints_[params_[k]];
  return grad;
}

double Tape::adjoint(Var v) const {
  if (!has_adjoints_) throw StateError("Tape::adjoint: backward has not run");
  if (v.tape == nullptr) return 0.0;
  return adjoints_.at(v.index);
}

namespace {

Tape* common_tape(const Var& x, const Var& y) {
  if (x.tape && y.tape && x.tape != y.tape) throw InvalidInput("tape: operands from different tapes");
  return x.tape ? x.tape : y.tape;
}

std::int32_t index_on(Tape* t, const Var& x) { return x.tape ? x.index : t->constant(x.value); }

Var binary(Op op, const Var& x, const Var& y, double value, double da, double db) {
  Tape* t = common_tape(x, y);
  if (t == nullptr) return Var(value);
  const auto a = index_on(t, x);
  const auto b = index_on(t, y);
  return t->push(op, a, b, 0.0, value, da, db);
}

Var unary(Op op, const Var& x, double c, double value, double da) {
  if (x.tape == nullptr) return Var(value);
  return x.tape->push(op, x.index, -1, c, value, da, 0.0);
}

}  // namespace

Var operator+(const Var& x, const Var& y) { return binary(Op::Add, x, y, x.value + y.value, 1.0, 1.0); }
Var operator-(const Var& x, const Var& y) { return binary(Op::Sub, x, y, x.value - y.value, 1.0, -1.0); }
Var operator*(const Var& x, const Var& y) { return binary(Op::Mul, x, y, x.value * y.value, y.value, x.value); }
Var operator/(const Var& x, const Var& y) {
  if (y.value == 0.0) throw EvaluationError("tape: division by zero");
  const double q = x.value / y.value;
  return binary(Op::Div, x, y, q, 1.0 / y.value, -q / y.value);
}
Var operator-(const Var& x) { return unary(Op::Neg, x, 0.0, -x.value, -1.0); }
Var sin(const Var& x) { return unary(Op::Sin, x, 0.0, std::sin(x.value), std::cos(x.value)); }
Var cos(const Var& x) { return unary(Op::Cos, x, 0.0, std::cos(x.value), -std::sin(x.value)); }
Var tanh(const Var& x) {
  const double h = std::tanh(x.value);
  return unary(Op::Tanh, x, 0.0, h, 1.0 - h * h);
}
Var exp(const Var& x) {
  const double e = std::exp(x.value);
  return unary(Op::Exp, x, 0.0, e, e);
}
Var pow(const Var& x, double c) {
  const double a = x.value;
  if (a < 0.0 && c != std::floor(c)) throw EvaluationError("tape: pow of negative base");
  if (a == 0.0 && c < 1.0 && c != 0.0) throw EvaluationError("tape: pow derivative undefined at 0");
  return unary(Op::PowConst, x, c, std::pow(a, c), c == 0.0 ? 0.0 : c * std::pow(a, c - 1.0));
}

namespace {

template <class S>
std::vector<S> seeded_leaves(const Tape& tape, std::int32_t input_node) {
  std::vector<S> leaves;
  leaves.reserve(tape.leaves().size());
  for (auto node : tape.leaves()) {
    const double x = tape.nodes()[node].value;
    S s(x);
    if (node == input_node) {
      if constexpr (std::is_same_v<S, Dual1>) {
        s = Dual1(x, 1.0);
      } else {
        s = Dual2(Dual1(x, 1.0), Dual1(1.0, 0.0));
      }
    }
    leaves.push_back(s);
  }
  return leaves;
}

void check_order(int order) {
  if (order != 1 && order != 2) {
    throw UnsupportedOrder("input derivative order must be 1 or 2, got " + std::to_string(order));
  }
}

void check_handles(const Tape& tape, Var out, Var input) {
  if (input.tape != &tape || tape.nodes().at(input.index).op != Op::Leaf) {
    throw InvalidInput("input_derivative: input is not a leaf of this tape");
  }
  if (out.tape != nullptr && out.tape != &tape) throw InvalidInput("input_derivative: foreign output");
  if (!tape.evaluated()) throw StateError("input_derivative: tape not evaluated");
}

}  // namespace

double input_derivative(const Tape& tape, Var out, Var input, int order) {
  check_order(order);
  check_handles(tape, out, input);
  if (out.tape == nullptr) return 0.0;
  if (order == 1) {
    const auto leaves = seeded_leaves<Dual1>(tape, input.index);
    return tape.replay<Dual1>(leaves)[out.index].d;
  }
  const auto leaves = seeded_leaves<Dual2>(tape, input.index);
  return tape.replay<Dual2>(leaves)[out.index].d.d;
}

std::vector<double> parameter_gradient_of_input_derivative(const Tape& tape, Var out, Var input,
                                                           int order) {
  check_order(order);
  check_handles(tape, out, input);
  std::vector<double> grad(tape.parameters().size(), 0.0);
  if (out.tape == nullptr) return grad;
  if (order == 1) {
    const auto leaves = seeded_leaves<Dual1>(tape, input.index);
    const auto values = tape.replay<Dual1>(leaves);
    const auto adj = tape.reverse<Dual1>(values, out.index, Dual1(1.0));
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] = adj[tape.parameters()[k]].d;
    return grad;
  }
  const auto leaves = seeded_leaves<Dual2>(tape, input.index);
  const auto values = tape.replay<Dual2>(leaves);
  const auto adj = tape.reverse<Dual2>(values, out.index, Dual2(1.0));
  for (std::size_t k = 0; k < grad.size(); ++k) grad[k] = adj[tape.parameters()[k]].d.d;
  return grad;
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "identity" || name == "linear") return Activation::Identity;
  throw InvalidInput("unsupported activation '" + std::string(name) + "'; only tanh is available");
}

}  // namespace svsnn::autodiff
