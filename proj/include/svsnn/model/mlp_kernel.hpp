#pragma once

#include <Eigen/Core>
#include <array>
#include <span>
#include <vector>

namespace svsnn::model {

constexpr int kMaxInputs = 4;
using InputOrders = std::array<int, kMaxInputs>;  // derivative order per input axis

// Derivative streams carried through a batched network evaluation: the value,
// first derivatives along selected input axes, and second derivatives along
// selected axis pairs.
class StreamSet {
 public:
  StreamSet() = default;
  // Streams sufficient for every multi-index in `orders` (total order <= 2).
  static StreamSet covering(std::span<const InputOrders> orders);

  std::size_t count() const { return 1 + first_.size() + second_.size(); }
  const std::vector<int>& first() const { return first_; }
  const std::vector<std::array<int, 2>>& second() const { return second_; }

  // Stream index holding the given multi-index; throws InvalidInput if absent.
  std::size_t slot(const InputOrders& orders) const;
  std::size_t first_slot(int axis) const;

  void add_first(int axis);
  void add_second(int a, int b);

 private:
  std::vector<int> first_;
  std::vector<std::array<int, 2>> second_;
};

// Fully connected network, tanh on hidden layers and identity output.
// Flat parameter layout per layer l: W_l column-major (out x in), then b_l.
class MlpShape {
 public:
  MlpShape() = default;
  explicit MlpShape(std::vector<int> widths);

  const std::vector<int>& widths() const { return widths_; }
  std::size_t inputs() const { return widths_.front(); }
  std::size_t outputs() const { return widths_.back(); }
  std::size_t layers() const { return widths_.size() - 1; }
  std::size_t parameter_count() const { return offsets_.back(); }
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + static_cast<std::size_t>(widths_[layer]) * widths_[layer + 1];
  }

 private:
  std::vector<int> widths_;
  std::vector<std::size_t> offsets_;
};

std::size_t mlp_count_parameters(std::span<const int> widths);

struct MlpBatch {
  std::size_t points = 0;
  StreamSet streams;
  std::vector<Eigen::MatrixXd> z;  // pre-activations per layer (out x points*streams)
  std::vector<Eigen::MatrixXd> h;  // h[0] is the stacked input, h[l] the layer-l output
  const Eigen::MatrixXd& output() const { return h.back(); }
  // Output o, stream s, point p.
  double at(std::size_t o, std::size_t s, std::size_t p) const { return h.back()(o, s * points + p); }
};

// inputs: inputs() x points, column per point.
void mlp_forward(const MlpShape& shape, std::span<const double> params, const Eigen::MatrixXd& inputs,
                 const StreamSet& streams, MlpBatch& batch);

// output_adjoint has the layout of batch.output(). Accumulates into grad.
void mlp_backward(const MlpShape& shape, std::span<const double> params, const MlpBatch& batch,
                  const Eigen::MatrixXd& output_adjoint, std::span<double> grad);

// Scalar evaluation in any scalar type (double, Dual, Var). Used for
// single-point derivatives and as a cross-check of the batched kernel.
template <class S, class P>
std::vector<S> mlp_eval(const MlpShape& shape, std::span<const P> params, std::span<const S> input) {
  using std::tanh;
  std::vector<S> cur(input.begin(), input.end());
  for (std::size_t l = 0; l < shape.layers(); ++l) {
    const std::size_t in = shape.widths()[l];
    const std::size_t out = shape.widths()[l + 1];
    const std::size_t wo = shape.weight_offset(l);
    const std::size_t bo = shape.bias_offset(l);
    std::vector<S> next(out);
    for (std::size_t o = 0; o < out; ++o) {
      S acc = S(params[bo + o]);
      for (std::size_t i = 0; i < in; ++i) acc = acc + S(params[wo + i * out + o]) * cur[i];
      next[o] = (l + 1 < shape.layers()) ? S(tanh(acc)) : acc;
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace svsnn::model
