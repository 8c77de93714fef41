#include "svsnn/model/mlp_kernel.hpp"

#include <algorithm>
#include <string>

#include "svsnn/error.hpp"

namespace svsnn::model {

using Eigen::MatrixXd;

StreamSet StreamSet::covering(std::span<const InputOrders> orders) {
  StreamSet s;
  for (const auto& o : orders) {
    int total = 0;
    std::vector<int> axes;
    for (int a = 0; a < kMaxInputs; ++a) {
      if (o[a] < 0) throw InvalidInput("StreamSet: negative derivative order");
      total += o[a];
      for (int r = 0; r < o[a]; ++r) axes.push_back(a);
    }
    if (total > 2) throw UnsupportedOrder("StreamSet: total derivative order above 2");
    if (total == 1) s.add_first(axes[0]);
    if (total == 2) s.add_second(axes[0], axes[1]);
  }
  return s;
}

void StreamSet::add_first(int axis) {
  if (axis < 0 || axis >= kMaxInputs) throw InvalidInput("StreamSet: axis out of range");
  if (std::find(first_.begin(), first_.end(), axis) == first_.end()) first_.push_back(axis);
}

void StreamSet::add_second(int a, int b) {
  if (a > b) std::swap(a, b);
  add_first(a);
  add_first(b);
  const std::array<int, 2> pair{a, b};
  if (std::find(second_.begin(), second_.end(), pair) == second_.end()) second_.push_back(pair);
}

std::size_t StreamSet::slot(const InputOrders& orders) const {
  std::vector<int> axes;
  for (int a = 0; a < kMaxInputs; ++a)
    for (int r = 0; r < orders[a]; ++r) axes.push_back(a);
  if (axes.empty()) return 0;
  if (axes.size() == 1) {
    const auto it = std::find(first_.begin(), first_.end(), axes[0]);
    if (it != first_.end()) return 1 + static_cast<std::size_t>(it - first_.begin());
  } else if (axes.size() == 2) {
    const std::array<int, 2> pair{axes[0], axes[1]};
    const auto it = std::find(second_.begin(), second_.end(), pair);
    if (it != second_.end()) return 1 + first_.size() + static_cast<std::size_t>(it - second_.begin());
  }
  throw InvalidInput("StreamSet: requested derivative stream was not evaluated");
}

std::size_t StreamSet::first_slot(int axis) const {
  const auto it = std::find(first_.begin(), first_.end(), axis);
  if (it == first_.end()) throw InvalidInput("StreamSet: no first-order stream for axis " + std::to_string(axis));
  return 1 + static_cast<std::size_t>(it - first_.begin());
}

MlpShape::MlpShape(std::vector<int> widths) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw InvalidInput("MlpShape: need at least input and output widths");
  offsets_.push_back(0);
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    if (widths_[l] < 1 || widths_[l + 1] < 1) throw InvalidInput("MlpShape: widths must be positive");
    offsets_.push_back(offsets_.back() + static_cast<std::size_t>(widths_[l]) * widths_[l + 1] +
                       widths_[l + 1]);
  }
}

std::size_t mlp_count_parameters(std::span<const int> widths) {
  return MlpShape(std::vector<int>(widths.begin(), widths.end())).parameter_count();
}

namespace {

// Copies into Eigen-owned storage: Eigen chooses packet or scalar reduction
// paths by address alignment, and the two round differently. Working only on
// aligned buffers keeps results independent of where the caller's vectors live.
MatrixXd weights(const MlpShape& shape, std::span<const double> params, std::size_t l) {
  return Eigen::Map<const MatrixXd>(params.data() + shape.weight_offset(l), shape.widths()[l + 1], shape.widths()[l]);
}

Eigen::VectorXd bias(const MlpShape& shape, std::span<const double> params, std::size_t l) {
  return Eigen::Map<const Eigen::VectorXd>(params.data() + shape.bias_offset(l), shape.widths()[l + 1]);
}

}  // namespace

void mlp_forward(const MlpShape& shape, std::span<const double> params, const MatrixXd& inputs,
                 const StreamSet& streams, MlpBatch& batch) {
  if (params.size() != shape.parameter_count()) throw InvalidInput("mlp_forward: parameter count mismatch");
  if (static_cast<std::size_t>(inputs.rows()) != shape.inputs()) throw InvalidInput("mlp_forward: input width mismatch");
  for (int a : streams.first()) {
    if (static_cast<std::size_t>(a) >= shape.inputs()) throw InvalidInput("mlp_forward: stream axis beyond inputs");
  }
  const Eigen::Index p = inputs.cols();
  const std::size_t nf = streams.first().size();
  const Eigen::Index width = p * static_cast<Eigen::Index>(streams.count());
  batch.points = static_cast<std::size_t>(p);
  batch.streams = streams;
  batch.z.resize(shape.layers());
  batch.h.resize(shape.layers() + 1);

  MatrixXd& h0 = batch.h[0];
  h0.setZero(static_cast<Eigen::Index>(shape.inputs()), width);
  h0.leftCols(p) = inputs;
  for (std::size_t i = 0; i < nf; ++i) h0.row(streams.first()[i]).segment((1 + i) * p, p).setOnes();

  for (std::size_t l = 0; l < shape.layers(); ++l) {
    MatrixXd& z = batch.z[l];
    z.noalias() = weights(shape, params, l) * batch.h[l];
    z.leftCols(p).colwise() += bias(shape, params, l);
    MatrixXd& h = batch.h[l + 1];
    if (l + 1 == shape.layers()) {
      h = z;
      continue;
    }
    h.resize(z.rows(), width);
    h.leftCols(p) = z.leftCols(p).array().tanh();
    const auto hv = h.leftCols(p).array();
    const Eigen::ArrayXXd s1 = 1.0 - hv.square();
    const Eigen::ArrayXXd s2 = -2.0 * hv * s1;
    for (std::size_t i = 0; i < nf; ++i) h.middleCols((1 + i) * p, p) = s1 * z.middleCols((1 + i) * p, p).array();
    for (std::size_t q = 0; q < streams.second().size(); ++q) {
      const auto [a, b] = streams.second()[q];
      const std::size_t ia = streams.first_slot(a);
      const std::size_t ib = streams.first_slot(b);
      const std::size_t iq = 1 + nf + q;
      h.middleCols(iq * p, p) = s2 * z.middleCols(ia * p, p).array() * z.middleCols(ib * p, p).array() +
                                s1 * z.middleCols(iq * p, p).array();
    }
  }
}

void mlp_backward(const MlpShape& shape, std::span<const double> params, const MlpBatch& batch,
                  const MatrixXd& output_adjoint, std::span<double> grad) {
  if (grad.size() != shape.parameter_count()) throw InvalidInput("mlp_backward: gradient size mismatch");
  const auto p = static_cast<Eigen::Index>(batch.points);
  const std::size_t nf = batch.streams.first().size();
  const auto& second = batch.streams.second();
  MatrixXd zbar = output_adjoint;
  for (std::size_t l = shape.layers(); l-- > 0;) {
    Eigen::Map<MatrixXd> gw(grad.data() + shape.weight_offset(l), shape.widths()[l + 1], shape.widths()[l]);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + shape.bias_offset(l), shape.widths()[l + 1]);
    const MatrixXd dw = zbar * batch.h[l].transpose();
    const Eigen::VectorXd db = zbar.leftCols(p).rowwise().sum();
    gw += dw;
    gb += db;
    if (l == 0) break;

    const MatrixXd hbar = weights(shape, params, l).transpose() * zbar;
    const MatrixXd& z = batch.z[l - 1];
    const auto hv = batch.h[l].leftCols(p).array();
    const Eigen::ArrayXXd s1 = 1.0 - hv.square();
    const Eigen::ArrayXXd s2 = -2.0 * hv * s1;
    const Eigen::ArrayXXd s3 = -2.0 * s1.square() - 2.0 * hv * s2;

    zbar.resize(hbar.rows(), hbar.cols());
    zbar.leftCols(p) = hbar.leftCols(p).array() * s1;
    for (std::size_t i = 0; i < nf; ++i) {
      const auto blk = static_cast<Eigen::Index>(1 + i) * p;
      zbar.middleCols(blk, p) = hbar.middleCols(blk, p).array() * s1;
      zbar.leftCols(p).array() += hbar.middleCols(blk, p).array() * s2 * z.middleCols(blk, p).array();
    }
    for (std::size_t q = 0; q < second.size(); ++q) {
      const auto [a, b] = second[q];
      const auto ia = static_cast<Eigen::Index>(batch.streams.first_slot(a));
      const auto ib = static_cast<Eigen::Index>(batch.streams.first_slot(b));
      const auto iq = static_cast<Eigen::Index>(1 + nf + q);
      const auto hb = hbar.middleCols(iq * p, p).array();
      const auto za = z.middleCols(ia * p, p).array();
      const auto zb = z.middleCols(ib * p, p).array();
      const auto zab = z.middleCols(iq * p, p).array();
      zbar.middleCols(iq * p, p) = hb * s1;
      zbar.middleCols(ia * p, p).array() += hb * s2 * zb;
      zbar.middleCols(ib * p, p).array() += hb * s2 * za;
      zbar.leftCols(p).array() += hb * (s3 * za * zb + s2 * zab);
    }
  }
}

}  // namespace svsnn::model
