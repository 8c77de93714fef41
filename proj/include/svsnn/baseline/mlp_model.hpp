#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "svsnn/model/field_model.hpp"
#include "svsnn/model/mlp_kernel.hpp"

namespace svsnn::baseline {

// Fully connected tanh network mapping (x_1..x_d[, t]) to the fields.
class MlpModel final : public model::FieldModel {
 public:
  MlpModel(std::vector<int> widths, int spatial_dim, bool temporal);

  const model::MlpShape& shape() const { return shape_; }
  // Glorot-uniform weights, zero biases, stream "init".
  void initialize(std::uint64_t seed);

  // Single-point evaluation through nested dual numbers. `axes` lists the
  // input axes to differentiate along (empty, one or two entries).
  double derivative(std::span<const double> input, std::span<const int> axes, int output = 0) const;
  // Gradient over parameters of derivative(input, axes, output): nested duals
  // recorded on an autodiff tape (reverse over forward).
  std::vector<double> derivative_param_gradient(std::span<const double> input, std::span<const int> axes,
                                                int output = 0) const;

  std::string kind() const override { return "baseline"; }
  int spatial_dim() const override { return spatial_dim_; }
  bool temporal() const override { return temporal_; }
  int field_count() const override { return static_cast<int>(shape_.outputs()); }
  std::span<const double> params() const override { return params_; }
  std::span<double> params() override { return params_; }

  std::unique_ptr<model::ModelCache> forward(std::span<const model::Site> sites,
                                             std::span<const model::DerivSpec> specs,
                                             std::vector<double>& values) const override;
  void backward(const model::ModelCache& cache, std::span<const double> weights,
                std::span<double> grad) const override;
  std::unique_ptr<model::FieldModel> clone() const override { return std::make_unique<MlpModel>(*this); }

 private:
  model::MlpShape shape_;
  int spatial_dim_;
  bool temporal_;
  std::vector<double> params_;
};

}  // namespace svsnn::baseline
