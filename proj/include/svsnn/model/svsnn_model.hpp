#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svsnn/model/field_model.hpp"
#include "svsnn/model/mlp_kernel.hpp"
#include "svsnn/sampling/frequency.hpp"
#include "svsnn/spectral/feature.hpp"

namespace svsnn::model {

struct SvSnnConfig {
  int modes = 1;
  std::vector<int> k;  // frequencies per direction; size is the spatial dimension
  bool temporal = false;
  int fields = 1;

  int dimension() const { return static_cast<int>(k.size()); }
  void validate() const;
};

// N * sum_j (3 K_j + 1) + [N * 251 if temporal] + fields * N
std::size_t count_parameters(const SvSnnConfig& cfg);

// Temporal networks are [1, 10, 10, 10, 1] tanh MLPs.
const MlpShape& temporal_shape();

struct Segment {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;
};

struct SvSnnInit {
  double temporal_output_bias = 1.0;
};

// u_f(x, t) = sum_n c_{f,n} prod_j phi_{n,j}(x_j) T_n(t)
//
// Flat layout: every (mode n, direction j) feature block [a, b, w, beta] in
// mode-major order, then the N temporal networks, then coefficients c_{f,n}
// in field-major order.
class SvSnnModel final : public FieldModel {
 public:
  explicit SvSnnModel(SvSnnConfig cfg);

  const SvSnnConfig& config() const { return cfg_; }

  // Frequencies from the three-level plan (one plan per direction, stream
  // "frequency"); amplitudes Gaussian(0, 1/sqrt(K)), beta = 0, c = 1/N,
  // Glorot-uniform temporal weights with zero hidden biases (stream "init").
  void initialize(std::uint64_t seed, std::span<const sampling::FrequencyPlan> plans, const SvSnnInit& opts = {});

  std::size_t feature_offset(int mode, int dir) const;
  std::size_t temporal_offset(int mode) const;
  std::size_t coefficient_offset(int field, int mode) const;
  spectral::FeatureView feature(int mode, int dir) const;
  spectral::SeparableMode mode(int n) const;
  void set_mode(int n, const spectral::SeparableMode& m);
  std::vector<Segment> layout() const;

  std::vector<double> flatten() const { return params_; }
  static SvSnnModel unflatten(const SvSnnConfig& cfg, std::span<const double> flat);

  // Point evaluation. t must be present exactly when the model is temporal.
  double value_at(std::span<const double> x, std::optional<double> t, int field) const;
  double spatial_partial(std::span<const double> x, std::optional<double> t, int field,
                         std::span<const int> orders) const;
  double time_derivative(std::span<const double> x, double t, int field) const;

  std::string kind() const override { return "svsnn"; }
  int spatial_dim() const override { return cfg_.dimension(); }
  bool temporal() const override { return cfg_.temporal; }
  int field_count() const override { return cfg_.fields; }
  std::span<const double> params() const override { return params_; }
  std::span<double> params() override { return params_; }

  std::unique_ptr<ModelCache> forward(std::span<const Site> sites, std::span<const DerivSpec> specs,
                                      std::vector<double>& values) const override;
  void backward(const ModelCache& cache, std::span<const double> weights, std::span<double> grad) const override;
  std::unique_ptr<FieldModel> clone() const override { return std::make_unique<SvSnnModel>(*this); }

 private:
  Site make_site(std::span<const double> x, std::optional<double> t) const;

  SvSnnConfig cfg_;
  std::vector<std::size_t> feature_offsets_;  // mode * d + dir
  std::size_t temporal_base_ = 0;
  std::size_t coefficient_base_ = 0;
  std::vector<double> params_;
};

}  // namespace svsnn::model
