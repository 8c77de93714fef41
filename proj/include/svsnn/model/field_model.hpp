#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace svsnn::model {

struct Site {
  std::array<double, 3> x{};
  double t = 0.0;
};

// d^{dx_0+dx_1+dx_2+dt} u_field / dx^dx_0 dy^dx_1 dz^dx_2 dt^dt
struct DerivSpec {
  int field = 0;
  std::array<int, 3> dx{};
  int dt = 0;
  bool operator==(const DerivSpec&) const = default;
};

class ModelCache {
 public:
  virtual ~ModelCache() = default;
};

// Common interface of the spectral model and the baseline network. Both are
// evaluated in batches of sites and expose a flat parameter vector.
class FieldModel {
 public:
  virtual ~FieldModel() = default;

  virtual std::string kind() const = 0;
  virtual int spatial_dim() const = 0;
  virtual bool temporal() const = 0;
  virtual int field_count() const = 0;

  virtual std::span<const double> params() const = 0;
  virtual std::span<double> params() = 0;
  std::size_t parameter_count() const { return params().size(); }

  // values[p * specs.size() + s] = spec s evaluated at site p.
  virtual std::unique_ptr<ModelCache> forward(std::span<const Site> sites, std::span<const DerivSpec> specs,
                                              std::vector<double>& values) const = 0;
  // grad += sum_{p,s} weights[p * specs.size() + s] * d values[p, s] / d params
  virtual void backward(const ModelCache& cache, std::span<const double> weights, std::span<double> grad) const = 0;

  virtual std::unique_ptr<FieldModel> clone() const = 0;

  double evaluate(const Site& site, const DerivSpec& spec) const;

 protected:
  // Throws ConfigurationError / UnsupportedOrder for specs the model cannot serve.
  void check_specs(std::span<const DerivSpec> specs) const;
};

}  // namespace svsnn::model
