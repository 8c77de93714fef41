#include "svsnn/model/field_model.hpp"

#include <string>

#include "svsnn/error.hpp"

namespace svsnn::model {

double FieldModel::evaluate(const Site& site, const DerivSpec& spec) const {
  std::vector<double> v;
  forward(std::span<const Site>(&site, 1), std::span<const DerivSpec>(&spec, 1), v);
  return v[0];
}

void FieldModel::check_specs(std::span<const DerivSpec> specs) const {
  for (const auto& s : specs) {
    if (s.field < 0 || s.field >= field_count()) {
      throw ConfigurationError("field index " + std::to_string(s.field) + " out of range");
    }
    if (s.dt != 0 && !temporal()) throw ConfigurationError("time derivative requested from a steady model");
    if (s.dt < 0 || s.dt > 2) throw UnsupportedOrder("time derivative order must be 0, 1 or 2");
    for (int j = 0; j < 3; ++j) {
      if (s.dx[j] < 0 || s.dx[j] > 2) throw UnsupportedOrder("spatial derivative order must be 0, 1 or 2");
      if (j >= spatial_dim() && s.dx[j] != 0) throw ConfigurationError("derivative along a missing direction");
    }
  }
}

}  // namespace svsnn::model
