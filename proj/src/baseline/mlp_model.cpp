#include "svsnn/baseline/mlp_model.hpp"

#include <cmath>
#include <string>

#include "svsnn/autodiff/tape.hpp"
#include "svsnn/error.hpp"
#include "svsnn/numerics/random.hpp"

namespace svsnn::baseline {

using model::DerivSpec;
using model::InputOrders;
using model::Site;

namespace {

struct MlpCache final : model::ModelCache {
  model::MlpBatch batch;
  std::vector<std::size_t> slot;   // per spec
  std::vector<int> field;          // per spec
};

InputOrders orders_of(const DerivSpec& s, int d) {
  InputOrders o{};
  for (int j = 0; j < d; ++j) o[j] = s.dx[j];
  o[d] = s.dt;
  return o;
}

}  // namespace

MlpModel::MlpModel(std::vector<int> widths, int spatial_dim, bool temporal)
    : shape_(std::move(widths)), spatial_dim_(spatial_dim), temporal_(temporal) {
  if (spatial_dim < 1 || spatial_dim > 3) throw InvalidInput("mlp: spatial dimension must be 1, 2 or 3");
  const std::size_t expect = static_cast<std::size_t>(spatial_dim + (temporal ? 1 : 0));
  if (shape_.inputs() != expect) {
    throw InvalidInput("mlp: input width " + std::to_string(shape_.inputs()) + " does not match " +
                       std::to_string(expect) + " coordinates");
  }
  params_.assign(shape_.parameter_count(), 0.0);
}

void MlpModel::initialize(std::uint64_t seed) {
  numerics::RandomSource rs(numerics::derive_seed(seed, "init"));
  std::fill(params_.begin(), params_.end(), 0.0);
  for (std::size_t l = 0; l < shape_.layers(); ++l) {
    const int fan_in = shape_.widths()[l];
    const int fan_out = shape_.widths()[l + 1];
    const double lim = std::sqrt(6.0 / (fan_in + fan_out));
    for (int i = 0; i < fan_in * fan_out; ++i) params_[shape_.weight_offset(l) + i] = numerics::draw_uniform(rs, -lim, lim);
  }
}

std::unique_ptr<model::ModelCache> MlpModel::forward(std::span<const Site> sites, std::span<const DerivSpec> specs,
                                                     std::vector<double>& values) const {
  check_specs(specs);
  const int d = spatial_dim_;
  std::vector<InputOrders> orders;
  for (const auto& s : specs) {
    int total = s.dt;
    for (int j = 0; j < 3; ++j) total += s.dx[j];
    if (total > 2) throw UnsupportedOrder("mlp: total derivative order above 2");
    orders.push_back(orders_of(s, d));
  }
  auto cache = std::make_unique<MlpCache>();
  const auto streams = model::StreamSet::covering(orders);
  const auto np = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXd in(static_cast<Eigen::Index>(shape_.inputs()), np);
  for (Eigen::Index p = 0; p < np; ++p) {
    for (int j = 0; j < d; ++j) in(j, p) = sites[p].x[j];
    if (temporal_) in(d, p) = sites[p].t;
  }
  model::mlp_forward(shape_, params_, in, streams, cache->batch);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    cache->slot.push_back(streams.slot(orders[s]));
    cache->field.push_back(specs[s].field);
  }
  const std::size_t ns = specs.size();
  values.assign(sites.size() * ns, 0.0);
  for (std::size_t p = 0; p < sites.size(); ++p)
    for (std::size_t s = 0; s < ns; ++s) values[p * ns + s] = cache->batch.at(cache->field[s], cache->slot[s], p);
  return cache;
}

void MlpModel::backward(const model::ModelCache& base, std::span<const double> weights, std::span<double> grad) const {
  const auto& cache = dynamic_cast<const MlpCache&>(base);
  const std::size_t np = cache.batch.points;
  const std::size_t ns = cache.slot.size();
  if (weights.size() != np * ns) throw InvalidInput("mlp backward: weight count mismatch");
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(cache.batch.output().rows(), cache.batch.output().cols());
  for (std::size_t p = 0; p < np; ++p)
    for (std::size_t s = 0; s < ns; ++s)
      adj(cache.field[s], static_cast<Eigen::Index>(cache.slot[s] * np + p)) += weights[p * ns + s];
  model::mlp_backward(shape_, params_, cache.batch, adj, grad);
}

double MlpModel::derivative(std::span<const double> input, std::span<const int> axes, int output) const {
  using autodiff::Dual1;
  using autodiff::Dual2;
  if (input.size() != shape_.inputs()) throw InvalidInput("mlp: input width mismatch");
  if (axes.size() > 2) throw UnsupportedOrder("mlp: derivative order above 2");
  for (int a : axes) {
    if (a < 0 || static_cast<std::size_t>(a) >= shape_.inputs()) throw InvalidInput("mlp: axis out of range");
  }
  if (output < 0 || static_cast<std::size_t>(output) >= shape_.outputs()) throw InvalidInput("mlp: output out of range");
  std::vector<Dual2> x;
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double outer = (axes.size() >= 1 && axes[0] == static_cast<int>(i)) ? 1.0 : 0.0;
    const double inner = (axes.size() == 2 && axes[1] == static_cast<int>(i)) ? 1.0 : 0.0;
    x.push_back(Dual2(Dual1(input[i], inner), Dual1(outer, 0.0)));
  }
  const auto y = model::mlp_eval<Dual2, double>(shape_, params_, x)[output];
  if (axes.empty()) return y.v.v;
  if (axes.size() == 1) return y.d.v;
  return y.d.d;
}

std::vector<double> MlpModel::derivative_param_gradient(std::span<const double> input, std::span<const int> axes,
                                                        int output) const {
  using autodiff::Dual;
  using autodiff::Var;
  if (input.size() != shape_.inputs()) throw InvalidInput("mlp: input width mismatch");
  if (axes.size() > 2) throw UnsupportedOrder("mlp: derivative order above 2");
  autodiff::Tape tape;
  std::vector<Var> theta;
  theta.reserve(params_.size());
  for (double p : params_) theta.push_back(tape.parameter(p));
  // Reverse over a nested dual: Dual<Dual<Var>> carries the input derivatives
  // on the tape, which is then differentiated with respect to the parameters.
  using D2 = Dual<Dual<Var>>;
  std::vector<D2> x;
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double outer = (axes.size() >= 1 && axes[0] == static_cast<int>(i)) ? 1.0 : 0.0;
    const double inner = (axes.size() == 2 && axes[1] == static_cast<int>(i)) ? 1.0 : 0.0;
    x.push_back(D2(Dual<Var>(Var(input[i]), Var(inner)), Dual<Var>(Var(outer), Var(0.0))));
  }
  const auto y = model::mlp_eval<D2, Var>(shape_, theta, x)[output];
  const Var target = axes.empty() ? y.v.v : (axes.size() == 1 ? y.d.v : y.d.d);
  return tape.backward(target);
}

}  // namespace svsnn::baseline
