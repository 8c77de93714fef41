#include "svsnn/model/svsnn_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svsnn/error.hpp"
#include "svsnn/numerics/random.hpp"

namespace svsnn::model {

namespace {

constexpr int kTemporalWidths[] = {1, 10, 10, 10, 1};

struct SvSnnCache final : ModelCache {
  std::vector<Site> sites;
  std::vector<DerivSpec> specs;
  std::size_t points = 0;
  std::size_t per_site = 0;                    // sin/cos values per site
  std::vector<std::array<double, 3>> phi;      // (p * N + n) * d + j
  std::vector<double> sin;                     // p * per_site + sc_offset[n * d + j] + k
  std::vector<double> cos;
  std::vector<std::size_t> sc_offset;
  std::vector<MlpBatch> temporal;              // one batch per mode
  std::array<std::size_t, 3> dt_slot{};
};

}  // namespace

void SvSnnConfig::validate() const {
  if (modes < 1) throw InvalidInput("svsnn config: modes must be at least 1");
  if (k.empty() || k.size() > 3) throw InvalidInput("svsnn config: spatial dimension must be 1, 2 or 3");
  for (int kj : k) {
    if (kj < 1) throw InvalidInput("svsnn config: K must be at least 1 per direction");
  }
  if (fields < 1) throw InvalidInput("svsnn config: fields must be at least 1");
}

std::size_t count_parameters(const SvSnnConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.modes);
  std::size_t spatial = 0;
  for (int kj : cfg.k) spatial += 3 * static_cast<std::size_t>(kj) + 1;
  const std::size_t temporal = cfg.temporal ? temporal_shape().parameter_count() : 0;
  return n * spatial + n * temporal + static_cast<std::size_t>(cfg.fields) * n;
}

const MlpShape& temporal_shape() {
  static const MlpShape shape(std::vector<int>(std::begin(kTemporalWidths), std::end(kTemporalWidths)));
  return shape;
}

SvSnnModel::SvSnnModel(SvSnnConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const int d = cfg_.dimension();
  std::size_t off = 0;
  for (int n = 0; n < cfg_.modes; ++n) {
    for (int j = 0; j < d; ++j) {
      feature_offsets_.push_back(off);
      off += 3 * static_cast<std::size_t>(cfg_.k[j]) + 1;
    }
  }
  temporal_base_ = off;
  if (cfg_.temporal) off += static_cast<std::size_t>(cfg_.modes) * temporal_shape().parameter_count();
  coefficient_base_ = off;
  off += static_cast<std::size_t>(cfg_.fields) * cfg_.modes;
  params_.assign(off, 0.0);
}

std::size_t SvSnnModel::feature_offset(int mode, int dir) const {
  if (mode < 0 || mode >= cfg_.modes || dir < 0 || dir >= cfg_.dimension()) {
    throw InvalidInput("svsnn: feature index out of range");
  }
  return feature_offsets_[static_cast<std::size_t>(mode) * cfg_.dimension() + dir];
}

std::size_t SvSnnModel::temporal_offset(int mode) const {
  if (!cfg_.temporal) throw ConfigurationError("svsnn: model has no temporal networks");
  if (mode < 0 || mode >= cfg_.modes) throw InvalidInput("svsnn: mode index out of range");
  return temporal_base_ + static_cast<std::size_t>(mode) * temporal_shape().parameter_count();
}

std::size_t SvSnnModel::coefficient_offset(int field, int mode) const {
  if (field < 0 || field >= cfg_.fields || mode < 0 || mode >= cfg_.modes) {
    throw InvalidInput("svsnn: coefficient index out of range");
  }
  return coefficient_base_ + static_cast<std::size_t>(field) * cfg_.modes + mode;
}

spectral::FeatureView SvSnnModel::feature(int mode, int dir) const {
  const std::size_t off = feature_offset(mode, dir);
  return spectral::FeatureView::from_block(
      std::span<const double>(params_).subspan(off, 3 * static_cast<std::size_t>(cfg_.k[dir]) + 1));
}

spectral::SeparableMode SvSnnModel::mode(int n) const {
  spectral::SeparableMode m;
  for (int j = 0; j < cfg_.dimension(); ++j) {
    const auto v = feature(n, j);
    m.directions.push_back({{v.a.begin(), v.a.end()}, {v.b.begin(), v.b.end()}, {v.w.begin(), v.w.end()}, v.beta});
  }
  return m;
}

void SvSnnModel::set_mode(int n, const spectral::SeparableMode& m) {
  if (static_cast<int>(m.dimension()) != cfg_.dimension()) throw InvalidInput("svsnn: mode dimension mismatch");
  for (int j = 0; j < cfg_.dimension(); ++j) {
    const auto& f = m.directions[j];
    f.validate();
    const auto k = static_cast<std::size_t>(cfg_.k[j]);
    if (f.size() != k) throw InvalidInput("svsnn: feature size mismatch");
    double* dst = params_.data() + feature_offset(n, j);
    std::copy(f.a.begin(), f.a.end(), dst);
    std::copy(f.b.begin(), f.b.end(), dst + k);
    std::copy(f.w.begin(), f.w.end(), dst + 2 * k);
    dst[3 * k] = f.beta;
  }
}

std::vector<Segment> SvSnnModel::layout() const {
  std::vector<Segment> out;
  for (int n = 0; n < cfg_.modes; ++n) {
    for (int j = 0; j < cfg_.dimension(); ++j) {
      const std::size_t off = feature_offset(n, j);
      const auto k = static_cast<std::size_t>(cfg_.k[j]);
      const std::string base = "mode" + std::to_string(n) + ".dir" + std::to_string(j) + ".";
      out.push_back({base + "a", off, k});
      out.push_back({base + "b", off + k, k});
      out.push_back({base + "w", off + 2 * k, k});
      out.push_back({base + "beta", off + 3 * k, 1});
    }
  }
  if (cfg_.temporal) {
    const auto& shape = temporal_shape();
    for (int n = 0; n < cfg_.modes; ++n) {
      const std::size_t base = temporal_offset(n);
      for (std::size_t l = 0; l < shape.layers(); ++l) {
        const std::string name = "mode" + std::to_string(n) + ".temporal.layer" + std::to_string(l) + ".";
        out.push_back({name + "W", base + shape.weight_offset(l),
                       static_cast<std::size_t>(shape.widths()[l]) * shape.widths()[l + 1]});
        out.push_back({name + "b", base + shape.bias_offset(l), static_cast<std::size_t>(shape.widths()[l + 1])});
      }
    }
  }
  for (int f = 0; f < cfg_.fields; ++f) {
    out.push_back({"field" + std::to_string(f) + ".c", coefficient_offset(f, 0), static_cast<std::size_t>(cfg_.modes)});
  }
  return out;
}

void SvSnnModel::initialize(std::uint64_t seed, std::span<const sampling::FrequencyPlan> plans, const SvSnnInit& opts) {
  const int d = cfg_.dimension();
  if (static_cast<int>(plans.size()) != d) throw InvalidInput("svsnn: need one frequency plan per direction");
  for (int j = 0; j < d; ++j) {
    if (plans[j].k != cfg_.k[j]) throw InvalidInput("svsnn: frequency plan K differs from model K");
  }
  numerics::RandomSource freq(numerics::derive_seed(seed, "frequency"));
  numerics::RandomSource init(numerics::derive_seed(seed, "init"));
  std::fill(params_.begin(), params_.end(), 0.0);
  for (int n = 0; n < cfg_.modes; ++n) {
    for (int j = 0; j < d; ++j) {
      const auto k = static_cast<std::size_t>(cfg_.k[j]);
      double* blk = params_.data() + feature_offset(n, j);
      const double sd = 1.0 / std::sqrt(static_cast<double>(k));
      for (std::size_t i = 0; i < 2 * k; ++i) blk[i] = numerics::draw_gaussian(init, 0.0, sd);
      const auto w = sampling::three_level_frequencies(plans[j], freq);
      std::copy(w.begin(), w.end(), blk + 2 * k);
      blk[3 * k] = 0.0;
    }
  }
  if (cfg_.temporal) {
    const auto& shape = temporal_shape();
    for (int n = 0; n < cfg_.modes; ++n) {
      double* net = params_.data() + temporal_offset(n);
      for (std::size_t l = 0; l < shape.layers(); ++l) {
        const int fan_in = shape.widths()[l];
        const int fan_out = shape.widths()[l + 1];
        const double lim = std::sqrt(6.0 / (fan_in + fan_out));
        for (int i = 0; i < fan_in * fan_out; ++i) net[shape.weight_offset(l) + i] = numerics::draw_uniform(init, -lim, lim);
      }
      net[shape.bias_offset(shape.layers() - 1)] = opts.temporal_output_bias;
    }
  }
  for (int f = 0; f < cfg_.fields; ++f)
    for (int n = 0; n < cfg_.modes; ++n) params_[coefficient_offset(f, n)] = 1.0 / cfg_.modes;
}

SvSnnModel SvSnnModel::unflatten(const SvSnnConfig& cfg, std::span<const double> flat) {
  SvSnnModel m(cfg);
  if (flat.size() != m.params_.size()) {
    throw InvalidInput("svsnn: flat vector has " + std::to_string(flat.size()) + " entries, expected " +
                       std::to_string(m.params_.size()));
  }
  std::copy(flat.begin(), flat.end(), m.params_.begin());
  return m;
}

std::unique_ptr<ModelCache> SvSnnModel::forward(std::span<const Site> sites, std::span<const DerivSpec> specs,
                                                std::vector<double>& values) const {
  check_specs(specs);
  auto cache = std::make_unique<SvSnnCache>();
  const int d = cfg_.dimension();
  const int nm = cfg_.modes;
  const std::size_t np = sites.size();
  cache->sites.assign(sites.begin(), sites.end());
  cache->specs.assign(specs.begin(), specs.end());
  cache->points = np;

  std::array<int, 3> max_dx{};
  int max_dt = 0;
  for (const auto& s : specs) {
    for (int j = 0; j < d; ++j) max_dx[j] = std::max(max_dx[j], s.dx[j]);
    max_dt = std::max(max_dt, s.dt);
  }

  std::vector<spectral::FeatureView> views;
  views.reserve(static_cast<std::size_t>(nm) * d);
  cache->sc_offset.reserve(views.capacity());
  std::size_t per_site = 0;
  for (int n = 0; n < nm; ++n) {
    for (int j = 0; j < d; ++j) {
      views.push_back(feature(n, j));
      cache->sc_offset.push_back(per_site);
      per_site += static_cast<std::size_t>(cfg_.k[j]);
    }
  }
  cache->per_site = per_site;
  cache->phi.resize(np * nm * d);
  cache->sin.resize(np * per_site);
  cache->cos.resize(np * per_site);

  for (std::size_t p = 0; p < np; ++p) {
    for (int n = 0; n < nm; ++n) {
      for (int j = 0; j < d; ++j) {
        const std::size_t fj = static_cast<std::size_t>(n) * d + j;
        const std::size_t off = p * per_site + cache->sc_offset[fj];
        const std::size_t k = views[fj].size();
        spectral::feature_orders(views[fj], sites[p].x[j], max_dx[j], cache->phi[p * nm * d + fj],
                                 std::span<double>(cache->sin).subspan(off, k),
                                 std::span<double>(cache->cos).subspan(off, k));
      }
    }
  }

  if (cfg_.temporal) {
    StreamSet streams;
    if (max_dt >= 1) streams.add_first(0);
    if (max_dt >= 2) streams.add_second(0, 0);
    cache->dt_slot = {0, max_dt >= 1 ? streams.first_slot(0) : 0,
                      max_dt >= 2 ? streams.slot(InputOrders{2, 0, 0, 0}) : 0};
    Eigen::MatrixXd tin(1, static_cast<Eigen::Index>(np));
    for (std::size_t p = 0; p < np; ++p) tin(0, static_cast<Eigen::Index>(p)) = sites[p].t;
    cache->temporal.resize(nm);
    const auto& shape = temporal_shape();
    for (int n = 0; n < nm; ++n) {
      mlp_forward(shape, std::span<const double>(params_).subspan(temporal_offset(n), shape.parameter_count()), tin,
                  streams, cache->temporal[n]);
    }
  }

  const std::size_t ns = specs.size();
  values.assign(np * ns, 0.0);
  for (std::size_t p = 0; p < np; ++p) {
    for (std::size_t s = 0; s < ns; ++s) {
      const auto& spec = specs[s];
      double acc = 0.0;
      for (int n = 0; n < nm; ++n) {
        double prod = params_[coefficient_offset(spec.field, n)];
        const auto& phi = cache->phi;
        for (int j = 0; j < d; ++j) prod *= phi[(p * nm + n) * d + j][spec.dx[j]];
        if (cfg_.temporal) prod *= cache->temporal[n].at(0, cache->dt_slot[spec.dt], p);
        acc += prod;
      }
      values[p * ns + s] = acc;
    }
  }
  return cache;
}

void SvSnnModel::backward(const ModelCache& base, std::span<const double> weights, std::span<double> grad) const {
  const auto& cache = dynamic_cast<const SvSnnCache&>(base);
  const int d = cfg_.dimension();
  const int nm = cfg_.modes;
  const std::size_t np = cache.points;
  const std::size_t ns = cache.specs.size();
  if (weights.size() != np * ns) throw InvalidInput("svsnn backward: weight count mismatch");
  if (grad.size() != params_.size()) throw InvalidInput("svsnn backward: gradient size mismatch");

  std::vector<Eigen::MatrixXd> tbar;
  if (cfg_.temporal) {
    tbar.resize(nm);
    for (int n = 0; n < nm; ++n) tbar[n].setZero(1, cache.temporal[n].output().cols());
  }

  std::vector<std::array<double, 3>> g(d);
  for (std::size_t p = 0; p < np; ++p) {
    bool any = false;
    for (std::size_t s = 0; s < ns; ++s) any = any || weights[p * ns + s] != 0.0;
    if (!any) continue;
    for (int n = 0; n < nm; ++n) {
      for (auto& gj : g) gj = {0.0, 0.0, 0.0};
      const auto* phi = &cache.phi[(p * nm + n) * d];
      for (std::size_t s = 0; s < ns; ++s) {
        const double w = weights[p * ns + s];
        if (w == 0.0) continue;
        const auto& spec = cache.specs[s];
        const double tval = cfg_.temporal ? cache.temporal[n].at(0, cache.dt_slot[spec.dt], p) : 1.0;
        double prod = 1.0;
        for (int j = 0; j < d; ++j) prod *= phi[j][spec.dx[j]];
        const std::size_t ci = coefficient_offset(spec.field, n);
        const double cf = params_[ci];
        grad[ci] += w * prod * tval;
        if (cfg_.temporal) tbar[n](0, static_cast<Eigen::Index>(cache.dt_slot[spec.dt] * np + p)) += w * cf * prod;
        const double gc = w * cf * tval;
        for (int j = 0; j < d; ++j) {
          double others = 1.0;
          for (int i = 0; i < d; ++i)
            if (i != j) others *= phi[i][spec.dx[i]];
          g[j][spec.dx[j]] += gc * others;
        }
      }
      for (int j = 0; j < d; ++j) {
        if (g[j][0] == 0.0 && g[j][1] == 0.0 && g[j][2] == 0.0) continue;
        const std::size_t fj = static_cast<std::size_t>(n) * d + j;
        const std::size_t k = static_cast<std::size_t>(cfg_.k[j]);
        const std::size_t off = p * cache.per_site + cache.sc_offset[fj];
        const std::size_t fo = feature_offsets_[fj];
        spectral::accumulate_feature_grads(feature(n, j), cache.sites[p].x[j], g[j][0], g[j][1], g[j][2],
                                           std::span<const double>(cache.sin).subspan(off, k),
                                           std::span<const double>(cache.cos).subspan(off, k),
                                           grad.subspan(fo, 3 * k + 1));
      }
    }
  }

  if (cfg_.temporal) {
    const auto& shape = temporal_shape();
    for (int n = 0; n < nm; ++n) {
      const std::size_t off = temporal_offset(n);
      mlp_backward(shape, std::span<const double>(params_).subspan(off, shape.parameter_count()), cache.temporal[n],
                   tbar[n], grad.subspan(off, shape.parameter_count()));
    }
  }
}

Site SvSnnModel::make_site(std::span<const double> x, std::optional<double> t) const {
  if (static_cast<int>(x.size()) != cfg_.dimension()) throw InvalidInput("svsnn: point dimension mismatch");
  if (t.has_value() != cfg_.temporal) {
    throw ConfigurationError(cfg_.temporal ? "svsnn: time coordinate required" : "svsnn: steady model takes no time");
  }
  Site s;
  std::copy(x.begin(), x.end(), s.x.begin());
  s.t = t.value_or(0.0);
  return s;
}

double SvSnnModel::value_at(std::span<const double> x, std::optional<double> t, int field) const {
  return evaluate(make_site(x, t), DerivSpec{field, {}, 0});
}

double SvSnnModel::spatial_partial(std::span<const double> x, std::optional<double> t, int field,
                                   std::span<const int> orders) const {
  if (orders.size() != x.size()) throw InvalidInput("svsnn: orders must match point dimension");
  DerivSpec spec{field, {}, 0};
  for (std::size_t j = 0; j < orders.size(); ++j) {
    if (orders[j] < 0 || orders[j] > 2) throw UnsupportedOrder("spatial derivative order must be 0, 1 or 2");
    spec.dx[j] = orders[j];
  }
  return evaluate(make_site(x, t), spec);
}

double SvSnnModel::time_derivative(std::span<const double> x, double t, int field) const {
  if (!cfg_.temporal) throw ConfigurationError("svsnn: time derivative of a steady model");
  return evaluate(make_site(x, t), DerivSpec{field, {}, 1});
}

}  // namespace svsnn::model
