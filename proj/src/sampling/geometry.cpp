#include "svsnn/sampling/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "svsnn/error.hpp"

namespace svsnn::sampling {

std::vector<std::vector<double>> lhs_points(numerics::RandomSource& rs, std::size_t n,
                                            std::span<const std::pair<double, double>> box) {
  if (n < 1) throw InvalidInput("lhs_points: n must be at least 1");
  if (box.empty()) throw InvalidInput("lhs_points: empty box");
  const std::size_t d = box.size();
  std::vector<std::vector<double>> pts(n, std::vector<double>(d));
  std::vector<std::size_t> strata(n);
  for (std::size_t j = 0; j < d; ++j) {
    const auto [lo, hi] = box[j];
    if (!(lo <= hi)) throw InvalidInput("lhs_points: box lower bound above upper bound");
    std::iota(strata.begin(), strata.end(), 0);
    numerics::shuffle(strata, rs);
    const double width = (hi - lo) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = lo + width * (static_cast<double>(strata[i]) + rs.next_unit());
      // Guard the upper stratum edge against rounding up to hi.
      v = std::min(v, std::nextafter(lo + width * static_cast<double>(strata[i] + 1), lo));
      pts[i][j] = std::max(v, lo + width * static_cast<double>(strata[i]));
    }
  }
  return pts;
}

DomainGeometry DomainGeometry::rectangle(double x0, double x1, double y0, double y1) {
  DomainGeometry g;
  g.outer = Outer::Rectangle;
  g.x0 = x0;
  g.x1 = x1;
  g.y0 = y0;
  g.y1 = y1;
  return g;
}

DomainGeometry DomainGeometry::circle(double cx, double cy, double r) {
  DomainGeometry g;
  g.outer = Outer::Circle;
  g.disk = {cx, cy, r};
  return g;
}

namespace {

bool inside_outer(const DomainGeometry& g, const Point2& p) {
  if (g.outer == DomainGeometry::Outer::Rectangle) {
    return p[0] > g.x0 && p[0] < g.x1 && p[1] > g.y0 && p[1] < g.y1;
  }
  return std::hypot(p[0] - g.disk.cx, p[1] - g.disk.cy) < g.disk.r;
}

// Axis extents of a hole, used for containment and overlap checks.
struct Extent {
  double cx, cy, rx, ry;
};

std::vector<Extent> hole_extents(const DomainGeometry& g) {
  std::vector<Extent> e;
  for (const auto& c : g.circle_holes) e.push_back({c.cx, c.cy, c.r, c.r});
  for (const auto& el : g.ellipse_holes) e.push_back({el.cx, el.cy, 1.0 / std::sqrt(el.qx), 1.0 / std::sqrt(el.qy)});
  return e;
}

// Ellipse perimeter has no closed form, so a cumulative arc-length table over
// the angle parameter is inverted instead.
struct ArcTable {
  std::vector<double> theta;
  std::vector<double> cum;
  double total() const { return cum.back(); }
  double angle_at(double s) const {
    const auto it = std::lower_bound(cum.begin(), cum.end(), s);
    if (it == cum.begin()) return theta.front();
    if (it == cum.end()) return theta.back();
    const std::size_t i = static_cast<std::size_t>(it - cum.begin());
    const double f = (s - cum[i - 1]) / (cum[i] - cum[i - 1]);
    return theta[i - 1] + f * (theta[i] - theta[i - 1]);
  }
};

ArcTable ellipse_arc(double rx, double ry) {
  constexpr std::size_t m = 4096;
  ArcTable t;
  t.theta.resize(m + 1);
  t.cum.resize(m + 1);
  t.cum[0] = 0.0;
  for (std::size_t i = 0; i <= m; ++i) t.theta[i] = 2.0 * std::numbers::pi * static_cast<double>(i) / m;
  auto speed = [&](double th) { return std::hypot(rx * std::sin(th), ry * std::cos(th)); };
  for (std::size_t i = 1; i <= m; ++i) {
    // Simpson on each cell.
    const double a = t.theta[i - 1];
    const double b = t.theta[i];
    t.cum[i] = t.cum[i - 1] + (b - a) / 6.0 * (speed(a) + 4.0 * speed(0.5 * (a + b)) + speed(b));
  }
  return t;
}

void sample_closed_curve(std::size_t n, numerics::RandomSource& rs, bool jitter, double length,
                         const auto& at_arclength, int component, std::vector<LabeledPoint>& out) {
  const double spacing = length / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double offset = jitter ? rs.next_unit() : 0.0;
    out.push_back({at_arclength(spacing * (static_cast<double>(i) + offset)), component});
  }
}

}  // namespace

void DomainGeometry::validate() const {
  if (outer == Outer::Rectangle) {
    if (!(x0 < x1 && y0 < y1)) throw InvalidInput("geometry: rectangle bounds are empty");
  } else if (!(disk.r > 0.0)) {
    throw InvalidInput("geometry: outer radius must be positive");
  }
  for (const auto& c : circle_holes) {
    if (!(c.r > 0.0)) throw InvalidInput("geometry: hole radius must be positive");
  }
  for (const auto& e : ellipse_holes) {
    if (!(e.qx > 0.0 && e.qy > 0.0)) throw InvalidInput("geometry: ellipse coefficients must be positive");
  }
  const auto ext = hole_extents(*this);
  for (std::size_t i = 0; i < ext.size(); ++i) {
    const auto& h = ext[i];
    bool inside = false;
    if (outer == Outer::Rectangle) {
      inside = h.cx - h.rx > x0 && h.cx + h.rx < x1 && h.cy - h.ry > y0 && h.cy + h.ry < y1;
    } else {
      inside = std::hypot(h.cx - disk.cx, h.cy - disk.cy) + std::max(h.rx, h.ry) < disk.r;
    }
    if (!inside) throw InvalidInput("geometry: hole " + std::to_string(i) + " is not strictly inside the domain");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = ext[j];
      if (std::hypot(h.cx - o.cx, h.cy - o.cy) <= std::max(h.rx, h.ry) + std::max(o.rx, o.ry)) {
        throw InvalidInput("geometry: holes " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
      }
    }
  }
}

bool DomainGeometry::contains(const Point2& p) const {
  if (!inside_outer(*this, p)) return false;
  for (const auto& c : circle_holes) {
    if (std::hypot(p[0] - c.cx, p[1] - c.cy) <= c.r) return false;
  }
  for (const auto& e : ellipse_holes) {
    const double dx = p[0] - e.cx;
    const double dy = p[1] - e.cy;
    if (e.qx * dx * dx + e.qy * dy * dy <= 1.0) return false;
  }
  return true;
}

std::array<double, 4> DomainGeometry::bounding_box() const {
  if (outer == Outer::Rectangle) return {x0, x1, y0, y1};
  return {disk.cx - disk.r, disk.cx + disk.r, disk.cy - disk.r, disk.cy + disk.r};
}

std::vector<LabeledPoint> boundary_points(const DomainGeometry& g, std::size_t n_per_component,
                                          numerics::RandomSource& rs, bool jitter) {
  std::vector<std::size_t> counts(g.boundary_components(), n_per_component);
  return boundary_points(g, counts, rs, jitter);
}

std::vector<LabeledPoint> boundary_points(const DomainGeometry& g, std::span<const std::size_t> counts,
                                          numerics::RandomSource& rs, bool jitter) {
  g.validate();
  if (counts.size() != g.boundary_components()) {
    throw InvalidInput("boundary_points: expected one count per boundary component");
  }
  std::vector<LabeledPoint> out;
  int component = 0;
  if (counts[0] > 0) {
    if (g.outer == DomainGeometry::Outer::Rectangle) {
      const double w = g.x1 - g.x0;
      const double h = g.y1 - g.y0;
      auto at = [&](double s) -> Point2 {
        if (s < w) return {g.x0 + s, g.y0};
        s -= w;
        if (s < h) return {g.x1, g.y0 + s};
        s -= h;
        if (s < w) return {g.x1 - s, g.y1};
        s -= w;
        return {g.x0, g.y1 - std::min(s, h)};
      };
      sample_closed_curve(counts[0], rs, jitter, 2.0 * (w + h), at, component, out);
    } else {
      const auto& c = g.disk;
      auto at = [&](double s) -> Point2 { return {c.cx + c.r * std::cos(s / c.r), c.cy + c.r * std::sin(s / c.r)}; };
      sample_closed_curve(counts[0], rs, jitter, 2.0 * std::numbers::pi * c.r, at, component, out);
    }
  }
  for (const auto& c : g.circle_holes) {
    ++component;
    if (counts[component] == 0) continue;
    auto at = [&](double s) -> Point2 { return {c.cx + c.r * std::cos(s / c.r), c.cy + c.r * std::sin(s / c.r)}; };
    sample_closed_curve(counts[component], rs, jitter, 2.0 * std::numbers::pi * c.r, at, component, out);
  }
  for (const auto& e : g.ellipse_holes) {
    ++component;
    if (counts[component] == 0) continue;
    const double rx = 1.0 / std::sqrt(e.qx);
    const double ry = 1.0 / std::sqrt(e.qy);
    const ArcTable table = ellipse_arc(rx, ry);
    auto at = [&](double s) -> Point2 {
      const double th = table.angle_at(s);
      return {e.cx + rx * std::cos(th), e.cy + ry * std::sin(th)};
    };
    sample_closed_curve(counts[component], rs, jitter, table.total(), at, component, out);
  }
  return out;
}

std::vector<Point2> interior_points(const DomainGeometry& g, std::size_t n, numerics::RandomSource& rs) {
  g.validate();
  std::vector<Point2> out;
  if (n == 0) return out;
  const auto bb = g.bounding_box();
  const std::pair<double, double> box[2] = {{bb[0], bb[1]}, {bb[2], bb[3]}};
  std::size_t drawn = 0;
  while (out.size() < n) {
    const std::size_t batch = std::max<std::size_t>(n - out.size(), 64);
    const auto pts = lhs_points(rs, batch, box);
    drawn += batch;
    for (const auto& p : pts) {
      const Point2 q{p[0], p[1]};
      if (g.contains(q) && out.size() < n) out.push_back(q);
    }
    if (drawn >= 4096 && static_cast<double>(out.size()) < 1e-3 * static_cast<double>(drawn)) {
      throw GeometryDegenerate("interior_points: acceptance ratio below 1e-3");
    }
  }
  return out;
}

}  // namespace svsnn::sampling
