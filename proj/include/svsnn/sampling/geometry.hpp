#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "svsnn/numerics/random.hpp"

namespace svsnn::sampling {

using Point2 = std::array<double, 2>;

// Per-dimension Latin hypercube: each dimension's n values occupy the n
// equal-width strata once, in shuffled order. Result is n rows of d values.
std::vector<std::vector<double>> lhs_points(numerics::RandomSource& rs, std::size_t n,
                                            std::span<const std::pair<double, double>> box);

struct Circle {
  double cx = 0.0;
  double cy = 0.0;
  double r = 1.0;
};

// Axis-aligned ellipse qx (x - cx)^2 + qy (y - cy)^2 = 1.
struct Ellipse {
  double cx = 0.0;
  double cy = 0.0;
  double qx = 1.0;
  double qy = 1.0;
};

struct DomainGeometry {
  enum class Outer { Rectangle, Circle };
  Outer outer = Outer::Rectangle;
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;  // rectangle bounds
  Circle disk;                                     // outer circle
  std::vector<Circle> circle_holes;
  std::vector<Ellipse> ellipse_holes;

  static DomainGeometry rectangle(double x0, double x1, double y0, double y1);
  static DomainGeometry circle(double cx, double cy, double r);

  // Throws InvalidInput when a hole leaves the outer boundary or two holes overlap.
  void validate() const;
  // Strictly inside the outer boundary and strictly outside every hole.
  bool contains(const Point2& p) const;
  std::array<double, 4> bounding_box() const;  // x0, x1, y0, y1
  // Component 0 is the outer boundary, then circle holes, then ellipse holes.
  std::size_t boundary_components() const { return 1 + circle_holes.size() + ellipse_holes.size(); }
};

struct LabeledPoint {
  Point2 x{};
  int component = 0;
};

// n points per boundary component, equally spaced in arc length (perimeter
// for rectangles, starting at (x0, y0) and running counter-clockwise; angle 0
// for circles and ellipses). With jitter, each point is moved uniformly
// within its own arc-length cell, drawing from rs.
std::vector<LabeledPoint> boundary_points(const DomainGeometry& g, std::size_t n_per_component,
                                          numerics::RandomSource& rs, bool jitter = false);
// Per-component counts variant; counts.size() must equal boundary_components().
std::vector<LabeledPoint> boundary_points(const DomainGeometry& g, std::span<const std::size_t> counts,
                                          numerics::RandomSource& rs, bool jitter = false);

// Rejection sampling of LHS batches over the bounding box. Throws
// GeometryDegenerate when the acceptance ratio falls below 1e-3.
std::vector<Point2> interior_points(const DomainGeometry& g, std::size_t n, numerics::RandomSource& rs);

}  // namespace svsnn::sampling
