#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

// Domains Omega and their set covariance g(y) = |Omega ∩ (Omega + y)|,
// perimeter, and directional variations. All shapes are immutable after
// construction and every operation here is pure.

namespace levyheat::geometry {

using Point = std::array<double, 3>;  // components past the dimension are 0

double norm(const Point& p);

struct Interval {
  double a = 0.0, b = 1.0;
};

struct Box {
  int dim = 2;
  std::array<double, 3> lengths{1.0, 1.0, 0.0};
  std::array<double, 3> origin{0.0, 0.0, 0.0};
};

struct Ball {
  int dim = 2;
  double radius = 1.0;
  std::array<double, 3> center{0.0, 0.0, 0.0};
};

struct Polygon {
  // Simple, counterclockwise. Validated and triangulated at construction.
  std::vector<std::array<double, 2>> vertices;
};

class Shape;

struct UnionShape {
  std::vector<Shape> members;  // pairwise disjoint, positive separation
  double min_gap = 1e-9;
};

class Shape {
 public:
  static Shape interval(double a, double b);
  static Shape box(std::vector<double> lengths,
                   std::vector<double> origin = {});
  static Shape ball(int dim, double radius, std::vector<double> center = {});
  static Shape polygon(std::vector<std::array<double, 2>> vertices);
  static Shape disjoint_union(std::vector<Shape> members, double min_gap = 1e-9);

  int dim() const;
  double volume() const;
  double perimeter() const;
  double diameter() const;  // exact for primitives, upper bound for unions

  // g(y) = |Omega ∩ (Omega + y)|
  double covariance(const Point& y) const;
  // V_u(Omega) for a unit vector u (closed forms per kind)
  double directional_variation(const Point& u) const;
  // Numerical slope lim (g(0)-g(ru))/r via a dyadic grid with Richardson
  // extrapolation; equals V_u/2.
  double covariance_slope(const Point& u) const;
  // Angular integral of the covariance slope; agrees with perimeter().
  double perimeter_via_covariance() const;

  bool contains(const Point& x) const;
  std::pair<Point, Point> bounding_box() const;

  // Hints for quadrature splitting.
  std::vector<double> radial_kinks() const;
  std::vector<double> angular_kinks() const;  // d=2 only

  const UnionShape* as_union() const;
  const Polygon* as_polygon() const;

  std::string describe() const;

  struct Impl;  // defined in geometry.cpp

 private:
  std::shared_ptr<const Impl> impl_;
  explicit Shape(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  friend double cross_volume(const Shape&, const Shape&, const Point&);
  friend double separation(const Shape&, const Shape&);
};

struct CovarianceFn {
  explicit CovarianceFn(Shape s);
  Shape shape;
  double lipschitz_bound;  // Per(Omega)/2
  double operator()(const Point& y) const { return shape.covariance(y); }
};

// |A ∩ (B + y)| for supported pairs (same-kind, or 2D box/polygon mixes).
double cross_volume(const Shape& a, const Shape& b, const Point& y);

// Euclidean gap between two shapes; negative or zero means they overlap.
double separation(const Shape& a, const Shape& b);

// Intersection area of two convex polygons (counterclockwise).
double convex_intersection_area(const std::vector<std::array<double, 2>>& p,
                                const std::vector<std::array<double, 2>>& q);

}  // namespace levyheat::geometry
