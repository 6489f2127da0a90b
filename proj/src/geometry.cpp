#include "levyheat/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "levyheat/quadrature.hpp"

namespace levyheat::geometry {

namespace {

constexpr double kPi = 3.14159265358979323846;

using P2 = std::array<double, 2>;
using Tri = std::array<P2, 3>;

double cross(const P2& o, const P2& a, const P2& b) {
  const long double v = (static_cast<long double>(a[0]) - o[0]) *
                            (static_cast<long double>(b[1]) - o[1]) -
                        (static_cast<long double>(a[1]) - o[1]) *
                            (static_cast<long double>(b[0]) - o[0]);
  return static_cast<double>(v);
}

double shoelace(const std::vector<P2>& pts) {
  long double s = 0.0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const P2& p = pts[i];
    const P2& q = pts[(i + 1) % n];
    s += static_cast<long double>(p[0]) * q[1] -
         static_cast<long double>(q[0]) * p[1];
  }
  return static_cast<double>(s / 2.0L);
}

double poly_scale(const std::vector<P2>& pts) {
  double m = 0.0;
  for (const auto& p : pts) m = std::max({m, std::abs(p[0]), std::abs(p[1])});
  return std::max(m, 1.0);
}

bool segments_intersect(const P2& a, const P2& b, const P2& c, const P2& d,
                        double eps) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  if (((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) &&
      ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps)))
    return true;
  auto on_segment = [&](const P2& p, const P2& q, const P2& r) {
    if (std::abs(cross(p, q, r)) > eps) return false;
    return r[0] >= std::min(p[0], q[0]) - eps && r[0] <= std::max(p[0], q[0]) + eps &&
           r[1] >= std::min(p[1], q[1]) - eps && r[1] <= std::max(p[1], q[1]) + eps;
  };
  if (on_segment(c, d, a) || on_segment(c, d, b) || on_segment(a, b, c) ||
      on_segment(a, b, d))
    return true;
  return false;
}

bool point_in_poly(const std::vector<P2>& poly, const P2& pt) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const P2& a = poly[i];
    const P2& b = poly[j];
    if ((a[1] > pt[1]) != (b[1] > pt[1])) {
      const double x = (b[0] - a[0]) * (pt[1] - a[1]) / (b[1] - a[1]) + a[0];
      if (pt[0] < x) in = !in;
    }
  }
  return in;
}

double dist_point_segment(const P2& p, const P2& a, const P2& b) {
  const double vx = b[0] - a[0], vy = b[1] - a[1];
  const double wx = p[0] - a[0], wy = p[1] - a[1];
  const double vv = vx * vx + vy * vy;
  double s = vv > 0 ? (wx * vx + wy * vy) / vv : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  const double dx = wx - s * vx, dy = wy - s * vy;
  return std::hypot(dx, dy);
}

void validate_polygon(const std::vector<P2>& v) {
  if (v.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  const double scale = poly_scale(v);
  const double eps = 1e-12 * scale * scale;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const P2& p = v[i];
    const P2& q = v[(i + 1) % n];
    if (std::hypot(q[0] - p[0], q[1] - p[1]) <= 1e-12 * scale)
      throw std::invalid_argument("polygon has a degenerate edge");
  }
  if (shoelace(v) <= eps)
    throw std::invalid_argument("polygon must be counterclockwise with positive area");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Skip adjacent edges (they share an endpoint).
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n], eps))
        throw std::invalid_argument("polygon is not simple");
    }
  }
}

std::vector<Tri> triangulate(std::vector<P2> poly) {
  std::vector<Tri> out;
  const double scale = poly_scale(poly);
  const double eps = 1e-12 * scale * scale;
  int guard = static_cast<int>(poly.size() * poly.size()) + 16;
  while (poly.size() > 3 && guard-- > 0) {
    bool clipped = false;
    const std::size_t n = poly.size();
    // Pass 1 demands a strictly convex corner and blocks on the closed
    // triangle (a reflex vertex exactly on the ear diagonal must block);
    // pass 2 relaxes to collinear corners with open-triangle blocking so
    // collinear chains cannot deadlock the clip loop.
    for (int pass = 0; pass < 2 && !clipped; ++pass) {
      for (std::size_t i = 0; i < n; ++i) {
        const P2& a = poly[(i + n - 1) % n];
        const P2& b = poly[i];
        const P2& c = poly[(i + 1) % n];
        const double corner = cross(a, b, c);
        if (pass == 0 ? corner <= eps : corner < -eps) continue;
        bool ear = true;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i || j == (i + n - 1) % n || j == (i + 1) % n) continue;
          const P2& p = poly[j];
          const bool blocks =
              pass == 0
                  ? (cross(a, b, p) >= -eps && cross(b, c, p) >= -eps &&
                     cross(c, a, p) >= -eps)
                  : (cross(a, b, p) > eps && cross(b, c, p) > eps &&
                     cross(c, a, p) > eps);
          if (blocks) {
            ear = false;
            break;
          }
        }
        if (!ear) continue;
        if (corner > eps) out.push_back({a, b, c});
        poly.erase(poly.begin() + static_cast<std::ptrdiff_t>(i));
        clipped = true;
        break;
      }
    }
    if (!clipped) throw std::runtime_error("triangulation failed (degenerate polygon)");
  }
  if (poly.size() == 3 && cross(poly[0], poly[1], poly[2]) > eps)
    out.push_back({poly[0], poly[1], poly[2]});
  return out;
}

// Sutherland-Hodgman clip of convex subject against convex clipper (both CCW).
double clip_area(const std::vector<P2>& subject, const std::vector<P2>& clipper) {
  const double scale = std::max(poly_scale(subject), poly_scale(clipper));
  const double eps = 1e-12 * scale * scale;
  std::vector<P2> cur = subject;
  std::vector<P2> next;
  const std::size_t m = clipper.size();
  for (std::size_t e = 0; e < m && !cur.empty(); ++e) {
    const P2& ca = clipper[e];
    const P2& cb = clipper[(e + 1) % m];
    next.clear();
    const std::size_t k = cur.size();
    for (std::size_t i = 0; i < k; ++i) {
      const P2& p = cur[i];
      const P2& q = cur[(i + 1) % k];
      const double sp = cross(ca, cb, p);
      const double sq = cross(ca, cb, q);
      const bool pin = sp >= -eps;
      const bool qin = sq >= -eps;
      if (pin) next.push_back(p);
      if (pin != qin) {
        const double denom = sp - sq;
        if (std::abs(denom) > 0.0) {
          const double u = sp / denom;
          next.push_back({p[0] + u * (q[0] - p[0]), p[1] + u * (q[1] - p[1])});
        }
      }
    }
    cur = next;
  }
  if (cur.size() < 3) return 0.0;
  return std::abs(shoelace(cur));
}

double lens_1d(double r1, double r2, double d) {
  const double lo = std::max(-r1, d - r2);
  const double hi = std::min(r1, d + r2);
  return std::max(0.0, hi - lo);
}

double lens_2d(double R, double r, double d) {
  if (d >= R + r) return 0.0;
  const double small = std::min(R, r);
  if (d <= std::abs(R - r)) return kPi * small * small;
  const double d1 = (d * d - r * r + R * R) / (2.0 * d);
  const double d2 = d - d1;
  auto seg = [](double rad, double h) {
    const double c = std::clamp(h / rad, -1.0, 1.0);
    return rad * rad * std::acos(c) - h * std::sqrt(std::max(0.0, rad * rad - h * h));
  };
  return seg(R, d1) + seg(r, d2);
}

double lens_3d(double R, double r, double d) {
  if (d >= R + r) return 0.0;
  const double small = std::min(R, r);
  if (d <= std::abs(R - r)) return 4.0 / 3.0 * kPi * small * small * small;
  const double t = R + r - d;
  return kPi * t * t *
         (d * d + 2.0 * d * r - 3.0 * r * r + 2.0 * d * R + 6.0 * r * R -
          3.0 * R * R) /
         (12.0 * d);
}

double lens(int dim, double r1, double r2, double d) {
  switch (dim) {
    case 1:
      return lens_1d(r1, r2, d);
    case 2:
      return lens_2d(r1, r2, d);
    case 3:
      return lens_3d(r1, r2, d);
    default:
      throw std::invalid_argument("ball dimension must be 1..3");
  }
}

double ball_volume(int dim, double r) {
  switch (dim) {
    case 1:
      return 2.0 * r;
    case 2:
      return kPi * r * r;
    default:
      return 4.0 / 3.0 * kPi * r * r * r;
  }
}

double ball_perimeter(int dim, double r) {
  switch (dim) {
    case 1:
      return 2.0;
    case 2:
      return 2.0 * kPi * r;
    default:
      return 4.0 * kPi * r * r;
  }
}

std::vector<P2> box_to_poly(const Box& b) {
  const double x0 = b.origin[0], y0 = b.origin[1];
  const double x1 = x0 + b.lengths[0], y1 = y0 + b.lengths[1];
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

}  // namespace

double norm(const Point& p) {
  return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
}

struct Shape::Impl {
  std::variant<Interval, Box, Ball, Polygon, UnionShape> v;
  int dim = 1;
  double volume = 0.0;
  double perimeter = 0.0;
  double diameter = 0.0;
  Point bb_lo{0, 0, 0}, bb_hi{0, 0, 0};
  std::vector<Tri> triangles;  // polygon only
};

namespace {

std::vector<Tri> translated(const std::vector<Tri>& tris, double dx, double dy) {
  std::vector<Tri> out = tris;
  for (auto& t : out)
    for (auto& p : t) {
      p[0] += dx;
      p[1] += dy;
    }
  return out;
}

double tri_pair_area(const std::vector<Tri>& a, const std::vector<Tri>& b) {
  double total = 0.0;
  for (const auto& ta : a) {
    for (const auto& tb : b) {
      std::vector<P2> sa(ta.begin(), ta.end());
      std::vector<P2> sb(tb.begin(), tb.end());
      total += clip_area(sa, sb);
    }
  }
  return total;
}

const std::vector<Tri>& triangles_of(const Shape::Impl& impl) {
  return impl.triangles;
}

}  // namespace

Shape Shape::interval(double a, double b) {
  if (!(a < b)) throw std::invalid_argument("interval requires a < b");
  auto impl = std::make_shared<Impl>();
  impl->v = Interval{a, b};
  impl->dim = 1;
  impl->volume = b - a;
  impl->perimeter = 2.0;
  impl->diameter = b - a;
  impl->bb_lo = {a, 0, 0};
  impl->bb_hi = {b, 0, 0};
  return Shape(std::move(impl));
}

Shape Shape::box(std::vector<double> lengths, std::vector<double> origin) {
  const int d = static_cast<int>(lengths.size());
  if (d < 1 || d > 3) throw std::invalid_argument("box dimension must be 1..3");
  if (!origin.empty() && static_cast<int>(origin.size()) != d)
    throw std::invalid_argument("box origin dimension mismatch");
  Box b;
  b.dim = d;
  for (int i = 0; i < d; ++i) {
    if (!(lengths[static_cast<std::size_t>(i)] > 0.0))
      throw std::invalid_argument("box lengths must be positive");
    b.lengths[static_cast<std::size_t>(i)] = lengths[static_cast<std::size_t>(i)];
    b.origin[static_cast<std::size_t>(i)] =
        origin.empty() ? 0.0 : origin[static_cast<std::size_t>(i)];
  }
  auto impl = std::make_shared<Impl>();
  impl->dim = d;
  double vol = 1.0, diag = 0.0;
  for (int i = 0; i < d; ++i) {
    vol *= b.lengths[static_cast<std::size_t>(i)];
    diag += b.lengths[static_cast<std::size_t>(i)] * b.lengths[static_cast<std::size_t>(i)];
  }
  double per = 0.0;
  if (d == 1) {
    per = 2.0;
  } else {
    for (int i = 0; i < d; ++i) {
      double face = 1.0;
      for (int j = 0; j < d; ++j)
        if (j != i) face *= b.lengths[static_cast<std::size_t>(j)];
      per += 2.0 * face;
    }
  }
  impl->volume = vol;
  impl->perimeter = per;
  impl->diameter = std::sqrt(diag);
  for (int i = 0; i < 3; ++i) {
    impl->bb_lo[static_cast<std::size_t>(i)] = b.origin[static_cast<std::size_t>(i)];
    impl->bb_hi[static_cast<std::size_t>(i)] =
        b.origin[static_cast<std::size_t>(i)] + b.lengths[static_cast<std::size_t>(i)];
  }
  impl->v = b;
  return Shape(std::move(impl));
}

Shape Shape::ball(int dim, double radius, std::vector<double> center) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("ball dimension must be 1..3");
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  if (!center.empty() && static_cast<int>(center.size()) != dim)
    throw std::invalid_argument("ball center dimension mismatch");
  Ball b;
  b.dim = dim;
  b.radius = radius;
  for (int i = 0; i < dim; ++i)
    b.center[static_cast<std::size_t>(i)] =
        center.empty() ? 0.0 : center[static_cast<std::size_t>(i)];
  auto impl = std::make_shared<Impl>();
  impl->dim = dim;
  impl->volume = ball_volume(dim, radius);
  impl->perimeter = ball_perimeter(dim, radius);
  impl->diameter = 2.0 * radius;
  for (int i = 0; i < 3; ++i) {
    impl->bb_lo[static_cast<std::size_t>(i)] =
        b.center[static_cast<std::size_t>(i)] - (i < dim ? radius : 0.0);
    impl->bb_hi[static_cast<std::size_t>(i)] =
        b.center[static_cast<std::size_t>(i)] + (i < dim ? radius : 0.0);
  }
  impl->v = b;
  return Shape(std::move(impl));
}

Shape Shape::polygon(std::vector<std::array<double, 2>> vertices) {
  validate_polygon(vertices);
  auto impl = std::make_shared<Impl>();
  impl->dim = 2;
  impl->volume = shoelace(vertices);
  double per = 0.0, diam = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const P2& p = vertices[i];
    const P2& q = vertices[(i + 1) % n];
    per += std::hypot(q[0] - p[0], q[1] - p[1]);
    for (std::size_t j = i + 1; j < n; ++j)
      diam = std::max(diam, std::hypot(vertices[j][0] - p[0], vertices[j][1] - p[1]));
  }
  impl->perimeter = per;
  impl->diameter = diam;
  impl->bb_lo = {vertices[0][0], vertices[0][1], 0};
  impl->bb_hi = impl->bb_lo;
  for (const auto& p : vertices) {
    impl->bb_lo[0] = std::min(impl->bb_lo[0], p[0]);
    impl->bb_lo[1] = std::min(impl->bb_lo[1], p[1]);
    impl->bb_hi[0] = std::max(impl->bb_hi[0], p[0]);
    impl->bb_hi[1] = std::max(impl->bb_hi[1], p[1]);
  }
  impl->triangles = triangulate(vertices);
  impl->v = Polygon{std::move(vertices)};
  return Shape(std::move(impl));
}

namespace {

enum class KindTag { interval, box, ball, polygon, union_ };

KindTag kind_of(const Shape::Impl& impl) {
  if (std::holds_alternative<Interval>(impl.v)) return KindTag::interval;
  if (std::holds_alternative<Box>(impl.v)) return KindTag::box;
  if (std::holds_alternative<Ball>(impl.v)) return KindTag::ball;
  if (std::holds_alternative<Polygon>(impl.v)) return KindTag::polygon;
  return KindTag::union_;
}

}  // namespace

double separation(const Shape& a, const Shape& b);

Shape Shape::disjoint_union(std::vector<Shape> members, double min_gap) {
  if (members.size() < 2)
    throw std::invalid_argument("union requires at least two members");
  // Flatten nested unions.
  std::vector<Shape> flat;
  for (auto& m : members) {
    if (const UnionShape* u = m.as_union()) {
      for (const auto& inner : u->members) flat.push_back(inner);
    } else {
      flat.push_back(m);
    }
  }
  const int d = flat[0].dim();
  for (const auto& m : flat)
    if (m.dim() != d)
      throw std::invalid_argument("union members must share dimension");
  for (std::size_t i = 0; i < flat.size(); ++i) {
    for (std::size_t j = i + 1; j < flat.size(); ++j) {
      const double gap = separation(flat[i], flat[j]);
      if (!(gap >= min_gap)) {
        std::ostringstream os;
        os << "union members " << i << " and " << j
           << " are not separated by the minimal gap (" << gap << " < " << min_gap
           << ")";
        throw std::invalid_argument(os.str());
      }
    }
  }
  auto impl = std::make_shared<Impl>();
  impl->dim = d;
  impl->bb_lo = flat[0].bounding_box().first;
  impl->bb_hi = flat[0].bounding_box().second;
  for (const auto& m : flat) {
    impl->volume += m.volume();
    impl->perimeter += m.perimeter();
    auto [lo, hi] = m.bounding_box();
    for (int i = 0; i < 3; ++i) {
      impl->bb_lo[static_cast<std::size_t>(i)] =
          std::min(impl->bb_lo[static_cast<std::size_t>(i)], lo[static_cast<std::size_t>(i)]);
      impl->bb_hi[static_cast<std::size_t>(i)] =
          std::max(impl->bb_hi[static_cast<std::size_t>(i)], hi[static_cast<std::size_t>(i)]);
    }
  }
  double diag = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double w = impl->bb_hi[static_cast<std::size_t>(i)] -
                     impl->bb_lo[static_cast<std::size_t>(i)];
    diag += w * w;
  }
  impl->diameter = std::sqrt(diag);  // bounding-box bound
  impl->v = UnionShape{std::move(flat), min_gap};
  return Shape(std::move(impl));
}

int Shape::dim() const { return impl_->dim; }
double Shape::volume() const { return impl_->volume; }
double Shape::perimeter() const { return impl_->perimeter; }
double Shape::diameter() const { return impl_->diameter; }

const UnionShape* Shape::as_union() const {
  return std::get_if<UnionShape>(&impl_->v);
}

const Polygon* Shape::as_polygon() const {
  return std::get_if<Polygon>(&impl_->v);
}

std::pair<Point, Point> Shape::bounding_box() const {
  return {impl_->bb_lo, impl_->bb_hi};
}

double cross_volume(const Shape& a, const Shape& b, const Point& y) {
  const auto& ia = *a.impl_;
  const auto& ib = *b.impl_;
  const KindTag ka = kind_of(ia), kb = kind_of(ib);
  if (ka == KindTag::interval && kb == KindTag::interval) {
    const auto& s = std::get<Interval>(ia.v);
    const auto& t = std::get<Interval>(ib.v);
    const double lo = std::max(s.a, t.a + y[0]);
    const double hi = std::min(s.b, t.b + y[0]);
    return std::max(0.0, hi - lo);
  }
  if (ka == KindTag::box && kb == KindTag::box) {
    const auto& s = std::get<Box>(ia.v);
    const auto& t = std::get<Box>(ib.v);
    double vol = 1.0;
    for (int i = 0; i < s.dim; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double lo = std::max(s.origin[k], t.origin[k] + y[k]);
      const double hi = std::min(s.origin[k] + s.lengths[k], t.origin[k] + t.lengths[k] + y[k]);
      if (hi <= lo) return 0.0;
      vol *= hi - lo;
    }
    return vol;
  }
  if (ka == KindTag::ball && kb == KindTag::ball) {
    const auto& s = std::get<Ball>(ia.v);
    const auto& t = std::get<Ball>(ib.v);
    double d2 = 0.0;
    for (int i = 0; i < s.dim; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double diff = s.center[k] - (t.center[k] + y[k]);
      d2 += diff * diff;
    }
    return lens(s.dim, s.radius, t.radius, std::sqrt(d2));
  }
  const bool a_polyish = (ka == KindTag::polygon || (ka == KindTag::box && ia.dim == 2));
  const bool b_polyish = (kb == KindTag::polygon || (kb == KindTag::box && ib.dim == 2));
  if (a_polyish && b_polyish) {
    std::vector<Tri> ta, tb;
    if (ka == KindTag::polygon) {
      ta = triangles_of(ia);
    } else {
      auto poly = box_to_poly(std::get<Box>(ia.v));
      ta = triangulate(poly);
    }
    if (kb == KindTag::polygon) {
      tb = triangles_of(ib);
    } else {
      auto poly = box_to_poly(std::get<Box>(ib.v));
      tb = triangulate(poly);
    }
    return tri_pair_area(ta, translated(tb, y[0], y[1]));
  }
  throw std::invalid_argument("cross_volume: unsupported shape pair");
}

double Shape::covariance(const Point& y) const {
  const auto& impl = *impl_;
  switch (kind_of(impl)) {
    case KindTag::interval: {
      const auto& s = std::get<Interval>(impl.v);
      return std::max(0.0, (s.b - s.a) - std::abs(y[0]));
    }
    case KindTag::box: {
      const auto& s = std::get<Box>(impl.v);
      double vol = 1.0;
      for (int i = 0; i < s.dim; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double o = s.lengths[k] - std::abs(y[k]);
        if (o <= 0.0) return 0.0;
        vol *= o;
      }
      return vol;
    }
    case KindTag::ball: {
      const auto& s = std::get<Ball>(impl.v);
      double d2 = 0.0;
      for (int i = 0; i < s.dim; ++i) d2 += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
      return lens(s.dim, s.radius, s.radius, std::sqrt(d2));
    }
    case KindTag::polygon: {
      const auto& tris = impl.triangles;
      return tri_pair_area(tris, translated(tris, y[0], y[1]));
    }
    case KindTag::union_: {
      const auto& u = std::get<UnionShape>(impl.v);
      double total = 0.0;
      const std::size_t n = u.members.size();
      for (std::size_t i = 0; i < n; ++i) {
        total += u.members[i].covariance(y);
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          // Cross term only contributes when the translate of member j can
          // reach member i.
          auto [lo_i, hi_i] = u.members[i].bounding_box();
          auto [lo_j, hi_j] = u.members[j].bounding_box();
          bool feasible = true;
          for (int k = 0; k < impl.dim; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            if (lo_j[kk] + y[kk] > hi_i[kk] || hi_j[kk] + y[kk] < lo_i[kk]) {
              feasible = false;
              break;
            }
          }
          if (feasible) total += cross_volume(u.members[i], u.members[j], y);
        }
      }
      return total;
    }
  }
  return 0.0;
}

double Shape::directional_variation(const Point& u) const {
  if (std::abs(norm(u) - 1.0) > 1e-9)
    throw std::invalid_argument("directional_variation requires a unit vector");
  const auto& impl = *impl_;
  switch (kind_of(impl)) {
    case KindTag::interval:
      return 2.0;
    case KindTag::box: {
      const auto& s = std::get<Box>(impl.v);
      double total = 0.0;
      for (int i = 0; i < s.dim; ++i) {
        double face = 1.0;
        for (int j = 0; j < s.dim; ++j)
          if (j != i) face *= s.lengths[static_cast<std::size_t>(j)];
        total += 2.0 * std::abs(u[static_cast<std::size_t>(i)]) * face;
      }
      return total;
    }
    case KindTag::ball: {
      const auto& s = std::get<Ball>(impl.v);
      switch (s.dim) {
        case 1:
          return 2.0;
        case 2:
          return 4.0 * s.radius;
        default:
          return 2.0 * kPi * s.radius * s.radius;
      }
    }
    case KindTag::polygon: {
      const auto& p = std::get<Polygon>(impl.v);
      const std::size_t n = p.vertices.size();
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const P2& a = p.vertices[i];
        const P2& b = p.vertices[(i + 1) % n];
        total += std::abs((b[1] - a[1]) * u[0] - (b[0] - a[0]) * u[1]);
      }
      return total;
    }
    case KindTag::union_: {
      const auto& un = std::get<UnionShape>(impl.v);
      double total = 0.0;
      for (const auto& m : un.members) total += m.directional_variation(u);
      return total;
    }
  }
  return 0.0;
}

double Shape::covariance_slope(const Point& u) const {
  if (std::abs(norm(u) - 1.0) > 1e-9)
    throw std::invalid_argument("covariance_slope requires a unit vector");
  const double g0 = volume();
  const double r0 = 0.1 * diameter();
  // Dyadic slope samples with two-point Richardson; pick the level that
  // balances the extrapolation residual against roundoff in g(0)-g(ru).
  constexpr int kLevels = 21;
  std::array<double, kLevels> slope{};
  for (int k = 0; k < kLevels; ++k) {
    const double r = r0 * std::pow(2.0, -k);
    const Point y{r * u[0], r * u[1], r * u[2]};
    slope[static_cast<std::size_t>(k)] = (g0 - covariance(y)) / r;
  }
  double best = 2.0 * slope[1] - slope[0];
  double best_score = std::numeric_limits<double>::infinity();
  double prev = best;
  for (int k = 1; k + 1 < kLevels; ++k) {
    const double rich = 2.0 * slope[static_cast<std::size_t>(k + 1)] - slope[static_cast<std::size_t>(k)];
    const double r_next = r0 * std::pow(2.0, -(k + 1));
    const double round_err = 4.0e-16 * g0 / r_next;
    const double score = std::abs(rich - prev) + round_err;
    if (score < best_score) {
      best_score = score;
      best = rich;
    }
    prev = rich;
  }
  return best;
}

std::vector<double> Shape::angular_kinks() const {
  const auto& impl = *impl_;
  std::vector<double> out;
  auto add = [&out](double a) {
    a = std::fmod(a, 2.0 * kPi);
    if (a < 0) a += 2.0 * kPi;
    out.push_back(a);
  };
  switch (kind_of(impl)) {
    case KindTag::box:
      for (int k = 0; k < 4; ++k) add(k * kPi / 2.0);
      break;
    case KindTag::polygon: {
      const auto& p = std::get<Polygon>(impl.v);
      const std::size_t n = p.vertices.size();
      for (std::size_t i = 0; i < n; ++i) {
        const P2& a = p.vertices[i];
        const P2& b = p.vertices[(i + 1) % n];
        const double phi = std::atan2(b[1] - a[1], b[0] - a[0]);
        add(phi);
        add(phi + kPi);
        add(phi + kPi / 2.0);
        add(phi - kPi / 2.0);
      }
      break;
    }
    case KindTag::union_: {
      const auto& un = std::get<UnionShape>(impl.v);
      for (const auto& m : un.members) {
        auto ks = m.angular_kinks();
        out.insert(out.end(), ks.begin(), ks.end());
      }
      break;
    }
    default:
      break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-12; }),
            out.end());
  return out;
}

std::vector<double> Shape::radial_kinks() const {
  const auto& impl = *impl_;
  std::vector<double> out;
  switch (kind_of(impl)) {
    case KindTag::interval:
      out.push_back(impl.volume);
      break;
    case KindTag::box: {
      const auto& s = std::get<Box>(impl.v);
      for (int i = 0; i < s.dim; ++i) out.push_back(s.lengths[static_cast<std::size_t>(i)]);
      out.push_back(impl.diameter);
      break;
    }
    case KindTag::ball:
      out.push_back(impl.diameter);
      break;
    case KindTag::polygon: {
      const auto& p = std::get<Polygon>(impl.v);
      const std::size_t n = p.vertices.size();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          out.push_back(std::hypot(p.vertices[j][0] - p.vertices[i][0],
                                   p.vertices[j][1] - p.vertices[i][1]));
      break;
    }
    case KindTag::union_: {
      const auto& un = std::get<UnionShape>(impl.v);
      for (const auto& m : un.members) {
        auto ks = m.radial_kinks();
        out.insert(out.end(), ks.begin(), ks.end());
      }
      if (impl.dim == 1) {
        std::vector<double> ends;
        for (const auto& m : un.members) {
          auto [lo, hi] = m.bounding_box();
          ends.push_back(lo[0]);
          ends.push_back(hi[0]);
        }
        for (std::size_t i = 0; i < ends.size(); ++i)
          for (std::size_t j = i + 1; j < ends.size(); ++j)
            out.push_back(std::abs(ends[i] - ends[j]));
      }
      break;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-14; }),
            out.end());
  while (!out.empty() && out.front() <= 0.0) out.erase(out.begin());
  return out;
}

double Shape::perimeter_via_covariance() const {
  const int d = dim();
  if (d == 1) {
    return covariance_slope({1.0, 0, 0}) + covariance_slope({-1.0, 0, 0});
  }
  if (d == 2) {
    auto slope = [this](double theta) {
      return covariance_slope({std::cos(theta), std::sin(theta), 0.0});
    };
    std::vector<double> kinks = angular_kinks();
    double total = quad::integrate_split(slope, 0.0, 2.0 * kPi, kinks, 1e-9);
    // Gamma((d+1)/2) / pi^((d-1)/2) = 1/2 in d = 2.
    return 0.5 * total;
  }
  throw std::invalid_argument("perimeter_via_covariance supports d in {1,2}");
}

bool Shape::contains(const Point& x) const {
  const auto& impl = *impl_;
  switch (kind_of(impl)) {
    case KindTag::interval: {
      const auto& s = std::get<Interval>(impl.v);
      return x[0] >= s.a && x[0] <= s.b;
    }
    case KindTag::box: {
      const auto& s = std::get<Box>(impl.v);
      for (int i = 0; i < s.dim; ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (x[k] < s.origin[k] || x[k] > s.origin[k] + s.lengths[k]) return false;
      }
      return true;
    }
    case KindTag::ball: {
      const auto& s = std::get<Ball>(impl.v);
      double d2 = 0.0;
      for (int i = 0; i < s.dim; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double diff = x[k] - s.center[k];
        d2 += diff * diff;
      }
      return d2 <= s.radius * s.radius;
    }
    case KindTag::polygon: {
      const auto& p = std::get<Polygon>(impl.v);
      return point_in_poly(p.vertices, {x[0], x[1]});
    }
    case KindTag::union_: {
      const auto& un = std::get<UnionShape>(impl.v);
      for (const auto& m : un.members)
        if (m.contains(x)) return true;
      return false;
    }
  }
  return false;
}

std::string Shape::describe() const {
  const auto& impl = *impl_;
  std::ostringstream os;
  switch (kind_of(impl)) {
    case KindTag::interval: {
      const auto& s = std::get<Interval>(impl.v);
      os << "interval(" << s.a << "," << s.b << ")";
      break;
    }
    case KindTag::box:
      os << "box(d=" << impl.dim << ")";
      break;
    case KindTag::ball:
      os << "ball(d=" << impl.dim << ")";
      break;
    case KindTag::polygon:
      os << "polygon(" << std::get<Polygon>(impl.v).vertices.size() << " vertices)";
      break;
    case KindTag::union_:
      os << "union(" << std::get<UnionShape>(impl.v).members.size() << " members)";
      break;
  }
  return os.str();
}

namespace {

struct Seg {
  double a, b;
};

std::optional<Seg> as_segment(const Shape& s) {
  auto [lo, hi] = s.bounding_box();
  if (s.dim() != 1) return std::nullopt;
  return Seg{lo[0], hi[0]};
}

double dist_poly_poly(const std::vector<P2>& a, const std::vector<P2>& b) {
  const double scale = std::max(poly_scale(a), poly_scale(b));
  const double eps = 1e-12 * scale * scale;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      if (segments_intersect(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()], eps))
        return -1.0;
  if (point_in_poly(a, b[0]) || point_in_poly(b, a[0])) return -1.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : a)
    for (std::size_t j = 0; j < b.size(); ++j)
      best = std::min(best, dist_point_segment(p, b[j], b[(j + 1) % b.size()]));
  for (const auto& p : b)
    for (std::size_t j = 0; j < a.size(); ++j)
      best = std::min(best, dist_point_segment(p, a[j], a[(j + 1) % a.size()]));
  return best;
}

}  // namespace

double separation(const Shape& a, const Shape& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("separation: dimension mismatch");
  const int d = a.dim();
  const auto& ia = *a.impl_;
  const auto& ib = *b.impl_;
  const KindTag ka = kind_of(ia), kb = kind_of(ib);
  if (ka == KindTag::union_ || kb == KindTag::union_)
    throw std::invalid_argument("separation: flatten unions before comparing");
  if (d == 1) {
    auto sa = as_segment(a);
    auto sb = as_segment(b);
    return std::max(sb->a - sa->b, sa->a - sb->b);
  }
  if (ka == KindTag::ball && kb == KindTag::ball) {
    const auto& s = std::get<Ball>(ia.v);
    const auto& t = std::get<Ball>(ib.v);
    double d2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double diff = s.center[k] - t.center[k];
      d2 += diff * diff;
    }
    return std::sqrt(d2) - s.radius - t.radius;
  }
  if (ka == KindTag::box && kb == KindTag::box) {
    auto [alo, ahi] = a.bounding_box();
    auto [blo, bhi] = b.bounding_box();
    bool all_overlap = true;
    double g2 = 0.0, min_overlap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double ov = std::min(ahi[k], bhi[k]) - std::max(alo[k], blo[k]);
      if (ov < 0) {
        all_overlap = false;
        g2 += ov * ov;
      } else {
        min_overlap = std::min(min_overlap, ov);
      }
    }
    return all_overlap ? -min_overlap : std::sqrt(g2);
  }
  if (d == 2) {
    auto polyize = [](const Shape::Impl& impl) -> std::optional<std::vector<P2>> {
      if (const Polygon* p = std::get_if<Polygon>(&impl.v)) return p->vertices;
      if (const Box* bx = std::get_if<Box>(&impl.v)) return box_to_poly(*bx);
      return std::nullopt;
    };
    auto qa = polyize(ia);
    auto qb = polyize(ib);
    if (qa && qb) return dist_poly_poly(*qa, *qb);
  }
  throw std::invalid_argument("separation: unsupported shape pair");
}

CovarianceFn::CovarianceFn(Shape s)
    : shape(std::move(s)), lipschitz_bound(shape.perimeter() / 2.0) {}

double convex_intersection_area(const std::vector<std::array<double, 2>>& p,
                                const std::vector<std::array<double, 2>>& q) {
  return clip_area(p, q);
}

}  // namespace levyheat::geometry
