#include "levyheat/heat.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>

#include "levyheat/quadrature.hpp"

namespace levyheat::heat {

namespace {

constexpr double kPi = 3.14159265358979323846;

using geometry::Point;
using geometry::Shape;
using levy::LevyModel;

std::vector<double> geometric_splits(double scale, double hi) {
  std::vector<double> pts;
  for (double x = std::max(scale * 1e-3, hi * 1e-14); x < hi; x *= 8.0)
    pts.push_back(x);
  return pts;
}

// Radial samples of a positive function on a log-log Hermite grid. The
// Fourier-inversion evaluator has ~1e-11 jitter from its panel adaptivity,
// which defeats adaptive-quadrature error estimates; integrating this smooth
// interpolant instead keeps the outer integrals cheap and stable.
class RadialTable {
 public:
  RadialTable(const std::function<double(double)>& f, double y_lo, double y_hi,
              int per_decade = 160) {
    y_lo_ = y_lo;
    y_hi_ = y_hi;
    const double l0 = std::log(y_lo), l1 = std::log(y_hi);
    const int n = std::max(8, static_cast<int>(std::ceil(
                                   (l1 - l0) / std::log(10.0) * per_decade)));
    lx_.resize(static_cast<std::size_t>(n) + 1);
    ly_.resize(lx_.size());
    for (std::size_t i = 0; i < lx_.size(); ++i) {
      const double lx = l0 + (l1 - l0) * static_cast<double>(i) / n;
      lx_[i] = lx;
      ly_[i] = std::log(std::max(f(std::exp(lx)), 1e-300));
    }
    slope_.resize(lx_.size());
    for (std::size_t i = 0; i < lx_.size(); ++i) {
      if (i == 0)
        slope_[i] = (ly_[1] - ly_[0]) / (lx_[1] - lx_[0]);
      else if (i + 1 == lx_.size())
        slope_[i] = (ly_[i] - ly_[i - 1]) / (lx_[i] - lx_[i - 1]);
      else
        slope_[i] = (ly_[i + 1] - ly_[i - 1]) / (lx_[i + 1] - lx_[i - 1]);
    }
  }

  double operator()(double y) const {
    if (y <= y_lo_) return std::exp(ly_.front());
    if (y >= y_hi_) return std::exp(ly_.back());
    const double lr = std::log(y);
    const double step = (lx_.back() - lx_.front()) / static_cast<double>(lx_.size() - 1);
    std::size_t i = static_cast<std::size_t>((lr - lx_.front()) / step);
    i = std::min(i, lx_.size() - 2);
    const double h = lx_[i + 1] - lx_[i];
    const double u = (lr - lx_[i]) / h;
    const double m0 = slope_[i] * h, m1 = slope_[i + 1] * h;
    const double u2 = u * u, u3 = u2 * u;
    const double val = (2 * u3 - 3 * u2 + 1) * ly_[i] + (u3 - 2 * u2 + u) * m0 +
                       (-2 * u3 + 3 * u2) * ly_[i + 1] + (u3 - u2) * m1;
    return std::exp(val);
  }

 private:
  double y_lo_, y_hi_;
  std::vector<double> lx_, ly_, slope_;
};

// Angular average of g(0) - g(s u) over the unit circle (d = 2).
double angular_deficit(const Shape& shape, double s,
                       const std::vector<double>& kinks) {
  const double g0 = shape.volume();
  auto f = [&](double theta) {
    return g0 - shape.covariance({s * std::cos(theta), s * std::sin(theta), 0.0});
  };
  std::vector<double> splits = kinks;
  for (int k = 1; k < 4; ++k) splits.push_back(k * kPi / 2.0);
  return quad::integrate_split(f, 0.0, 2.0 * kPi, splits, 1e-9);
}

// Exact H(t) for compound Poisson with drift: condition on the jump counts
// of each atom (Poisson mixture over the displacement lattice).
HeatValue heat_cp_exact(const LevyModel& model, const Shape& shape, double t) {
  const auto& atoms = *model.atom_list();
  if (atoms.size() > 6)
    throw std::invalid_argument(
        "heat_content_quadrature: too many atoms for exact enumeration; use "
        "monte_carlo");
  const double g0 = shape.volume();
  const auto gamma0 = model.compound_gamma0();
  std::vector<std::vector<double>> pmf(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double lam = atoms[i].mass * t;
    double p = std::exp(-lam);
    double cum = p;
    pmf[i].push_back(p);
    for (int k = 1; k < 400; ++k) {
      p *= lam / k;
      pmf[i].push_back(p);
      cum += p;
      if (1.0 - cum < 1e-17) break;
    }
  }
  double total = 0.0, mass = 0.0;
  // Depth-first enumeration over jump-count tuples with probability pruning.
  std::function<void(std::size_t, double, Point)> walk = [&](std::size_t i,
                                                             double w, Point d) {
    if (w < 1e-18) return;
    if (i == atoms.size()) {
      total += w * (g0 - shape.covariance(d));
      mass += w;
      return;
    }
    for (std::size_t k = 0; k < pmf[i].size(); ++k) {
      Point nd = d;
      for (int c = 0; c < 3; ++c)
        nd[static_cast<std::size_t>(c)] +=
            static_cast<double>(k) * atoms[i].y[static_cast<std::size_t>(c)];
      walk(i + 1, w * pmf[i][k], nd);
    }
  };
  walk(0, 1.0, {gamma0[0] * t, gamma0[1] * t, gamma0[2] * t});
  // Unenumerated mass can contribute at most g0 per unit probability.
  HeatValue out;
  out.value = total;
  out.clip_excess = 0.0;
  (void)mass;
  return out;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::quadrature:
      return "quadrature";
    case Method::tail1d:
      return "tail1d";
    case Method::monte_carlo:
      return "monte_carlo";
  }
  return "?";
}

HeatCurve make_curve(LevyModel model, Shape shape, std::vector<Sample> samples) {
  for (std::size_t i = 0; i + 1 < samples.size(); ++i)
    if (!(samples[i].t > samples[i + 1].t))
      throw std::invalid_argument("HeatCurve: t grid must be strictly decreasing");
  for (const auto& s : samples)
    if (s.value < -1e-12 || s.value > shape.volume() * (1.0 + 1e-9))
      throw std::invalid_argument("HeatCurve: sample outside [0, |Omega|]");
  HeatCurve c{std::move(model), std::move(shape), std::move(samples), 0.0};
  c.scale_radius = 2.0 * c.shape.volume() / c.shape.perimeter();
  return c;
}

HeatValue heat_content_quadrature_ex(const LevyModel& model, const Shape& shape,
                                     double t) {
  if (!(t > 0.0)) throw std::invalid_argument("heat_content_quadrature: t must be > 0");
  const double g0 = shape.volume();
  if (model.kind() == levy::ModelKind::compound_poisson_drift) {
    HeatValue v = heat_cp_exact(model, shape, t);
    const double raw = v.value;
    v.value = std::clamp(raw, 0.0, g0);
    v.clip_excess = std::abs(raw - v.value);
    return v;
  }
  if (model.dim() != shape.dim())
    throw std::invalid_argument("heat_content_quadrature: model/shape dimension mismatch");
  levy::DensityEvaluator ev(model, t);
  const double D = shape.diameter();
  const double scale = ev.spatial_scale();
  std::vector<double> splits = geometric_splits(scale, D);
  for (double k : shape.radial_kinks())
    if (k < D) splits.push_back(k);
  const bool gaussian = model.kind() == levy::ModelKind::brownian;
  std::function<double(double)> density = [&ev](double y) { return ev(y); };
  std::unique_ptr<RadialTable> table;
  if (!gaussian) {
    const double y_lo = std::min(scale * 1e-4, D * 1e-4);
    table = std::make_unique<RadialTable>(density, y_lo, D);
    density = [&tbl = *table](double y) { return tbl(y); };
  }
  double interior = 0.0;
  if (model.dim() == 1) {
    auto f = [&](double y) { return (g0 - shape.covariance({y, 0, 0})) * density(y); };
    interior = 2.0 * quad::integrate_split(f, 0.0, D, splits, 1e-9);
  } else {
    const std::vector<double> kinks = shape.angular_kinks();
    auto f = [&](double s) { return angular_deficit(shape, s, kinks) * density(s) * s; };
    interior = quad::integrate_split(f, 0.0, D, splits, 1e-8);
  }
  const double raw = interior + g0 * ev.tail(D);
  HeatValue out;
  out.value = std::clamp(raw, 0.0, g0);
  out.clip_excess = std::abs(raw - out.value);
  return out;
}

double heat_content_quadrature(const LevyModel& model, const Shape& shape, double t) {
  return heat_content_quadrature_ex(model, shape, t).value;
}

double heat_content_tail_1d(const LevyModel& model, double length, double t) {
  if (!(length > 0.0))
    throw std::invalid_argument("heat_content_tail_1d: length must be positive");
  if (model.dim() != 1)
    throw std::invalid_argument("heat_content_tail_1d: 1D models only");
  levy::DensityEvaluator ev(model, t);
  const double scale = ev.spatial_scale();
  if (model.kind() == levy::ModelKind::brownian) {
    auto f = [&](double x) { return ev.tail(x); };
    return quad::integrate_split(f, 0.0, length, geometric_splits(scale, length), 1e-9);
  }
  const double y_lo = std::min(scale * 1e-4, length * 1e-4);
  RadialTable table([&](double x) { return ev.tail(x); }, y_lo, length);
  auto f = [&](double x) { return table(x); };
  return quad::integrate_split(f, 0.0, length, geometric_splits(scale, length), 1e-9);
}

double x_perimeter(const LevyModel& model, const Shape& shape) {
  if (!model.finite_variation())
    throw std::invalid_argument(
        "x_perimeter: model has infinite variation (A=0 and "
        "∫_{||x||<=1}||x|| nu(dx) < ∞ required), so the integral may diverge");
  const double g0 = shape.volume();
  const double lip = shape.perimeter() / 2.0;
  if (model.atomic()) {
    auto f = [&](const std::array<double, 3>& y) {
      return g0 - shape.covariance({y[0], y[1], y[2]});
    };
    return model.sum_atoms(f, lip, 1e-12);
  }
  if (model.dim() != shape.dim())
    throw std::invalid_argument("x_perimeter: model/shape dimension mismatch");
  const double D = shape.diameter();
  const std::vector<double> kinks = shape.angular_kinks();
  auto mean_deficit = [&](double s) {
    if (shape.dim() == 1) return g0 - shape.covariance({s, 0, 0});
    return angular_deficit(shape, s, kinks) / (2.0 * kPi);
  };
  const double far = g0 * model.levy_tail_mass(D);
  double eps = std::min(D, 1.0) * 1e-2;
  double inner_sum = 0.0;
  double prev_eps = D;
  for (int iter = 0; iter < 60; ++iter) {
    auto f = [&](double s) { return mean_deficit(s); };
    std::vector<double> splits;
    for (double x = eps * 8.0; x < prev_eps; x *= 8.0) splits.push_back(x);
    for (double k : shape.radial_kinks())
      if (k > eps && k < prev_eps) splits.push_back(k);
    // integrate_levy_radial folds in the shell density of nu
    double piece = 0.0;
    {
      std::vector<double> pts{eps};
      for (double x : splits) pts.push_back(x);
      pts.push_back(prev_eps);
      std::sort(pts.begin(), pts.end());
      for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        piece += model.integrate_levy_radial(f, pts[i], pts[i + 1]);
    }
    inner_sum += piece;
    const double bound = lip * model.levy_small_abs_moment(eps);
    const double running = inner_sum + far;
    if (bound < 1e-8 * std::max(running, 1e-300)) return running;
    prev_eps = eps;
    eps /= 4.0;
  }
  return inner_sum + far;
}

namespace {

double h_inverse_or_zero(const LevyModel& model, double v) {
  try {
    return model.pruitt_h_inverse(v);
  } catch (const std::domain_error&) {
    return 0.0;  // v above the range of h: th(r) < 1 everywhere
  }
}

double integral_of_h(const LevyModel& model, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  auto f = [&](double r) { return model.pruitt_h(r); };
  std::vector<double> splits;
  for (double x = std::max(lo, hi * 1e-14) * 8.0; x < hi; x *= 8.0) splits.push_back(x);
  if (lo <= 0.0) {
    // h must be integrable at 0 here (checked by callers); approach 0 in
    // geometric blocks.
    double total = 0.0;
    double b = splits.empty() ? hi : splits.front();
    total += quad::integrate_power_singular(f, b, 1e-9);
    total += quad::integrate_split(f, b, hi, splits, 1e-9);
    return total;
  }
  return quad::integrate_split(f, lo, hi, splits, 1e-9);
}

}  // namespace

double theorem1_upper_bound_factor(const LevyModel& model, const Shape& shape,
                                   double t) {
  if (!(t > 0.0)) throw std::invalid_argument("theorem1_upper_bound_factor: t > 0");
  const double per = shape.perimeter();
  const double R = 2.0 * shape.volume() / per;
  const double lo = std::min(R / 2.0, h_inverse_or_zero(model, 1.0 / t));
  return t * per * integral_of_h(model, lo, R);
}

bool lower_bound_applicable(const LevyModel& model) {
  const double a = model.rv_index();
  return model.isotropic() && std::isfinite(a) && a >= 1.0;
}

double lower_bound_integral_factor(const LevyModel& model, const Shape& shape,
                                   double t) {
  if (!(t > 0.0)) throw std::invalid_argument("lower_bound_integral_factor: t > 0");
  if (!lower_bound_applicable(model))
    throw std::invalid_argument(
        "lower_bound_integral_factor: needs an isotropic exponent with upper "
        "scaling index >= 1 (h non-integrable at zero)");
  const double per = shape.perimeter();
  const double R = 2.0 * shape.volume() / per;
  const double lo = h_inverse_or_zero(model, 1.0 / t);
  if (lo >= R) return 0.0;
  return t * per * integral_of_h(model, lo, R);
}

}  // namespace levyheat::heat
