#include "levyheat/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace levyheat::quad {

namespace {

constexpr double kPi = 3.14159265358979323846;

double kernel_value(Kernel k, double x) {
  switch (k) {
    case Kernel::cos:
      return std::cos(x);
    case Kernel::sin:
      return std::sin(x);
    case Kernel::j0:
      return std::cyl_bessel_j(0.0, x);
  }
  return 0.0;
}

}  // namespace

double integrate(const Fn& f, double a, double b, double rel_tol, int max_depth) {
  if (!(b > a)) return 0.0;
  // Tolerances below the Gauss-Kronrod certification floor make the
  // adaptive bisection chase integrand noise all the way to max_depth.
  rel_tol = std::max(rel_tol, 5e-12);
  max_depth = std::min(max_depth, 12);
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, static_cast<unsigned>(max_depth), rel_tol);
}

double integrate_split(const Fn& f, double a, double b,
                       const std::vector<double>& interior, double rel_tol) {
  if (!(b > a)) return 0.0;
  std::vector<double> pts;
  pts.push_back(a);
  for (double p : interior)
    if (p > a && p < b) pts.push_back(p);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size() - 1;
  // Survey pass sizes the pieces so the refinement pass can spread the
  // tolerance budget: a piece carrying a tiny share of the total must not
  // chase a relative target below the integrand's own noise floor.
  std::vector<double> rough(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rough[i] = integrate(f, pts[i], pts[i + 1], 1e-4, 6);
    scale += std::abs(rough[i]);
  }
  if (scale == 0.0) scale = 1e-300;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double tol_i = rel_tol * scale / std::max(std::abs(rough[i]), scale * 1e-14);
    tol_i = std::clamp(tol_i, rel_tol, 0.05);
    total += integrate(f, pts[i], pts[i + 1], tol_i, 14);
  }
  return total;
}

double integrate_singular(const Fn& f, double a, double b, double rel_tol) {
  if (!(b > a)) return 0.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, a, b, rel_tol);
}

double integrate_to_inf(const Fn& f, double a, double rel_tol) {
  boost::math::quadrature::exp_sinh<double> es;
  auto g = [&](double u) { return f(a + u); };
  return es.integrate(g, rel_tol);
}

double integrate_power_singular(const Fn& f, double b, double rel_tol) {
  if (!(b > 0.0)) return 0.0;
  auto g = [&](double v) {
    const double u = std::exp(v);
    return f(u) * u;
  };
  const double v_hi = std::log(b);
  const double block = 8.0;
  double total = 0.0;
  int quiet = 0;
  double v = v_hi;
  double last_block = 0.0, prev_block = 0.0;
  for (int k = 0; k < 15; ++k) {
    const double piece = integrate(g, v - block, v, rel_tol);
    total += piece;
    prev_block = last_block;
    last_block = piece;
    v -= block;
    if (k >= 2 && std::abs(piece) < rel_tol * std::abs(total)) {
      if (++quiet >= 2) break;
    } else {
      quiet = 0;
    }
  }
  // Close the remaining (0, e^v) mass with the locally fitted power.
  const double u1 = std::exp(v);
  const double f1 = f(u1);
  const double f2 = f(u1 * 2.0);
  if (f1 > 0.0 && f2 > 0.0) {
    const double p = std::log(f2 / f1) / std::log(2.0);
    if (p > -0.9999) {
      total += f1 * u1 / (p + 1.0);
    }
  } else if (quiet < 2 && std::abs(last_block) > 0.0 && std::abs(prev_block) > std::abs(last_block)) {
    const double q = std::abs(last_block / prev_block);
    total += last_block * q / (1.0 - q);
  }
  return total;
}

double kernel_zero(Kernel k, int index) {
  switch (k) {
    case Kernel::cos:
      return (index + 0.5) * kPi;
    case Kernel::sin:
      return (index + 1.0) * kPi;
    case Kernel::j0: {
      // McMahon expansion for j_{0,index+1}; panel boundaries only need a
      // few digits.
      const double beta = (index + 1 - 0.25) * kPi;
      const double b2 = beta * beta;
      return beta + 1.0 / (8.0 * beta) * (1.0 - 124.0 / (3.0 * 8.0 * 8.0 * b2) +
                                          120928.0 / (15.0 * 4096.0 * b2 * b2));
    }
  }
  return 0.0;
}

std::pair<double, double> wynn_epsilon(const std::vector<double>& s) {
  const std::size_t n = s.size();
  if (n == 0) return {0.0, std::numeric_limits<double>::infinity()};
  if (n == 1) return {s[0], std::numeric_limits<double>::infinity()};
  std::vector<double> prev2(n + 1, 0.0);  // column -1
  std::vector<double> prev = s;           // column 0
  double best = s.back();
  double best_err = std::abs(s[n - 1] - s[n - 2]);
  for (std::size_t col = 1; col < n; ++col) {
    std::vector<double> cur(n - col);
    for (std::size_t i = 0; i + col < n; ++i) {
      const double diff = prev[i + 1] - prev[i];
      if (diff == 0.0) {
        // Exact convergence of the previous column.
        return {prev[i + 1], 0.0};
      }
      cur[i] = prev2[i + 1] + 1.0 / diff;
    }
    if (col % 2 == 0 && cur.size() >= 2) {
      const double err = std::abs(cur[cur.size() - 1] - cur[cur.size() - 2]);
      if (err < best_err) {
        best_err = err;
        best = cur.back();
      }
    }
    prev2 = prev;
    prev = cur;
  }
  return {best, best_err};
}

OscResult oscillatory_tail(const Fn& f, Kernel k, double omega, double x0,
                           double rel_tol) {
  OscResult out;
  if (omega <= 0.0) throw std::invalid_argument("oscillatory_tail: omega must be > 0");
  auto g = [&](double x) { return f(x) * kernel_value(k, omega * x); };

  // Skip zero boundaries lying below x0.
  int idx = 0;
  while (kernel_zero(k, idx) / omega <= x0) ++idx;

  const int max_panels = 600;
  std::vector<double> partial;
  partial.reserve(64);
  double plain = integrate(g, x0, kernel_zero(k, idx) / omega, rel_tol);
  double running = plain;

  // Panels are fed to the epsilon table only once their magnitudes decrease,
  // so a rising envelope (e.g. x * exp(-t psi)) is summed plainly first.
  bool accelerating = false;
  int decreasing_run = 0;
  double prev_abs = std::numeric_limits<double>::infinity();
  double best = running, best_err = std::numeric_limits<double>::infinity();
  int stable_count = 0;

  for (int p = 0; p < max_panels; ++p) {
    const double a = kernel_zero(k, idx + p) / omega;
    const double b = kernel_zero(k, idx + p + 1) / omega;
    const double term = integrate(g, a, b, rel_tol);
    out.panels++;
    const double mag = std::abs(term);
    if (!accelerating) {
      if (mag <= prev_abs) {
        if (++decreasing_run >= 2) {
          accelerating = true;
          partial.clear();
          partial.push_back(running + term);
        }
      } else {
        decreasing_run = 0;
      }
      if (!accelerating) running += term;
      prev_abs = mag;
      if (accelerating) continue;
      // Pure decay without sign changes can terminate the plain sum early.
      if (mag < rel_tol * std::abs(running) && p > 4) {
        out.value = running;
        out.abs_err = mag;
        return out;
      }
      continue;
    }
    partial.push_back(partial.back() + term);
    if (partial.size() >= 4) {
      auto [est, err] = wynn_epsilon(partial);
      if (err < best_err) {
        best = est;
        best_err = err;
      }
      const double scale = std::max(std::abs(est), std::abs(partial.front()));
      if (err <= rel_tol * std::max(scale, 1e-300)) {
        if (++stable_count >= 2) {
          out.value = est;
          out.abs_err = err;
          return out;
        }
      } else {
        stable_count = 0;
      }
    }
  }
  out.value = accelerating ? best : running;
  out.abs_err = best_err;
  out.converged = false;
  return out;
}

OscResult fourier_semiinf(const Fn& f, Kernel k, double omega, double x_decay,
                          double rel_tol) {
  OscResult out;
  const double cut = 1.35 * x_decay;
  if (omega <= 0.0 || omega * cut < 4.0) {
    // Sub-oscillatory: direct adaptive quadrature over the support, split
    // geometrically so a decay scale far below `cut` still gets resolved.
    auto g = [&](double x) { return f(x) * (omega > 0.0 ? kernel_value(k, omega * x) : (k == Kernel::cos ? 1.0 : 0.0)); };
    std::vector<double> pts;
    for (double x = cut * 1e-9; x < cut; x *= 8.0) pts.push_back(x);
    double head = integrate_split(g, 0.0, cut, pts, rel_tol);
    out.value = head;
    out.abs_err = rel_tol * std::abs(head);
    out.panels = 1;
    return out;
  }
  const double z0 = kernel_zero(k, 0) / omega;
  auto g = [&](double x) { return f(x) * kernel_value(k, omega * x); };
  const double head = integrate_singular(g, 0.0, z0, rel_tol);
  OscResult tail = oscillatory_tail(f, k, omega, z0, rel_tol);
  out.value = head + tail.value;
  out.abs_err = tail.abs_err + rel_tol * std::abs(head);
  out.panels = tail.panels + 1;
  out.converged = tail.converged;
  return out;
}

}  // namespace levyheat::quad
