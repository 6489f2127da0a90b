#pragma once

#include <functional>
#include <vector>

// Quadrature building blocks shared by the levy/heat modules:
//  - adaptive Gauss-Kronrod and tanh-sinh wrappers (boost.math backed)
//  - semi-infinite oscillatory integrals (cos/sin/J0 kernels) evaluated by
//    integrating between kernel zeros and accelerating the alternating
//    panel series with the Wynn epsilon algorithm.

namespace levyheat::quad {

using Fn = std::function<double(double)>;

// Adaptive Gauss-Kronrod on [a,b]. `rel_tol` is the termination target.
double integrate(const Fn& f, double a, double b, double rel_tol = 1e-10,
                 int max_depth = 17);

// Integrates f over [a,b] splitting the interval at the given interior
// points first (kinks, scale transitions), then adaptively per piece.
double integrate_split(const Fn& f, double a, double b,
                       const std::vector<double>& interior,
                       double rel_tol = 1e-10);

// Endpoint-singularity tolerant integral on (a,b) (tanh-sinh).
double integrate_singular(const Fn& f, double a, double b,
                          double rel_tol = 1e-10);

// ∫_0^b f(u) du for f with an integrable power-law singularity at 0.
// Log-substituted adaptive blocks down to b e^{-120}, closed by a fitted
// local power below that; exact for pure powers, and f is never evaluated
// closer to 0 than b e^{-120}.
double integrate_power_singular(const Fn& f, double b, double rel_tol = 1e-11);

// Integral over (a, inf) for integrands with decaying tails (exp-sinh).
double integrate_to_inf(const Fn& f, double a, double rel_tol = 1e-10);

enum class Kernel { cos, sin, j0 };

struct OscResult {
  double value = 0.0;
  double abs_err = 0.0;
  int panels = 0;
  bool converged = true;
};

// ∫_0^∞ f(x) k(omega x) dx for k in {cos, sin, J0}.
//
// `x_decay` must be a point past which f is negligible relative to its
// bulk (used to pick the non-oscillatory branch and to bound the head
// integral when omega is small). f must be smooth on (0, inf); an
// integrable algebraic singularity at 0 is fine.
OscResult fourier_semiinf(const Fn& f, Kernel k, double omega, double x_decay,
                          double rel_tol = 1e-11);

// ∫_{x0}^∞ f(x) k(omega x) dx, oscillatory tail only (panel + Wynn path).
OscResult oscillatory_tail(const Fn& f, Kernel k, double omega, double x0,
                           double rel_tol = 1e-11);

// k-th positive zero of the kernel oscillator (argument units): cos -> (k+1/2)π,
// sin -> (k+1)π, J0 -> McMahon approximation of j_{0,k+1}.
double kernel_zero(Kernel k, int index);

// Wynn epsilon extrapolation of a partial-sum sequence; returns the best
// even-column estimate together with a crude error gauge.
std::pair<double, double> wynn_epsilon(const std::vector<double>& partial_sums);

}  // namespace levyheat::quad
