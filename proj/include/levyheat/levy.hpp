#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

// Levy model catalogue: characteristic exponents, running suprema and
// generalized inverses, the Pruitt scale function h, the effective drift
// gamma_0 of finite-variation processes, Levy-measure functionals, and
// transition densities / tails via Fourier inversion.

namespace levyheat::levy {

enum class ModelKind {
  brownian,
  isotropic_stable,
  brownian_plus_stable,
  radial_density,
  discrete_dyadic,
  asym_stable_1d,
  compound_poisson_drift,
  custom_1d,
};

enum class RadialProfile { truncated, tempered, lamperti, layered };

struct Atom {
  std::array<double, 3> y{0, 0, 0};
  double mass = 0.0;
};

// Running supremum f*(r) = sup_{[0,r]} f of a continuous f with f(0)=0 and
// its generalized left inverse. Monotone functions short-circuit; otherwise
// a dense log grid (1024 nodes/decade) with golden-section polishing around
// the running argmax backs the evaluation.
class RunningSup {
 public:
  RunningSup(std::function<double(double)> f, bool nondecreasing);
  ~RunningSup();
  RunningSup(RunningSup&&) noexcept;
  double sup(double r) const;
  // inf{x >= 0 : sup(x) >= v}; throws std::overflow_error when v is beyond
  // the numerically reachable range.
  double inverse(double v) const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

// ∫_0^inf (1 - cos u) u^{-1-alpha} du, closed form, alpha in (0,2).
double stable_k1(double alpha);
// Same with the d-dimensional angular average of cos (J0 for d=2, sinc for
// d=3); evaluated once by quadrature and cached per alpha.
double stable_kd(double alpha, int dim);

class LevyModel {
 public:
  static LevyModel brownian(double eta, int dim);
  static LevyModel isotropic_stable(double alpha, double c, int dim);
  static LevyModel brownian_plus_stable(double eta, double c, double alpha,
                                        int dim);
  static LevyModel radial_density(RadialProfile profile, double alpha, double c,
                                  int dim, double delta = 0.0,
                                  double alpha1 = 0.0);
  static LevyModel discrete_dyadic(double alpha);
  static LevyModel asym_stable_1d(double alpha, double c1, double c2);
  static LevyModel compound_poisson_drift(std::vector<Atom> atoms,
                                          std::array<double, 3> gamma0,
                                          int dim);
  // Test hook: 1D model from explicit one-sided jump densities on (0, hi].
  static LevyModel custom_1d(std::function<double(double)> rho_plus,
                             std::function<double(double)> rho_minus,
                             double support_hi, double gamma,
                             bool finite_variation);

  ModelKind kind() const;
  int dim() const;
  double eta() const;
  double alpha() const;        // stability index (NaN where undefined)
  double stable_scale() const;  // the constant c of the exponent/measure
  double rv_index() const;      // regular-variation index of psi (NaN if none)
  bool symmetric() const;
  bool isotropic() const;
  bool finite_variation() const;
  bool unbounded_exponent() const;
  std::string describe() const;

  // Radial characteristic exponent (isotropic / 1D symmetric kinds only).
  double psi(double r) const;
  // Spline-backed variant for quadrature-defined exponents; identical to
  // psi() for closed-form kinds.
  double psi_smooth(double r) const;
  double psi_star(double r) const;
  double psi_inverse(double v) const;

  double pruitt_h(double r) const;
  double pruitt_h_inverse(double v) const;

  // gamma_0 = ∫_{|y|<=1} y nu(dy) - gamma; finite-variation kinds only.
  std::array<double, 3> gamma_zero() const;

  // nu({‖y‖ > r})
  double levy_tail_mass(double r) const;
  // ∫_{‖y‖<=r} ‖y‖^2 nu(dy)
  double levy_radial_moment2(double r) const;
  // ∫_{‖y‖<=r} ‖y‖ nu(dy); finite for finite-variation kinds
  double levy_small_abs_moment(double r) const;
  // ∫_{r_lo<‖y‖<=r_hi} f(‖y‖) nu(dy) for density-represented measures
  double integrate_levy_radial(const std::function<double(double)>& f,
                               double r_lo, double r_hi) const;
  // Σ f(y_i) m_i over atoms; the dyadic series truncates once the
  // Lipschitz-certified tail bound drops below rel_tol of the running sum.
  double sum_atoms(const std::function<double(const std::array<double, 3>&)>& f,
                   double lipschitz_bound, double rel_tol) const;
  bool atomic() const;
  const std::vector<Atom>* atom_list() const;

  std::array<double, 3> compound_gamma0() const;
  // Chambers-Mallows-Stuck parameters of the marginal at t=1 (stable kinds).
  double stable_beta() const;
  double stable_sigma() const;

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
  explicit LevyModel(std::shared_ptr<const Impl> impl);
};

// Transition density p_t at radius s and radial tail P(‖X_t‖ > r) by
// Fourier inversion; requires d in {1,2} and an unbounded exponent.
class DensityEvaluator {
 public:
  DensityEvaluator(LevyModel model, double t);
  double operator()(double s) const;
  double tail(double r) const;
  double xi_cut() const;          // frequency where t psi* reaches ~46
  double spatial_scale() const;   // 1 / psi_inverse(1/t)
  const LevyModel& model() const { return model_; }
  double t() const { return t_; }

 private:
  LevyModel model_;
  double t_;
  double xi_cut_;
  double scale_;
  int dim_;
  bool gaussian_fast_;
};

double density_radial(const LevyModel& model, double t, double s);
double tail_probability(const LevyModel& model, double t, double r);

}  // namespace levyheat::levy
