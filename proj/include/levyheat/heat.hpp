#pragma once

#include <string>
#include <vector>

#include "levyheat/geometry.hpp"
#include "levyheat/levy.hpp"

// Heat content H(t) = ∫ (g(0) - g(y)) p_t(dy) by deterministic quadrature,
// the nonlocal perimeter Per_X, and the upper/lower bound integral factors.

namespace levyheat::heat {

enum class Method { quadrature, tail1d, monte_carlo };

std::string method_name(Method m);

struct Sample {
  double t = 0.0;
  double value = 0.0;
  Method method = Method::quadrature;
  double err = 0.0;  // stderr for MC, clip/quadrature gauge otherwise
};

struct HeatCurve {
  levy::LevyModel model;
  geometry::Shape shape;
  std::vector<Sample> samples;  // t strictly decreasing
  double scale_radius = 0.0;    // R = 2|Omega|/Per(Omega)
};

HeatCurve make_curve(levy::LevyModel model, geometry::Shape shape,
                     std::vector<Sample> samples);

struct HeatValue {
  double value = 0.0;
  double clip_excess = 0.0;  // amount removed when clipping to [0, |Omega|]
};

// H(t) via the covariance formula; d in {1,2} with a Fourier-inversion
// density, or exact Poisson-mixture summation for atomic compound-Poisson
// models.
HeatValue heat_content_quadrature_ex(const levy::LevyModel& model,
                                     const geometry::Shape& shape, double t);
double heat_content_quadrature(const levy::LevyModel& model,
                               const geometry::Shape& shape, double t);

// H(t) = ∫_0^L P(|X_t| >= x) dx for a 1D interval of length L.
double heat_content_tail_1d(const levy::LevyModel& model, double length,
                            double t);

// Per_X(Omega) = ∫ (g(0) - g(y)) nu(dy); finite-variation models only. The
// ball ||y|| <= eps is controlled through the Lipschitz bound and eps is
// shrunk until that bound is below 1e-8 of the running total.
double x_perimeter(const levy::LevyModel& model, const geometry::Shape& shape);

// t Per(Omega) ∫_{R/2 ∧ h^{-1}(1/t)}^{R} h(r) dr  (the Theorem-1 factor
// without its universal constant).
double theorem1_upper_bound_factor(const levy::LevyModel& model,
                                   const geometry::Shape& shape, double t);

// t Per(Omega) ∫_{h^{-1}(1/t)}^{R} h(r) dr for admissible isotropic models
// (upper scaling condition, h non-integrable at zero).
double lower_bound_integral_factor(const levy::LevyModel& model,
                                   const geometry::Shape& shape, double t);
bool lower_bound_applicable(const levy::LevyModel& model);

}  // namespace levyheat::heat
