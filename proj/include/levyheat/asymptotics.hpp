#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "levyheat/heat.hpp"

// Small-time limit extraction from heat-content curves and comparison
// against the theoretical constants.

namespace levyheat::asymptotics {

struct Extrapolation {
  double limit = 0.0;
  double theta_hat = 0.0;     // fitted correction exponent (NaN if unused)
  double contraction = 0.0;   // fitted ratio of successive differences
  double residual = 0.0;      // scatter of the log-difference fit
  double spread = 0.0;        // fallback uncertainty gauge
  bool fallback = false;      // last-value fallback was taken
};

// Fits v_k = a + b t_k^theta on a geometric grid via log-differenced slopes
// and solves for a; falls back to the last value with a spread bound when
// the fitted exponent is unstable.
Extrapolation extrapolate_limit(const std::vector<double>& ts,
                                const std::vector<double>& vs);

enum class TheoremTag {
  thm2,
  thm3,
  thm1_envelope,
  prop5_envelope,
  alpha1_lograte,
  example5,
};

std::string theorem_tag_name(TheoremTag tag);

struct AsymptoticsReport {
  TheoremTag tag = TheoremTag::thm2;
  std::vector<std::array<double, 2>> scaled;  // (t_k, scaled value)
  double extrapolated = 0.0;
  double extrapolated_err = 0.0;
  double theoretical = 0.0;  // NaN when the paper fixes no constant
  double theoretical_err = 0.0;
  double rel_error = 0.0;    // |extrapolated - theoretical|/|theoretical|
  double contraction = 0.0;
  double sup_ratio = 0.0;    // envelope reports
  double inf_ratio = 0.0;
  std::string note;
};

// lim psi^-(1/t) H(t) = pi^{-1} Gamma(1-1/alpha) Per(Omega), alpha in (1,2].
AsymptoticsReport verify_theorem2(const heat::HeatCurve& curve);

// lim t^{-1} H(t) = Per_X(Omega) + (|gamma_0|/2) V_{gamma_0/|gamma_0|}(Omega).
AsymptoticsReport verify_theorem3(const heat::HeatCurve& curve);

// Theorem-1 / Proposition-5 envelope ratios plus the alpha = 1 log-rate
// sequence where applicable.
std::vector<AsymptoticsReport> check_bounds_envelope(const heat::HeatCurve& curve);

// Example-5 check (l == 1): lim f^-(1/t) H(t) = E|S| for the asymmetric
// 1D stable model on an interval, both sides estimated by Monte Carlo.
AsymptoticsReport verify_example5(const levy::LevyModel& model, double length,
                                  const std::vector<double>& ts, std::uint64_t n,
                                  std::uint64_t seed);

double theorem2_constant(double rv_index, double perimeter);
double theorem3_constant(const levy::LevyModel& model,
                         const geometry::Shape& shape);

}  // namespace levyheat::asymptotics
