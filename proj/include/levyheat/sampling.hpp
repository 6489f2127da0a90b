#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "levyheat/geometry.hpp"
#include "levyheat/levy.hpp"

// Monte Carlo oracle: exact or variance-matched samplers for the model
// catalogue and the plain heat-content estimator. Every sample index owns a
// counter-seeded generator, so estimates are bit-identical for any thread
// count; block sums are combined pairwise in a fixed order.

namespace levyheat::sampling {

// xoshiro256++ seeded through splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next_u64();
  double uniform();      // (0,1)
  double normal();
  double exponential();  // rate 1

 private:
  std::array<std::uint64_t, 4> s_;
};

// Generator for sample `index` of stream `stream` under `root_seed`.
Rng stream_rng(std::uint64_t root_seed, std::uint64_t stream, std::uint64_t index);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double t = 0.0;
};

// One draw of the standard S_alpha(1, beta, 0) law (Chambers-Mallows-Stuck;
// alpha = 2 reduces to N(0,2), alpha = 1 uses the log-corrected branch).
double sample_stable_std(double alpha, double beta, Rng& rng);
double sample_stable_1d(double alpha, double beta, double scale, Rng& rng);
// Positive alpha'-stable with E exp(-l T) = exp(-l^alpha'), alpha' in (0,1).
double sample_positive_stable(double alpha_prime, Rng& rng);

std::array<double, 3> sample_uniform(const geometry::Shape& shape, Rng& rng);

// Per-(model, t) increment sampler; precomputes the compound-Poisson
// approximation (jump cutoff, quantile table, Gaussian substitute) once.
class IncrementSampler {
 public:
  IncrementSampler(levy::LevyModel model, double t);
  std::array<double, 3> operator()(Rng& rng) const;
  double small_jump_cutoff() const { return eps_; }

 private:
  levy::LevyModel model_;
  double t_;
  double eps_ = 0.0;
  double jump_rate_ = 0.0;
  double sub_sigma_ = 0.0;  // per-coordinate Gaussian substitute std dev
  std::vector<double> quantile_radii_;
  std::vector<double> atom_cum_;  // dyadic: cumulative masses
  std::vector<double> atom_y_;
};

std::array<double, 3> sample_increment(const levy::LevyModel& model, double t,
                                       Rng& rng);

McEstimate mc_heat_content(const levy::LevyModel& model,
                           const geometry::Shape& shape, double t,
                           std::uint64_t n, std::uint64_t root_seed,
                           std::uint64_t stream = 0);
// Reference implementation without OpenMP; must agree bit for bit.
McEstimate mc_heat_content_serial(const levy::LevyModel& model,
                                  const geometry::Shape& shape, double t,
                                  std::uint64_t n, std::uint64_t root_seed,
                                  std::uint64_t stream = 0);

// Mean of |S| for the standard stable law scaled by `sigma` (example-5 leg).
McEstimate mc_mean_abs_stable(double alpha, double beta, double sigma,
                              std::uint64_t n, std::uint64_t root_seed,
                              std::uint64_t stream = 0);

// Pairwise (tree) reduction in a fixed order; deterministic under any
// scheduling of the block producers.
double tree_sum(std::vector<double> blocks);

}  // namespace levyheat::sampling
