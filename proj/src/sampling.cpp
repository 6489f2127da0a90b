#include "levyheat/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace levyheat::sampling {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& w : s_) w = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  // 53-bit mantissa shifted into (0,1); never returns 0 or 1.
  const std::uint64_t bits = next_u64() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  const double u = uniform();
  const double v = uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * kPi * v);
}

double Rng::exponential() { return -std::log(uniform()); }

Rng stream_rng(std::uint64_t root_seed, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t x = root_seed;
  std::uint64_t a = splitmix64(x);
  x ^= 0x6a09e667f3bcc909ULL + stream;
  std::uint64_t b = splitmix64(x);
  x ^= 0xbb67ae8584caa73bULL + index;
  std::uint64_t c = splitmix64(x);
  return Rng(a ^ rotl(b, 17) ^ rotl(c, 41) ^ (index * 0x9e3779b97f4a7c15ULL));
}

double sample_stable_std(double alpha, double beta, Rng& rng) {
  if (!(alpha > 0.0 && alpha <= 2.0))
    throw std::invalid_argument("sample_stable_std: alpha must lie in (0,2]");
  if (!(beta >= -1.0 && beta <= 1.0))
    throw std::invalid_argument("sample_stable_std: beta must lie in [-1,1]");
  const double V = kPi * (rng.uniform() - 0.5);  // U(-pi/2, pi/2)
  const double W = rng.exponential();
  if (std::abs(alpha - 1.0) < 1e-12) {
    // Log-corrected branch at alpha = 1.
    const double h = kPi / 2.0 + beta * V;
    return (2.0 / kPi) *
           (h * std::tan(V) - beta * std::log((kPi / 2.0) * W * std::cos(V) / h));
  }
  const double tb = beta * std::tan(kPi * alpha / 2.0);
  const double B = std::atan(tb) / alpha;
  const double S = std::pow(1.0 + tb * tb, 1.0 / (2.0 * alpha));
  const double num = std::sin(alpha * (V + B));
  const double den = std::pow(std::cos(V), 1.0 / alpha);
  const double tail = std::pow(std::cos(V - alpha * (V + B)) / W, (1.0 - alpha) / alpha);
  return S * num / den * tail;
}

double sample_stable_1d(double alpha, double beta, double scale, Rng& rng) {
  if (!(scale > 0.0)) throw std::invalid_argument("sample_stable_1d: scale must be > 0");
  return scale * sample_stable_std(alpha, beta, rng);
}

double sample_positive_stable(double alpha_prime, Rng& rng) {
  if (!(alpha_prime > 0.0 && alpha_prime < 1.0))
    throw std::invalid_argument("sample_positive_stable: index must lie in (0,1)");
  // Totally skewed CMS draw rescaled to the Laplace normalization
  // E exp(-l T) = exp(-l^a).
  const double z = sample_stable_std(alpha_prime, 1.0, rng);
  const double scale = std::pow(std::cos(kPi * alpha_prime / 2.0), 1.0 / alpha_prime);
  return scale * z;
}

std::array<double, 3> sample_uniform(const geometry::Shape& shape, Rng& rng) {
  const int d = shape.dim();
  if (const geometry::UnionShape* u = shape.as_union()) {
    const double pick = rng.uniform() * shape.volume();
    double acc = 0.0;
    for (const auto& m : u->members) {
      acc += m.volume();
      if (pick <= acc || &m == &u->members.back()) return sample_uniform(m, rng);
    }
  }
  auto [lo, hi] = shape.bounding_box();
  // Boxes and intervals fill their bounding box; everything else rejects.
  const double bb_vol = [&] {
    double v = 1.0;
    for (int i = 0; i < d; ++i)
      v *= hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)];
    return v;
  }();
  const bool direct = std::abs(bb_vol - shape.volume()) < 1e-12 * std::max(1.0, bb_vol);
  for (int tries = 0; tries < 100000; ++tries) {
    std::array<double, 3> x{0, 0, 0};
    for (int i = 0; i < d; ++i) {
      const auto k = static_cast<std::size_t>(i);
      x[k] = lo[k] + (hi[k] - lo[k]) * rng.uniform();
    }
    if (direct || shape.contains(x)) return x;
  }
  throw std::runtime_error("sample_uniform: rejection sampler failed");
}

namespace {

std::uint64_t sample_poisson(double lambda, Rng& rng) {
  if (lambda <= 0.0) return 0;
  if (lambda > 30.0) {
    // Split to keep the product method numerically exact.
    return sample_poisson(lambda / 2.0, rng) + sample_poisson(lambda / 2.0, rng);
  }
  const double limit = std::exp(-lambda);
  std::uint64_t k = 0;
  double prod = rng.uniform();
  while (prod > limit) {
    ++k;
    prod *= rng.uniform();
  }
  return k;
}

std::array<double, 3> random_direction(int d, Rng& rng) {
  if (d == 1) return {rng.uniform() < 0.5 ? -1.0 : 1.0, 0, 0};
  std::array<double, 3> v{0, 0, 0};
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const auto k = static_cast<std::size_t>(i);
      v[k] = rng.normal();
      n2 += v[k] * v[k];
    }
  } while (n2 == 0.0);
  const double inv = 1.0 / std::sqrt(n2);
  for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] *= inv;
  return v;
}

}  // namespace

IncrementSampler::IncrementSampler(levy::LevyModel model, double t)
    : model_(std::move(model)), t_(t) {
  if (!(t > 0.0)) throw std::invalid_argument("IncrementSampler: t must be > 0");
  if (model_.dim() > 3)
    throw std::invalid_argument("IncrementSampler: dimension must be <= 3");
  using levy::ModelKind;
  switch (model_.kind()) {
    case ModelKind::brownian:
    case ModelKind::isotropic_stable:
    case ModelKind::brownian_plus_stable:
    case ModelKind::asym_stable_1d:
    case ModelKind::compound_poisson_drift:
      return;  // exact samplers, nothing to precompute
    case ModelKind::radial_density:
    case ModelKind::discrete_dyadic: {
      // Compound-Poisson approximation: jumps above eps are exact, the rest
      // is replaced by a Gaussian matching the small-jump variance, with eps
      // shrunk until that variance is below 1e-6 of the unit-ball second
      // moment.
      const double m2_scale = model_.levy_radial_moment2(1.0);
      double eps = 0.5;
      for (int i = 0; i < 60; ++i) {
        if (model_.levy_radial_moment2(eps) <= 1e-6 * m2_scale) break;
        if (t_ * model_.levy_tail_mass(eps / 2.0) > 2e5) break;  // work cap
        eps /= 2.0;
      }
      eps_ = eps;
      jump_rate_ = model_.levy_tail_mass(eps_);
      const int d = model_.dim();
      sub_sigma_ = std::sqrt(t_ * model_.levy_radial_moment2(eps_) / d);
      if (model_.kind() == ModelKind::discrete_dyadic) {
        double cum = 0.0;
        for (int k = 1; k < 1100; ++k) {
          const double y = std::ldexp(1.0, -k);
          if (y <= eps_) break;
          cum += 2.0 * std::pow(2.0, k * model_.alpha() / 2.0);
          atom_cum_.push_back(cum);
          atom_y_.push_back(y);
        }
      } else {
        // Quantile table of the normalized jump-radius law on (eps, inf).
        const int nq = 1024;
        quantile_radii_.resize(nq + 1);
        for (int j = 0; j <= nq; ++j) {
          const double q = static_cast<double>(j) / nq;
          if (j == 0) {
            quantile_radii_[static_cast<std::size_t>(j)] = eps_;
            continue;
          }
          const double target = jump_rate_ * (1.0 - q);
          double lo = eps_, hi = eps_;
          while (model_.levy_tail_mass(hi) > target && hi < 1e12) hi *= 2.0;
          for (int it = 0; it < 60; ++it) {
            const double mid = std::sqrt(lo * hi);
            if (model_.levy_tail_mass(mid) > target)
              lo = mid;
            else
              hi = mid;
          }
          quantile_radii_[static_cast<std::size_t>(j)] = std::sqrt(lo * hi);
        }
      }
      return;
    }
    case ModelKind::custom_1d:
      throw std::invalid_argument("IncrementSampler: custom test measures not supported");
  }
}

std::array<double, 3> IncrementSampler::operator()(Rng& rng) const {
  using levy::ModelKind;
  const int d = model_.dim();
  std::array<double, 3> x{0, 0, 0};
  switch (model_.kind()) {
    case ModelKind::brownian: {
      const double sd = std::sqrt(2.0 * model_.eta() * t_);
      for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = sd * rng.normal();
      return x;
    }
    case ModelKind::isotropic_stable: {
      const double alpha = model_.alpha();
      if (d == 1) {
        x[0] = std::pow(model_.stable_scale() * t_, 1.0 / alpha) *
               sample_stable_std(alpha, 0.0, rng);
        return x;
      }
      // Brownian motion subordinated by a positive (alpha/2)-stable time.
      const double tau = 2.0 * std::pow(model_.stable_scale() * t_, 2.0 / alpha);
      const double S = tau * sample_positive_stable(alpha / 2.0, rng);
      const double sd = std::sqrt(S);
      for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = sd * rng.normal();
      return x;
    }
    case ModelKind::brownian_plus_stable: {
      const double sd = std::sqrt(2.0 * model_.eta() * t_);
      const double alpha = model_.alpha();
      if (d == 1) {
        x[0] = sd * rng.normal() + std::pow(model_.stable_scale() * t_, 1.0 / alpha) *
                                       sample_stable_std(alpha, 0.0, rng);
        return x;
      }
      const double tau = 2.0 * std::pow(model_.stable_scale() * t_, 2.0 / alpha);
      const double S = tau * sample_positive_stable(alpha / 2.0, rng);
      const double sds = std::sqrt(S);
      for (int i = 0; i < d; ++i)
        x[static_cast<std::size_t>(i)] = sd * rng.normal() + sds * rng.normal();
      return x;
    }
    case ModelKind::asym_stable_1d: {
      const double alpha = model_.alpha();
      x[0] = std::pow(t_, 1.0 / alpha) * model_.stable_sigma() *
             sample_stable_std(alpha, model_.stable_beta(), rng);
      return x;
    }
    case ModelKind::compound_poisson_drift: {
      const auto g0 = model_.compound_gamma0();
      for (int i = 0; i < 3; ++i)
        x[static_cast<std::size_t>(i)] = g0[static_cast<std::size_t>(i)] * t_;
      for (const auto& a : *model_.atom_list()) {
        const std::uint64_t k = sample_poisson(a.mass * t_, rng);
        for (int i = 0; i < 3; ++i)
          x[static_cast<std::size_t>(i)] +=
              static_cast<double>(k) * a.y[static_cast<std::size_t>(i)];
      }
      return x;
    }
    case ModelKind::radial_density:
    case ModelKind::discrete_dyadic: {
      for (int i = 0; i < d; ++i)
        x[static_cast<std::size_t>(i)] = sub_sigma_ * rng.normal();
      const std::uint64_t jumps = sample_poisson(jump_rate_ * t_, rng);
      for (std::uint64_t j = 0; j < jumps; ++j) {
        double radius;
        if (!atom_y_.empty()) {
          const double pick = rng.uniform() * atom_cum_.back();
          const auto it = std::lower_bound(atom_cum_.begin(), atom_cum_.end(), pick);
          radius = atom_y_[static_cast<std::size_t>(it - atom_cum_.begin())];
        } else {
          const double q = rng.uniform() * 1024.0;
          const auto j0 = static_cast<std::size_t>(std::min(q, 1023.0));
          const double frac = q - static_cast<double>(j0);
          const double r0 = quantile_radii_[j0], r1 = quantile_radii_[j0 + 1];
          radius = r0 * std::pow(r1 / r0, frac);
        }
        const auto dir = random_direction(d, rng);
        for (int i = 0; i < d; ++i)
          x[static_cast<std::size_t>(i)] += radius * dir[static_cast<std::size_t>(i)];
      }
      return x;
    }
    case ModelKind::custom_1d:
      break;
  }
  throw std::invalid_argument("IncrementSampler: unsupported model");
}

std::array<double, 3> sample_increment(const levy::LevyModel& model, double t,
                                       Rng& rng) {
  return IncrementSampler(model, t)(rng);
}

double tree_sum(std::vector<double> blocks) {
  if (blocks.empty()) return 0.0;
  while (blocks.size() > 1) {
    std::size_t half = (blocks.size() + 1) / 2;
    for (std::size_t i = 0; i + half < blocks.size(); ++i)
      blocks[i] += blocks[i + half];
    blocks.resize(half);
  }
  return blocks[0];
}

namespace {

constexpr std::uint64_t kBlock = 8192;

template <bool Parallel>
McEstimate mc_heat_impl(const levy::LevyModel& model, const geometry::Shape& shape,
                        double t, std::uint64_t n, std::uint64_t root_seed,
                        std::uint64_t stream) {
  if (n < 1000)
    throw std::invalid_argument("mc_heat_content: needs at least 10^3 samples");
  if (!(shape.volume() > 0.0))
    throw std::invalid_argument("mc_heat_content: shape with zero volume");
  if (model.dim() != shape.dim())
    throw std::invalid_argument("mc_heat_content: model/shape dimension mismatch");
  const IncrementSampler inc(model, t);
  const std::uint64_t nb = (n + kBlock - 1) / kBlock;
  std::vector<std::uint64_t> counts(nb, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (Parallel)
#endif
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(nb); ++b) {
    const std::uint64_t lo = static_cast<std::uint64_t>(b) * kBlock;
    const std::uint64_t hi = std::min(n, lo + kBlock);
    std::uint64_t escaped = 0;
    for (std::uint64_t i = lo; i < hi; ++i) {
      Rng rng = stream_rng(root_seed, stream, i);
      const auto x = sample_uniform(shape, rng);
      const auto dx = inc(rng);
      const std::array<double, 3> y{x[0] + dx[0], x[1] + dx[1], x[2] + dx[2]};
      if (!shape.contains(y)) ++escaped;
    }
    counts[static_cast<std::size_t>(b)] = escaped;
  }
  std::uint64_t escaped = 0;
  for (std::uint64_t c : counts) escaped += c;
  const double vol = shape.volume();
  const double p = static_cast<double>(escaped) / static_cast<double>(n);
  McEstimate e;
  e.value = vol * p;
  e.std_error = vol * std::sqrt(p * (1.0 - p) / static_cast<double>(n - 1));
  e.n = n;
  e.seed = root_seed;
  e.stream = stream;
  e.t = t;
  return e;
}

}  // namespace

McEstimate mc_heat_content(const levy::LevyModel& model, const geometry::Shape& shape,
                           double t, std::uint64_t n, std::uint64_t root_seed,
                           std::uint64_t stream) {
  return mc_heat_impl<true>(model, shape, t, n, root_seed, stream);
}

McEstimate mc_heat_content_serial(const levy::LevyModel& model,
                                  const geometry::Shape& shape, double t,
                                  std::uint64_t n, std::uint64_t root_seed,
                                  std::uint64_t stream) {
  return mc_heat_impl<false>(model, shape, t, n, root_seed, stream);
}

McEstimate mc_mean_abs_stable(double alpha, double beta, double sigma,
                              std::uint64_t n, std::uint64_t root_seed,
                              std::uint64_t stream) {
  if (n < 64) throw std::invalid_argument("mc_mean_abs_stable: n too small");
  const std::uint64_t nb = (n + kBlock - 1) / kBlock;
  std::vector<double> sums(nb, 0.0);
  std::vector<std::uint64_t> counts(nb, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(nb); ++b) {
    const std::uint64_t lo = static_cast<std::uint64_t>(b) * kBlock;
    const std::uint64_t hi = std::min(n, lo + kBlock);
    double s = 0.0;
    for (std::uint64_t i = lo; i < hi; ++i) {
      Rng rng = stream_rng(root_seed, stream, i);
      s += std::abs(sigma * sample_stable_std(alpha, beta, rng));
    }
    sums[static_cast<std::size_t>(b)] = s;
    counts[static_cast<std::size_t>(b)] = hi - lo;
  }
  // |S| has infinite variance for alpha < 2, so an iid-variance interval
  // would be optimistic; a batch-means interval tracks the actual
  // fluctuation scale of the mean.
  const std::uint64_t nbatch = std::min<std::uint64_t>(32, nb);
  std::vector<double> batch_mean(nbatch, 0.0), batch_n(nbatch, 0.0);
  for (std::uint64_t b = 0; b < nb; ++b) {
    batch_mean[b % nbatch] += sums[b];
    batch_n[b % nbatch] += static_cast<double>(counts[b]);
  }
  for (std::uint64_t j = 0; j < nbatch; ++j) batch_mean[j] /= batch_n[j];
  const double mean = tree_sum(sums) / static_cast<double>(n);
  double var_b = 0.0;
  for (std::uint64_t j = 0; j < nbatch; ++j)
    var_b += (batch_mean[j] - mean) * (batch_mean[j] - mean);
  var_b /= std::max<double>(1.0, static_cast<double>(nbatch - 1));
  McEstimate e;
  e.value = mean;
  e.std_error = std::sqrt(var_b / static_cast<double>(nbatch));
  e.n = n;
  e.seed = root_seed;
  e.stream = stream;
  return e;
}

}  // namespace levyheat::sampling
