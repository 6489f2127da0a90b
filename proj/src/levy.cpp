#include "levyheat/levy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "levyheat/quadrature.hpp"

namespace levyheat::levy {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kExpFloor = 745.0;  // exp(-x) underflows past this

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

double exp_neg(double x) { return x > kExpFloor ? 0.0 : std::exp(-x); }

// 1 - k(x) for k in {cos, J0, sinc}, series-stable for small arguments.
double one_minus_cos(double x) {
  const double s = std::sin(x / 2.0);
  return 2.0 * s * s;
}
double one_minus_j0(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return x2 / 4.0 * (1.0 - x2 / 16.0);
  }
  return 1.0 - std::cyl_bessel_j(0.0, x);
}
double one_minus_sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return x2 / 6.0 * (1.0 - x2 / 20.0);
  }
  return 1.0 - std::sin(x) / x;
}

double vec_norm(const std::array<double, 3>& v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

}  // namespace

double stable_k1(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("stable_k1: alpha must lie in (0,2)");
  // Gamma(2-a) cos(pi a/2) / (a (1-a)) rewritten through sinc for stability
  // across alpha = 1.
  const double x = kPi * (1.0 - alpha) / 2.0;
  return std::tgamma(2.0 - alpha) * (kPi / 2.0) * sinc(x) / alpha;
}

namespace {

double compute_kd(double alpha, int dim) {
  if (dim == 1) return stable_k1(alpha);
  const quad::Kernel kernel = dim == 2 ? quad::Kernel::j0 : quad::Kernel::sin;
  // dim==3 uses 1 - sinc(u) = 1 - sin(u)/u; fold the extra 1/u into f.
  auto w = [alpha](double u) { return std::pow(u, -1.0 - alpha); };
  const double z0 = quad::kernel_zero(kernel, 0);
  auto head_fn = [&](double u) {
    const double om = dim == 2 ? one_minus_j0(u) : one_minus_sinc(u);
    return om * w(u);
  };
  const double head = quad::integrate_power_singular(head_fn, z0, 1e-12);
  const double flat_tail = std::pow(z0, -alpha) / alpha;  // ∫_{z0}^∞ w
  quad::OscResult osc =
      dim == 2 ? quad::oscillatory_tail(w, quad::Kernel::j0, 1.0, z0, 1e-12)
               : quad::oscillatory_tail([&](double u) { return w(u) / u; },
                                        quad::Kernel::sin, 1.0, z0, 1e-12);
  return head + flat_tail - osc.value;
}

}  // namespace

double stable_kd(double alpha, int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("stable_kd: dim must be 1..3");
  static std::mutex mu;
  static std::map<std::pair<double, int>, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(alpha, dim);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const double v = compute_kd(alpha, dim);
  cache.emplace(key, v);
  return v;
}

// ---------------------------------------------------------------------------
// RunningSup

struct RunningSup::State {
  std::function<double(double)> f;
  bool monotone;
  mutable std::mutex mu;
  mutable std::vector<double> nodes;    // log-spaced
  mutable std::vector<double> prefix;   // running max of f over nodes
  mutable std::vector<int> argmax;      // index achieving prefix max
  mutable std::map<int, double> polish; // golden-section refined local maxima
  static constexpr double kLo = 1e-8;
  static constexpr int kPerDecade = 1024;

  double node_at(int k) const { return kLo * std::pow(10.0, double(k) / kPerDecade); }

  void ensure(double r) const {
    int want = static_cast<int>(std::ceil(std::log10(r / kLo) * kPerDecade)) + 1;
    want = std::max(want, 2);
    if (static_cast<int>(nodes.size()) >= want) return;
    int k = static_cast<int>(nodes.size());
    nodes.reserve(static_cast<std::size_t>(want));
    prefix.reserve(static_cast<std::size_t>(want));
    argmax.reserve(static_cast<std::size_t>(want));
    for (; k < want; ++k) {
      const double x = node_at(k);
      const double fx = f(x);
      if (k == 0) {
        nodes.push_back(x);
        prefix.push_back(fx);
        argmax.push_back(0);
      } else {
        nodes.push_back(x);
        if (fx > prefix.back()) {
          prefix.push_back(fx);
          argmax.push_back(k);
        } else {
          prefix.push_back(prefix.back());
          argmax.push_back(argmax.back());
        }
      }
    }
  }

  double polished_max(int m) const {
    auto it = polish.find(m);
    if (it != polish.end()) return it->second;
    double a = m > 0 ? nodes[static_cast<std::size_t>(m - 1)] : 0.0;
    double b = nodes[static_cast<std::size_t>(m)];
    double c = m + 1 < static_cast<int>(nodes.size())
                   ? nodes[static_cast<std::size_t>(m + 1)]
                   : b * 1.01;
    const double gr = 0.6180339887498949;
    double lo = a, hi = c;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < 80; ++i) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = f(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = f(x1);
      }
    }
    const double v = std::max(f1, f2);
    polish.emplace(m, v);
    return v;
  }
};

RunningSup::RunningSup(std::function<double(double)> f, bool nondecreasing)
    : state_(std::make_unique<State>()) {
  state_->f = std::move(f);
  state_->monotone = nondecreasing;
}
RunningSup::~RunningSup() = default;
RunningSup::RunningSup(RunningSup&&) noexcept = default;

double RunningSup::sup(double r) const {
  if (r < 0) throw std::invalid_argument("RunningSup::sup: negative argument");
  if (r == 0.0) return 0.0;
  if (state_->monotone) return state_->f(r);
  std::lock_guard<std::mutex> lock(state_->mu);
  if (r <= State::kLo) return std::max(state_->f(r), 0.0);
  state_->ensure(r);
  const auto& nodes = state_->nodes;
  auto it = std::upper_bound(nodes.begin(), nodes.end(), r);
  int idx = static_cast<int>(it - nodes.begin()) - 1;
  idx = std::max(idx, 0);
  double s = std::max(state_->prefix[static_cast<std::size_t>(idx)], state_->f(r));
  const int m = state_->argmax[static_cast<std::size_t>(idx)];
  if (m > 0 && m < idx) s = std::max(s, state_->polished_max(m));
  return s;
}

double RunningSup::inverse(double v) const {
  if (v <= 0.0) return 0.0;
  double hi = 1.0;
  int guard = 0;
  while (sup(hi) < v) {
    hi *= 4.0;
    if (++guard > 520 || hi > 1e300)
      throw std::overflow_error("generalized inverse: value beyond reachable range");
  }
  double lo = 0.0;
  for (int i = 0; i < 200 && (hi - lo) > 1e-14 * hi; ++i) {
    const double mid = lo == 0.0 ? hi / 4.0 : std::sqrt(lo * hi);
    if (sup(mid) >= v)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Lazily extended log-log spline for quadrature-defined exponents.

namespace {

class LogLogSpline {
 public:
  explicit LogLogSpline(std::function<double(double)> f) : f_(std::move(f)) {}

  double eval(double r) const {
    std::lock_guard<std::mutex> lock(mu_);
    const double lr = std::log(r);
    ensure(lr);
    if (lx_.size() < 4 || lr < lx_.front() || lr > lx_.back())
      return f_(r);  // outside cap range: fall back to the exact evaluation
    auto it = std::upper_bound(lx_.begin(), lx_.end(), lr);
    std::size_t i = static_cast<std::size_t>(it - lx_.begin());
    i = std::min(std::max<std::size_t>(i, 1), lx_.size() - 1) - 1;
    const double h = lx_[i + 1] - lx_[i];
    const double u = (lr - lx_[i]) / h;
    const double y0 = ly_[i], y1 = ly_[i + 1];
    const double m0 = slope_[i] * h, m1 = slope_[i + 1] * h;
    const double u2 = u * u, u3 = u2 * u;
    const double val = (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * m0 +
                       (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * m1;
    return std::exp(val);
  }

 private:
  static constexpr int kPerDecade = 96;
  static constexpr double kLnLoCap = -23.0 * 2.302585092994046;  // 1e-23
  static constexpr double kLnHiCap = 40.0 * 2.302585092994046;   // 1e40

  void ensure(double lr) const {
    const double step = std::log(10.0) / kPerDecade;
    double want_lo = std::max(lr - 2 * step, kLnLoCap);
    double want_hi = std::min(lr + 2 * step, kLnHiCap);
    if (lr < kLnLoCap || lr > kLnHiCap) return;
    if (!lx_.empty() && want_lo >= lx_.front() && want_hi <= lx_.back()) return;
    if (lx_.empty()) {
      lo_idx_ = static_cast<int>(std::floor(want_lo / step)) - 2;
      hi_idx_ = static_cast<int>(std::ceil(want_hi / step)) + 2;
    } else {
      lo_idx_ = std::min(lo_idx_, static_cast<int>(std::floor(want_lo / step)) - 2);
      hi_idx_ = std::max(hi_idx_, static_cast<int>(std::ceil(want_hi / step)) + 2);
    }
    lx_.clear();
    ly_.clear();
    for (int k = lo_idx_; k <= hi_idx_; ++k) {
      const double x = k * step;
      lx_.push_back(x);
      ly_.push_back(std::log(std::max(f_(std::exp(x)), 1e-300)));
    }
    slope_.assign(lx_.size(), 0.0);
    for (std::size_t i = 0; i < lx_.size(); ++i) {
      if (i == 0)
        slope_[i] = (ly_[1] - ly_[0]) / (lx_[1] - lx_[0]);
      else if (i + 1 == lx_.size())
        slope_[i] = (ly_[i] - ly_[i - 1]) / (lx_[i] - lx_[i - 1]);
      else
        slope_[i] = (ly_[i + 1] - ly_[i - 1]) / (lx_[i + 1] - lx_[i - 1]);
    }
  }

  std::function<double(double)> f_;
  mutable std::mutex mu_;
  mutable std::vector<double> lx_, ly_, slope_;
  mutable int lo_idx_ = 0, hi_idx_ = 0;
};

// Radial profile G with nu(dx) = c ||x||^{-d} G(||x||) dx; the shell density
// in the radius u is c omega_d u^{-1} G(u).
struct ProfileFns {
  RadialProfile profile;
  double alpha = 0;
  double delta = 0;
  double alpha1 = 0;

  double g(double u) const {
    switch (profile) {
      case RadialProfile::truncated:
        return u < 1.0 ? std::pow(u, -alpha) : 0.0;
      case RadialProfile::tempered:
        return std::pow(u, -alpha) * exp_neg(u);
      case RadialProfile::lamperti: {
        if (u < 1e-8) return std::pow(u, -alpha);  // u e^{du} (e^u-1)^{-a-1} -> u^{-a}
        const double em1 = std::expm1(u);
        const double ln = std::log(u) + delta * u - (alpha + 1.0) * std::log(em1);
        return ln < -700 ? 0.0 : std::exp(ln);
      }
      case RadialProfile::layered:
        return u < 1.0 ? std::pow(u, -alpha) : std::pow(u, -alpha1);
    }
    return 0.0;
  }

  // Effective end of support (point past which G is negligible); inf-like
  // for the layered power tail.
  double support_hi() const {
    switch (profile) {
      case RadialProfile::truncated:
        return 1.0;
      case RadialProfile::tempered:
        return 80.0;
      case RadialProfile::lamperti:
        return 80.0 / std::max(alpha + 1.0 - delta, 0.05);
      case RadialProfile::layered:
        return std::numeric_limits<double>::infinity();
    }
    return 1.0;
  }

  // ∫_s^∞ u^{-1} G(u) du
  double tail_w(double s) const {
    switch (profile) {
      case RadialProfile::truncated:
        return s < 1.0 ? (std::pow(s, -alpha) - 1.0) / alpha : 0.0;
      case RadialProfile::layered: {
        const double top = std::pow(std::max(s, 1.0), -alpha1) / alpha1;
        if (s >= 1.0) return top;
        return (std::pow(s, -alpha) - 1.0) / alpha + 1.0 / alpha1;
      }
      default: {
        auto f = [this](double u) { return g(u) / u; };
        return quad::integrate(f, s, support_hi(), 1e-11) +
               0.0;  // exponential profiles vanish past support_hi
      }
    }
  }

  // ∫_0^s u G(u) du
  double moment2_w(double s) const {
    switch (profile) {
      case RadialProfile::truncated: {
        const double m = std::min(s, 1.0);
        return std::pow(m, 2.0 - alpha) / (2.0 - alpha);
      }
      case RadialProfile::layered: {
        if (s <= 1.0) return std::pow(s, 2.0 - alpha) / (2.0 - alpha);
        return 1.0 / (2.0 - alpha) +
               (std::pow(s, 2.0 - alpha1) - 1.0) / (2.0 - alpha1);
      }
      default: {
        auto f = [this](double u) { return g(u) * u; };
        return quad::integrate_power_singular(f, std::min(s, support_hi()), 1e-11);
      }
    }
  }

  // ∫_0^s G(u) du (finite only when alpha < 1)
  double abs_w(double s) const {
    switch (profile) {
      case RadialProfile::truncated: {
        const double m = std::min(s, 1.0);
        return std::pow(m, 1.0 - alpha) / (1.0 - alpha);
      }
      case RadialProfile::layered: {
        if (s <= 1.0) return std::pow(s, 1.0 - alpha) / (1.0 - alpha);
        const double head = 1.0 / (1.0 - alpha);
        if (std::abs(alpha1 - 1.0) < 1e-12) return head + std::log(s);
        return head + (std::pow(s, 1.0 - alpha1) - 1.0) / (1.0 - alpha1);
      }
      default: {
        auto f = [this](double u) { return g(u); };
        return quad::integrate_power_singular(f, std::min(s, support_hi()), 1e-11);
      }
    }
  }
};

}  // namespace

// ---------------------------------------------------------------------------

struct LevyModel::Impl {
  ModelKind kind = ModelKind::brownian;
  int dim = 1;
  double eta = 0.0;
  double alpha = kNan;
  double c = kNan;
  ProfileFns prof;
  double c1 = 0.0, c2 = 0.0;  // asym_stable_1d
  std::vector<Atom> atoms;
  std::array<double, 3> gamma0{0, 0, 0};
  std::function<double(double)> rho_plus, rho_minus;
  double custom_hi = 0.0, custom_gamma = 0.0;
  bool custom_fv = false;

  bool symmetric = false;
  bool isotropic = false;
  bool monotone_psi = false;
  double shell_coeff = 0.0;  // stable kinds: c / K_d(alpha)

  mutable std::mutex mu;
  mutable std::unique_ptr<RunningSup> psi_sup;
  mutable std::unique_ptr<LogLogSpline> psi_spline;

  double omega_d() const { return dim == 1 ? 2.0 : (dim == 2 ? 2.0 * kPi : 4.0 * kPi); }

  // Radial exponent for the quadrature-defined kinds.
  double psi_radial_quad(double r) const {
    const quad::Kernel kernel = dim == 1 ? quad::Kernel::cos : quad::Kernel::j0;
    auto w = [this](double u) { return prof.g(u) / u; };
    auto one_minus = [kernel](double x) {
      return kernel == quad::Kernel::cos ? one_minus_cos(x) : one_minus_j0(x);
    };
    const double weight = c * omega_d();
    const double shi = prof.support_hi();
    const double z0 = quad::kernel_zero(kernel, 0) / r;
    auto head_fn = [&](double u) { return one_minus(r * u) * w(u); };
    if (z0 >= shi) {
      return weight * quad::integrate_power_singular(head_fn, shi, 1e-11);
    }
    const double head = quad::integrate_power_singular(head_fn, z0, 1e-11);
    const double flat = prof.tail_w(z0);
    const double osc_part =
        std::isfinite(shi) && shi <= z0
            ? 0.0
            : quad::oscillatory_tail(w, kernel, r, z0, 1e-11).value;
    return weight * (head + flat - osc_part);
  }

  double psi_exact(double r) const {
    if (r < 0) throw std::invalid_argument("psi: negative radial frequency rejected");
    if (r == 0.0) return 0.0;
    switch (kind) {
      case ModelKind::brownian:
        return eta * r * r;
      case ModelKind::isotropic_stable:
        return c * std::pow(r, alpha);
      case ModelKind::brownian_plus_stable:
        return eta * r * r + c * std::pow(r, alpha);
      case ModelKind::radial_density:
        return psi_radial_quad(r);
      case ModelKind::discrete_dyadic: {
        // 2 sum_k 2^{k a/2} (1 - cos(r 2^{-k})), truncated once the running
        // total stops moving at relative 1e-14.
        double total = 0.0;
        for (int k = 1; k < 1100; ++k) {
          const double y = std::ldexp(1.0, -k);
          const double sh = std::sin(r * y / 2.0);
          const double term = 2.0 * std::pow(2.0, k * alpha / 2.0) * 2.0 * sh * sh;
          total += term;
          if (k > 8 && term < 1e-14 * total) break;
        }
        return total;
      }
      case ModelKind::compound_poisson_drift: {
        if (!symmetric)
          throw std::invalid_argument("psi: model is not symmetric/isotropic");
        double total = 0.0;
        for (const auto& a : atoms) {
          const double sh = std::sin(r * vec_norm(a.y) / 2.0);
          total += a.mass * 2.0 * sh * sh;
        }
        return total;
      }
      case ModelKind::asym_stable_1d:
      case ModelKind::custom_1d:
        throw std::invalid_argument("psi: model is not symmetric/isotropic");
    }
    return 0.0;
  }

  const RunningSup& sup() const {
    std::lock_guard<std::mutex> lock(mu);
    if (!psi_sup) {
      const Impl* self = this;
      psi_sup = std::make_unique<RunningSup>(
          [self](double r) { return self->psi_smooth_inner(r); }, monotone_psi);
    }
    return *psi_sup;
  }

  double psi_smooth_inner(double r) const {
    if (kind == ModelKind::radial_density) {
      {
        std::lock_guard<std::mutex> lock(mu);
        if (!psi_spline) {
          const Impl* self = this;
          psi_spline =
              std::make_unique<LogLogSpline>([self](double x) { return self->psi_radial_quad(x); });
        }
      }
      return r == 0.0 ? 0.0 : psi_spline->eval(r);
    }
    return psi_exact(r);
  }

  // |gamma + ∫ y (1_{|y|<r} - 1_{|y|<1}) nu(dy)| (vector norm)
  double compensator_magnitude(double r) const {
    if (symmetric) return 0.0;
    switch (kind) {
      case ModelKind::asym_stable_1d: {
        if (std::abs(alpha - 1.0) < 1e-12) return 0.0;
        return std::abs(c1 - c2) * std::pow(r, 1.0 - alpha) / std::abs(1.0 - alpha);
      }
      case ModelKind::compound_poisson_drift: {
        std::array<double, 3> v{0, 0, 0};
        // gamma = ∫_{|y|<=1} y nu - gamma0
        for (const auto& a : atoms) {
          const double n = vec_norm(a.y);
          for (int i = 0; i < 3; ++i) {
            if (n <= 1.0) v[static_cast<std::size_t>(i)] += a.mass * a.y[static_cast<std::size_t>(i)];
            const double ind = (n < r ? 1.0 : 0.0) - (n < 1.0 ? 1.0 : 0.0);
            v[static_cast<std::size_t>(i)] += a.mass * a.y[static_cast<std::size_t>(i)] * ind;
          }
        }
        for (int i = 0; i < 3; ++i) v[static_cast<std::size_t>(i)] -= gamma0[static_cast<std::size_t>(i)];
        return vec_norm(v);
      }
      case ModelKind::custom_1d: {
        auto net = [this](double y) { return y * (rho_plus(y) - rho_minus(y)); };
        const double lo = std::min(r, 1.0), hi = std::max(r, 1.0);
        double comp = quad::integrate_power_singular(net, std::min(hi, custom_hi), 1e-10) -
                      quad::integrate_power_singular(net, std::min(lo, custom_hi), 1e-10);
        if (r < 1.0) comp = -comp;
        return std::abs(custom_gamma + comp);
      }
      default:
        return 0.0;
    }
  }

  double tail_mass(double r) const {
    switch (kind) {
      case ModelKind::brownian:
        return 0.0;
      case ModelKind::isotropic_stable:
      case ModelKind::brownian_plus_stable:
        return shell_coeff * std::pow(r, -alpha) / alpha;
      case ModelKind::asym_stable_1d:
        return (c1 + c2) * std::pow(r, -alpha) / alpha;
      case ModelKind::radial_density:
        return c * omega_d() * prof.tail_w(r);
      case ModelKind::discrete_dyadic: {
        double total = 0.0;
        for (int k = 1; k < 1100; ++k) {
          const double y = std::ldexp(1.0, -k);
          if (y <= r) break;
          total += 2.0 * std::pow(2.0, k * alpha / 2.0);
        }
        return total;
      }
      case ModelKind::compound_poisson_drift: {
        double total = 0.0;
        for (const auto& a : atoms)
          if (vec_norm(a.y) > r) total += a.mass;
        return total;
      }
      case ModelKind::custom_1d: {
        if (r >= custom_hi) return 0.0;
        auto f = [this](double y) { return rho_plus(y) + rho_minus(y); };
        return quad::integrate(f, r, custom_hi, 1e-10);
      }
    }
    return 0.0;
  }

  double radial_moment2(double r) const {
    switch (kind) {
      case ModelKind::brownian:
        return 0.0;
      case ModelKind::isotropic_stable:
      case ModelKind::brownian_plus_stable:
        return shell_coeff * std::pow(r, 2.0 - alpha) / (2.0 - alpha);
      case ModelKind::asym_stable_1d:
        return (c1 + c2) * std::pow(r, 2.0 - alpha) / (2.0 - alpha);
      case ModelKind::radial_density:
        return c * omega_d() * prof.moment2_w(r);
      case ModelKind::discrete_dyadic: {
        double total = 0.0;
        for (int k = 1; k < 1100; ++k) {
          const double y = std::ldexp(1.0, -k);
          if (y > r) continue;
          const double term = 2.0 * std::pow(2.0, k * alpha / 2.0) * y * y;
          total += term;
          if (term < 1e-16 * total) break;
        }
        return total;
      }
      case ModelKind::compound_poisson_drift: {
        double total = 0.0;
        for (const auto& a : atoms) {
          const double n = vec_norm(a.y);
          if (n <= r) total += a.mass * n * n;
        }
        return total;
      }
      case ModelKind::custom_1d: {
        auto f = [this](double y) { return y * y * (rho_plus(y) + rho_minus(y)); };
        return quad::integrate_power_singular(f, std::min(r, custom_hi), 1e-10);
      }
    }
    return 0.0;
  }

  double small_abs_moment(double r) const {
    switch (kind) {
      case ModelKind::isotropic_stable:
      case ModelKind::brownian_plus_stable:
        return shell_coeff * std::pow(r, 1.0 - alpha) / (1.0 - alpha);
      case ModelKind::asym_stable_1d:
        return (c1 + c2) * std::pow(r, 1.0 - alpha) / (1.0 - alpha);
      case ModelKind::radial_density:
        return c * omega_d() * prof.abs_w(r);
      case ModelKind::discrete_dyadic: {
        double total = 0.0;
        for (int k = 1; k < 1100; ++k) {
          const double y = std::ldexp(1.0, -k);
          if (y > r) continue;
          const double term = 2.0 * std::pow(2.0, k * alpha / 2.0) * y;
          total += term;
          if (term < 1e-16 * total) break;
        }
        return total;
      }
      case ModelKind::compound_poisson_drift: {
        double total = 0.0;
        for (const auto& a : atoms) {
          const double n = vec_norm(a.y);
          if (n <= r) total += a.mass * n;
        }
        return total;
      }
      case ModelKind::custom_1d: {
        auto f = [this](double y) { return y * (rho_plus(y) + rho_minus(y)); };
        return quad::integrate_power_singular(f, std::min(r, custom_hi), 1e-10);
      }
      default:
        return 0.0;
    }
  }

  bool finite_variation() const {
    if (eta > 0.0) return false;
    switch (kind) {
      case ModelKind::brownian:
        return false;
      case ModelKind::isotropic_stable:
      case ModelKind::brownian_plus_stable:
      case ModelKind::asym_stable_1d:
      case ModelKind::radial_density:
        return alpha < 1.0;
      case ModelKind::discrete_dyadic:
      case ModelKind::compound_poisson_drift:
        return true;
      case ModelKind::custom_1d:
        return custom_fv;
    }
    return false;
  }

  bool unbounded_exponent() const {
    switch (kind) {
      case ModelKind::compound_poisson_drift:
        return false;
      case ModelKind::custom_1d:
        return false;  // not usable with the Fourier path anyway
      default:
        return true;
    }
  }
};

LevyModel::LevyModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

LevyModel LevyModel::brownian(double eta, int dim) {
  if (!(eta > 0.0)) throw std::invalid_argument("brownian: eta must be positive");
  if (dim < 1 || dim > 3) throw std::invalid_argument("model dimension must be 1..3");
  auto impl = std::make_shared<Impl>();
  impl->kind = ModelKind::brownian;
  impl->dim = dim;
  impl->eta = eta;
  impl->symmetric = true;
  impl->isotropic = true;
  impl->monotone_psi = true;
  return LevyModel(std::move(impl));
}

LevyModel LevyModel::isotropic_stable(double alpha, double c, int dim) {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("isotropic_stable: alpha must lie in (0,2)");
  if (!(c > 0.0)) throw std::invalid_argument("isotropic_stable: c must be positive");
  if (dim < 1 || dim > 3) throw std::invalid_argument("model dimension must be 1..3");
  auto impl = std::make_shared<Impl>();
  impl->kind = ModelKind::isotropic_stable;
  impl->dim = dim;
  impl->alpha = alpha;
  impl->c = c;
  impl->symmetric = true;
  impl->isotropic = true;
  impl->monotone_psi = true;
  impl->shell_coeff = c / stable_kd(alpha, dim);
  return LevyModel(std::move(impl));
}

LevyModel LevyModel::brownian_plus_stable(double eta, double c, double alpha, int dim) {
  if (!(eta > 0.0 && c > 0.0))
    throw std::invalid_argument("brownian_plus_stable: eta and c must be positive");
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("brownian_plus_stable: alpha must lie in (0,2)");
  if (dim < 1 || dim > 3) throw std::invalid_argument("model dimension must be 1..3");
  auto impl = std::make_shared<Impl>();
  impl->kind = ModelKind::brownian_plus_stable;
  impl->dim = dim;
  impl->eta = eta;
  impl->alpha = alpha;
  impl->c = c;
  impl->symmetric = true;
  impl->isotropic = true;
  impl->monotone_psi = true;
  impl->shell_coeff = c / stable_kd(alpha, dim);
  return LevyModel(std::move(impl));
}

LevyModel LevyModel::radial_density(RadialProfile profile, double alpha, double c,
                                    int dim, double delta, double alpha1) {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("radial_density: alpha must lie in (0,2)");
  if (!(c > 0.0)) throw std::invalid_argument("radial_density: c must be positive");
  if (dim < 1 || dim > 2)
    throw std::invalid_argument("radial_density: dim must be 1 or 2");
  if (profile == RadialProfile::lamperti && !(delta < alpha + 1.0))
    throw std::invalid_argument("radial_density: lamperti requires delta < alpha+1");
  if (profile == RadialProfile::layered && !(alpha1 > 0.0 && alpha1 < 2.0))
    throw std::invalid_argument("radial_density: layered requires alpha1 in (0,2)");
  auto impl = std::make_shared<Impl>();
  impl->kind = ModelKind::radial_density;
  impl->dim = dim;
  impl->alpha = alpha;
  impl->c = c;
  impl->prof = ProfileFns{profile, alpha, delta, alpha1};
  impl->symmetric = true;
  impl->isotropic = true;
  impl->monotone_psi = false;
  return LevyModel(std::move(impl));
}

LevyModel LevyModel::discrete_dyadic(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("discrete_dyadic: alpha must lie in (0,2)");
  auto impl = std::make_shared<Impl>();
  impl->kind = ModelKind::discrete_dyadic;
  impl->dim = 1;
  impl->alpha = alpha;
  impl->symmetric = true;
  impl->isotropic = true;  // 1D symmetric
  impl->monotone_psi = false;
  return LevyModel(std::move(impl));
}

LevyModel LevyModel::asym_stable_1d(double alpha, double c1, double c2) {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("asym_stable_1d: alpha must lie in (0,2)");
  if (!(c1 >= 0.0 && c2 >= 0.0 && c1 + c2 > 0.0))
    throw std::invalid_argument("asym_stable_1d: needs c1,c2 >= 0 with c1+c2 > 0");
  if (std::abs(alpha - 1.0) < 1e-12 && std::abs(c1 - c2) > 0.0)
    throw std::invalid_argument("asym_stable_1d: alpha=1 supported only when symmetric");
  auto impl = std::make_shared<Impl>();
  impl->kind = ModelKind::asym_stable_1d;
  impl->dim = 1;
  impl->alpha = alpha;
  impl->c1 = c1;
  impl->c2 = c2;
  impl->symmetric = (c1 == c2);
  impl->isotropic = impl->symmetric;
  impl->monotone_psi = impl->symmetric;
  impl->c = (c1 + c2) * stable_k1(alpha);  // psi scale in the symmetric case
  impl->shell_coeff = c1 + c2;
  return LevyModel(std::move(impl));
}

LevyModel LevyModel::compound_poisson_drift(std::vector<Atom> atoms,
                                            std::array<double, 3> gamma0, int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("model dimension must be 1..3");
  double mass = 0.0;
  for (const auto& a : atoms) {
    if (!(a.mass > 0.0))
      throw std::invalid_argument("compound_poisson_drift: atom masses must be positive");
    if (vec_norm(a.y) == 0.0)
      throw std::invalid_argument("compound_poisson_drift: atom at the origin");
    mass += a.mass;
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = ModelKind::compound_poisson_drift;
  impl->dim = dim;
  impl->atoms = std::move(atoms);
  impl->gamma0 = gamma0;
  // Symmetric iff the atom set is sign-symmetric and there is no drift.
  bool sym = vec_norm(gamma0) == 0.0;
  if (sym) {
    for (const auto& a : impl->atoms) {
      bool found = false;
      for (const auto& b : impl->atoms) {
        if (std::abs(a.mass - b.mass) < 1e-12 &&
            std::abs(a.y[0] + b.y[0]) < 1e-12 && std::abs(a.y[1] + b.y[1]) < 1e-12 &&
            std::abs(a.y[2] + b.y[2]) < 1e-12) {
          found = true;
          break;
        }
      }
      if (!found) {
        sym = false;
        break;
      }
    }
  }
  impl->symmetric = sym;
  impl->isotropic = false;
  impl->monotone_psi = false;
  return LevyModel(std::move(impl));
}

LevyModel LevyModel::custom_1d(std::function<double(double)> rho_plus,
                               std::function<double(double)> rho_minus,
                               double support_hi, double gamma,
                               bool finite_variation) {
  auto impl = std::make_shared<Impl>();
  impl->kind = ModelKind::custom_1d;
  impl->dim = 1;
  impl->rho_plus = std::move(rho_plus);
  impl->rho_minus = std::move(rho_minus);
  impl->custom_hi = support_hi;
  impl->custom_gamma = gamma;
  impl->custom_fv = finite_variation;
  impl->symmetric = false;
  return LevyModel(std::move(impl));
}

ModelKind LevyModel::kind() const { return impl_->kind; }
int LevyModel::dim() const { return impl_->dim; }
double LevyModel::eta() const { return impl_->eta; }
double LevyModel::alpha() const { return impl_->alpha; }
double LevyModel::stable_scale() const { return impl_->c; }
bool LevyModel::symmetric() const { return impl_->symmetric; }
bool LevyModel::isotropic() const { return impl_->isotropic; }
bool LevyModel::finite_variation() const { return impl_->finite_variation(); }
bool LevyModel::unbounded_exponent() const { return impl_->unbounded_exponent(); }
bool LevyModel::atomic() const {
  return impl_->kind == ModelKind::compound_poisson_drift ||
         impl_->kind == ModelKind::discrete_dyadic;
}

double LevyModel::rv_index() const {
  switch (impl_->kind) {
    case ModelKind::brownian:
    case ModelKind::brownian_plus_stable:
      return 2.0;
    case ModelKind::isotropic_stable:
    case ModelKind::radial_density:
      return impl_->alpha;
    default:
      return kNan;
  }
}

std::string LevyModel::describe() const {
  std::ostringstream os;
  switch (impl_->kind) {
    case ModelKind::brownian:
      os << "brownian(eta=" << impl_->eta << ",d=" << impl_->dim << ")";
      break;
    case ModelKind::isotropic_stable:
      os << "isotropic_stable(alpha=" << impl_->alpha << ",c=" << impl_->c
         << ",d=" << impl_->dim << ")";
      break;
    case ModelKind::brownian_plus_stable:
      os << "brownian_plus_stable(eta=" << impl_->eta << ",c=" << impl_->c
         << ",alpha=" << impl_->alpha << ",d=" << impl_->dim << ")";
      break;
    case ModelKind::radial_density: {
      const char* names[] = {"truncated", "tempered", "lamperti", "layered"};
      os << "radial_density(" << names[static_cast<int>(impl_->prof.profile)]
         << ",alpha=" << impl_->alpha << ",d=" << impl_->dim << ")";
      break;
    }
    case ModelKind::discrete_dyadic:
      os << "discrete_dyadic(alpha=" << impl_->alpha << ")";
      break;
    case ModelKind::asym_stable_1d:
      os << "asym_stable_1d(alpha=" << impl_->alpha << ",c1=" << impl_->c1
         << ",c2=" << impl_->c2 << ")";
      break;
    case ModelKind::compound_poisson_drift:
      os << "compound_poisson_drift(" << impl_->atoms.size() << " atoms)";
      break;
    case ModelKind::custom_1d:
      os << "custom_1d";
      break;
  }
  return os.str();
}

double LevyModel::psi(double r) const { return impl_->psi_exact(r); }
double LevyModel::psi_smooth(double r) const { return impl_->psi_smooth_inner(r); }
double LevyModel::psi_star(double r) const {
  if (r < 0) throw std::invalid_argument("psi_star: negative argument");
  return impl_->sup().sup(r);
}
double LevyModel::psi_inverse(double v) const {
  if (v < 0) throw std::invalid_argument("psi_inverse: negative argument");
  return impl_->sup().inverse(v);
}

double LevyModel::pruitt_h(double r) const {
  if (!(r > 0.0)) throw std::invalid_argument("pruitt_h: r must be positive");
  double total = impl_->eta / (r * r);
  total += impl_->compensator_magnitude(r) / r;
  total += impl_->radial_moment2(r) / (r * r) + impl_->tail_mass(r);
  return total;
}

double LevyModel::pruitt_h_inverse(double v) const {
  if (!(v > 0.0)) throw std::invalid_argument("pruitt_h_inverse: v must be positive");
  double lo = 1.0, hi = 1.0;
  // h decreases; find lo with h(lo) >= v.
  int guard = 0;
  while (pruitt_h(lo) < v) {
    lo /= 4.0;
    if (++guard > 600 || lo < 1e-300)
      throw std::domain_error("pruitt_h_inverse: value above the range of h");
  }
  guard = 0;
  while (pruitt_h(hi) > v) {
    hi *= 4.0;
    if (++guard > 600 || hi > 1e300)
      throw std::domain_error("pruitt_h_inverse: value below the range of h");
  }
  for (int i = 0; i < 200 && (hi - lo) > 1e-14 * hi; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (pruitt_h(mid) >= v)
      lo = mid;
    else
      hi = mid;
  }
  return std::sqrt(lo * hi);
}

std::array<double, 3> LevyModel::gamma_zero() const {
  if (!finite_variation())
    throw std::invalid_argument(
        "gamma_zero: model has infinite variation (needs A=0 and "
        "integrable small jumps)");
  if (impl_->symmetric) return {0, 0, 0};
  switch (impl_->kind) {
    case ModelKind::compound_poisson_drift:
      return impl_->gamma0;
    case ModelKind::asym_stable_1d:
      return {0, 0, 0};  // driftless pure-jump convention
    case ModelKind::custom_1d: {
      auto net = [this](double y) {
        return y * (impl_->rho_plus(y) - impl_->rho_minus(y));
      };
      const double m1 = quad::integrate_power_singular(net, std::min(1.0, impl_->custom_hi), 1e-10);
      return {m1 - impl_->custom_gamma, 0, 0};
    }
    default:
      return {0, 0, 0};
  }
}

double LevyModel::levy_tail_mass(double r) const { return impl_->tail_mass(r); }
double LevyModel::levy_radial_moment2(double r) const { return impl_->radial_moment2(r); }
double LevyModel::levy_small_abs_moment(double r) const {
  if (!finite_variation() && r > 0)
    throw std::invalid_argument("levy_small_abs_moment: diverges for this model");
  return impl_->small_abs_moment(r);
}

double LevyModel::integrate_levy_radial(const std::function<double(double)>& f,
                                        double r_lo, double r_hi) const {
  auto shell = [this](double s) -> double {
    switch (impl_->kind) {
      case ModelKind::isotropic_stable:
      case ModelKind::brownian_plus_stable:
      case ModelKind::asym_stable_1d:
        return impl_->shell_coeff * std::pow(s, -1.0 - impl_->alpha);
      case ModelKind::radial_density:
        return impl_->c * impl_->omega_d() * impl_->prof.g(s) / s;
      case ModelKind::custom_1d:
        return s < impl_->custom_hi ? impl_->rho_plus(s) + impl_->rho_minus(s) : 0.0;
      default:
        throw std::invalid_argument(
            "integrate_levy_radial: measure has no radial density");
    }
  };
  auto g = [&](double s) { return f(s) * shell(s); };
  if (impl_->kind == ModelKind::radial_density || impl_->kind == ModelKind::custom_1d) {
    double hi = r_hi;
    const double cap = impl_->kind == ModelKind::radial_density
                           ? impl_->prof.support_hi()
                           : impl_->custom_hi;
    if (std::isfinite(cap)) hi = std::min(hi, cap);
    if (!(hi > r_lo)) return 0.0;
    return quad::integrate(g, r_lo, hi, 1e-10);
  }
  return quad::integrate(g, r_lo, r_hi, 1e-10);
}

double LevyModel::sum_atoms(
    const std::function<double(const std::array<double, 3>&)>& f,
    double lipschitz_bound, double rel_tol) const {
  if (impl_->kind == ModelKind::compound_poisson_drift) {
    double total = 0.0;
    for (const auto& a : impl_->atoms) total += a.mass * f(a.y);
    return total;
  }
  if (impl_->kind == ModelKind::discrete_dyadic) {
    const double alpha = impl_->alpha;
    double total = 0.0;
    for (int k = 1; k < 1100; ++k) {
      const double y = std::ldexp(1.0, -k);
      const double mass = std::pow(2.0, k * alpha / 2.0);
      total += mass * (f({y, 0, 0}) + f({-y, 0, 0}));
      // |f(y)| <= L|y| certifies the remaining tail.
      const double q = std::pow(2.0, alpha / 2.0 - 1.0);
      const double tail_bound =
          2.0 * lipschitz_bound * std::pow(2.0, (k + 1) * (alpha / 2.0 - 1.0)) /
          (1.0 - q);
      if (k > 4 && tail_bound < rel_tol * std::abs(total)) break;
    }
    return total;
  }
  throw std::invalid_argument("sum_atoms: model is not atomic");
}

const std::vector<Atom>* LevyModel::atom_list() const {
  if (impl_->kind == ModelKind::compound_poisson_drift) return &impl_->atoms;
  return nullptr;
}

std::array<double, 3> LevyModel::compound_gamma0() const { return impl_->gamma0; }

double LevyModel::stable_beta() const {
  switch (impl_->kind) {
    case ModelKind::brownian:
      return 0.0;
    case ModelKind::isotropic_stable:
      return 0.0;
    case ModelKind::asym_stable_1d:
      return (impl_->c1 - impl_->c2) / (impl_->c1 + impl_->c2);
    default:
      throw std::invalid_argument("stable_beta: not a stable model");
  }
}

double LevyModel::stable_sigma() const {
  switch (impl_->kind) {
    case ModelKind::brownian:
      return std::sqrt(impl_->eta);  // CF exp(-eta r^2) = exp(-(sigma r)^2)
    case ModelKind::isotropic_stable:
      return std::pow(impl_->c, 1.0 / impl_->alpha);
    case ModelKind::asym_stable_1d: {
      const double sig_a = (impl_->c1 + impl_->c2) * stable_k1(impl_->alpha);
      return std::pow(sig_a, 1.0 / impl_->alpha);
    }
    default:
      throw std::invalid_argument("stable_sigma: not a stable model");
  }
}

// ---------------------------------------------------------------------------
// DensityEvaluator

DensityEvaluator::DensityEvaluator(LevyModel model, double t)
    : model_(std::move(model)), t_(t) {
  if (!(t > 0.0)) throw std::invalid_argument("DensityEvaluator: t must be positive");
  dim_ = model_.dim();
  if (dim_ > 2)
    throw std::invalid_argument("DensityEvaluator: Fourier inversion needs d in {1,2}");
  if (!model_.unbounded_exponent())
    throw std::invalid_argument(
        "DensityEvaluator: compound-Poisson-type models (bounded exponent) "
        "have atoms at zero and no density");
  if (!model_.symmetric() || !(model_.isotropic() || dim_ == 1))
    throw std::invalid_argument("DensityEvaluator: model must be isotropic/symmetric");
  gaussian_fast_ = model_.kind() == ModelKind::brownian;
  xi_cut_ = model_.psi_inverse(46.0 / t_);
  const double s1 = model_.psi_inverse(1.0 / t_);
  scale_ = s1 > 0 ? 1.0 / s1 : 1.0;
}

double DensityEvaluator::xi_cut() const { return xi_cut_; }
double DensityEvaluator::spatial_scale() const { return scale_; }

namespace {

std::vector<double> log_splits(double lo, double hi) {
  std::vector<double> pts;
  for (double x = lo; x < hi; x *= 8.0) pts.push_back(x);
  return pts;
}

}  // namespace

double DensityEvaluator::operator()(double s) const {
  if (s < 0) throw std::invalid_argument("density: radius must be nonnegative");
  if (gaussian_fast_) {
    const double var2 = 4.0 * model_.eta() * t_;  // = 2 * (2 eta t)
    if (dim_ == 1) return exp_neg(s * s / var2) / std::sqrt(kPi * var2);
    return exp_neg(s * s / var2) / (kPi * var2);
  }
  const LevyModel& m = model_;
  const double t = t_;
  if (dim_ == 1) {
    auto f = [&m, t](double xi) { return exp_neg(t * m.psi_smooth(xi)); };
    if (s == 0.0) {
      const double hi = 1.35 * xi_cut_;
      return quad::integrate_split(f, 0.0, hi, log_splits(hi * 1e-8, hi), 1e-11) / kPi;
    }
    return quad::fourier_semiinf(f, quad::Kernel::cos, s, xi_cut_, 1e-11).value / kPi;
  }
  auto f2 = [&m, t](double xi) { return xi * exp_neg(t * m.psi_smooth(xi)); };
  if (s == 0.0) {
    const double hi = 1.35 * xi_cut_;
    return quad::integrate_split(f2, 0.0, hi, log_splits(hi * 1e-8, hi), 1e-11) /
           (2.0 * kPi);
  }
  return quad::fourier_semiinf(f2, quad::Kernel::j0, s, xi_cut_, 1e-11).value /
         (2.0 * kPi);
}

double DensityEvaluator::tail(double r) const {
  if (r <= 0.0) return 1.0;
  if (gaussian_fast_) {
    const double sd2 = 2.0 * std::sqrt(model_.eta() * t_);
    if (dim_ == 1) return std::erfc(r / sd2);
    return exp_neg(r * r / (sd2 * sd2));
  }
  const LevyModel& m = model_;
  const double t = t_;
  if (dim_ == 1) {
    if (r * xi_cut_ < 4.0) {
      // P is order one here; the complementary form has a decaying integrand.
      auto g = [&m, t, r](double xi) {
        return exp_neg(t * m.psi_smooth(xi)) * std::sin(r * xi) / xi;
      };
      const double hi = 1.35 * xi_cut_;
      const double I =
          quad::integrate_split(g, 0.0, hi, log_splits(hi * 1e-8, hi), 1e-11);
      return std::clamp(1.0 - (2.0 / kPi) * I, 0.0, 1.0);
    }
    auto g = [&m, t](double xi) {
      const double e = t * m.psi_smooth(xi);
      const double w = e > kExpFloor ? 1.0 : -std::expm1(-e);
      return w / xi;
    };
    const double I = quad::fourier_semiinf(g, quad::Kernel::sin, r, xi_cut_, 1e-11).value;
    return std::clamp((2.0 / kPi) * I, 0.0, 1.0);
  }
  // d = 2: integrate the radial density out to r.
  auto f = [this](double s) { return (*this)(s)*s; };
  const double inner =
      2.0 * kPi *
      quad::integrate_split(f, 0.0, r, log_splits(std::min(scale_, r) * 1e-3, r), 1e-10);
  return std::clamp(1.0 - inner, 0.0, 1.0);
}

double density_radial(const LevyModel& model, double t, double s) {
  return DensityEvaluator(model, t)(s);
}

double tail_probability(const LevyModel& model, double t, double r) {
  return DensityEvaluator(model, t).tail(r);
}

}  // namespace levyheat::levy
