#pragma once

// Velocity-space kernel: the renormalization map / entropy pair, 1D
// Maxwellians, and exact integration of Gaussian-weighted piecewise
// polynomials over full and half velocity ranges.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace momadapt {

inline constexpr double kPi = 3.14159265358979323846;

/// Highest Gaussian moment order the recurrence backend accepts.
/// Large enough for order-18 trial/test products plus the expanded
/// renormalization polynomial on both desk problems.
inline constexpr int kMaxMomentOrder = 64;

struct KineticError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Nonpositive density encountered where a positive one is required.
struct VacuumError : KineticError {
  using KineticError::KineticError;
};
/// Moments do not correspond to any positive-temperature state.
struct RealizabilityError : KineticError {
  using KineticError::KineticError;
};

/// (density, bulk velocity, temperature) triple of a 1D Maxwellian.
/// theta carries velocity^2 units (theta = R*T, gas constant absorbed).
struct GaussianParams {
  double rho;
  double u;
  double theta;

  GaussianParams(double rho_, double u_, double theta_)
      : rho(rho_), u(u_), theta(theta_) {
    if (!(rho > 0.0) || !std::isfinite(rho))
      throw VacuumError("GaussianParams: rho must be positive");
    if (!(theta > 0.0) || !std::isfinite(theta))
      throw RealizabilityError("GaussianParams: theta must be positive");
    if (!std::isfinite(u))
      throw KineticError("GaussianParams: u must be finite");
  }
};

/// Exponent N of the renormalization family beta(g) = B*(1+g/N)_+^N.
struct RenormSpec {
  int n_exponent = 1;

  explicit RenormSpec(int n) : n_exponent(n) {
    if (n < 1) throw std::invalid_argument("RenormSpec: exponent must be >= 1");
  }
};

/// Coefficients c_0..c_M of the per-element unknown g(v) = sum c_k v^k.
/// The moment space must contain the collision invariants {1, v, v^2},
/// hence degree >= 2 (higher coefficients may of course be zero).
struct VelocityPoly {
  std::vector<double> coeffs;

  explicit VelocityPoly(std::vector<double> c) : coeffs(std::move(c)) {
    if (coeffs.size() < 3)
      throw std::invalid_argument("VelocityPoly: degree must be >= 2");
    for (double ck : coeffs)
      if (!std::isfinite(ck))
        throw std::invalid_argument("VelocityPoly: coefficients must be finite");
  }

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }

  double operator()(double v) const {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
      acc = acc * v + *it;
    return acc;
  }
};

/// Velocity subinterval; endpoints may be +-infinity.
struct Interval {
  double lo;
  double hi;

  Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo < hi)) throw std::invalid_argument("Interval: require lo < hi");
  }
};

enum class VRange { full, positive, negative };

/// Pointwise Maxwellian density M_(rho,u,theta)(v) in 1D.
inline double maxwellian_density(const GaussianParams& bg, double v) {
  const double d = v - bg.u;
  return bg.rho / std::sqrt(2.0 * kPi * bg.theta) *
         std::exp(-0.5 * d * d / bg.theta);
}

namespace detail {

inline double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

inline double poly_eval(const std::vector<double>& c, double v) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * v + *it;
  return acc;
}

inline std::vector<double> poly_derivative(const std::vector<double>& c) {
  if (c.size() <= 1) return {0.0};
  std::vector<double> d(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k)
    d[k - 1] = static_cast<double>(k) * c[k];
  return d;
}

inline std::vector<double> poly_mul(const std::vector<double>& a,
                                    const std::vector<double>& b) {
  std::vector<double> r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

inline std::vector<double> poly_pow(std::vector<double> base, int n) {
  std::vector<double> r{1.0};
  for (int i = 0; i < n; ++i) r = poly_mul(r, base);
  return r;
}

/// 1 + g(v)/N as a coefficient vector with exactly-zero leading
/// coefficients trimmed.
inline std::vector<double> renorm_argument(const VelocityPoly& g,
                                           const RenormSpec& spec) {
  std::vector<double> p(g.coeffs);
  const double inv_n = 1.0 / spec.n_exponent;
  for (double& c : p) c *= inv_n;
  p[0] += 1.0;
  while (p.size() > 1 && p.back() == 0.0) p.pop_back();
  return p;
}

}  // namespace detail

/// beta(g)(v) = B(v) * max(0, 1 + g(v)/N)^N with background Maxwellian B.
inline double eval_beta(const VelocityPoly& g, const RenormSpec& spec,
                        const GaussianParams& bg, double v) {
  const double base = 1.0 + g(v) / spec.n_exponent;
  if (base <= 0.0) return 0.0;
  return maxwellian_density(bg, v) * detail::ipow(base, spec.n_exponent);
}

/// Derivative of beta with respect to g, pointwise:
/// B(v)*(1+g/N)^(N-1) on the support of (1+g/N)_+, zero elsewhere.
inline double eval_beta_prime(const VelocityPoly& g, const RenormSpec& spec,
                              const GaussianParams& bg, double v) {
  const double base = 1.0 + g(v) / spec.n_exponent;
  if (base <= 0.0) return 0.0;
  return maxwellian_density(bg, v) * detail::ipow(base, spec.n_exponent - 1);
}

/// Entropy density eta(f) = f*(N^2/(1+N)*(f/B)^(1/N) - N) + B*N/(1+N),
/// the phi-divergence entropy relative to the background value B.
/// Strictly convex for f > 0 and zero at f = B.
inline double eval_eta(double f, const RenormSpec& spec, double bg_value) {
  if (!(f >= 0.0)) throw std::invalid_argument("eval_eta: f must be >= 0");
  if (!(bg_value > 0.0))
    throw std::invalid_argument("eval_eta: background value must be > 0");
  const double n = spec.n_exponent;
  return f * (n * n / (1.0 + n) * std::pow(f / bg_value, 1.0 / n) - n) +
         bg_value * n / (1.0 + n);
}

/// eta'(f) = N*((f/B)^(1/N) - 1); inverse of beta on its range.
inline double eval_eta_prime(double f, const RenormSpec& spec,
                             double bg_value) {
  if (!(f > 0.0)) throw std::invalid_argument("eval_eta_prime: f must be > 0");
  if (!(bg_value > 0.0))
    throw std::invalid_argument("eval_eta_prime: background value must be > 0");
  const double n = spec.n_exponent;
  return n * (std::pow(f / bg_value, 1.0 / n) - 1.0);
}

/// Incomplete Gaussian moments G_k = int_iv v^k * M_(rho,u,theta)(v) dv
/// for k = 0..k_max, by the stable three-term forward recurrence
///   G_k = u*G_{k-1} + theta*(k-1)*G_{k-2} - theta*[v^{k-1} w(v)]_lo^hi
/// seeded with the error function; boundary terms vanish at +-infinity.
inline std::vector<double> incomplete_gaussian_moments(
    int k_max, const Interval& iv, const GaussianParams& bg) {
  if (k_max < 0)
    throw std::invalid_argument("incomplete_gaussian_moments: k_max < 0");
  if (k_max > kMaxMomentOrder)
    throw KineticError("incomplete_gaussian_moments: order " +
                       std::to_string(k_max) + " above cap " +
                       std::to_string(kMaxMomentOrder));

  const double s = std::sqrt(bg.theta);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const double za = (iv.lo - bg.u) / s;  // -inf allowed
  const double zb = (iv.hi - bg.u) / s;

  // Normal mass on [za, zb]; erfc forms keep relative accuracy in the tails.
  double mass;
  if (za >= 0.0)
    mass = 0.5 * (std::erfc(za * inv_sqrt2) - std::erfc(zb * inv_sqrt2));
  else if (zb <= 0.0)
    mass = 0.5 * (std::erfc(-zb * inv_sqrt2) - std::erfc(-za * inv_sqrt2));
  else
    mass = 0.5 * (std::erf(zb * inv_sqrt2) - std::erf(za * inv_sqrt2));

  const double wlo = std::isfinite(iv.lo) ? maxwellian_density(bg, iv.lo) : 0.0;
  const double whi = std::isfinite(iv.hi) ? maxwellian_density(bg, iv.hi) : 0.0;

  std::vector<double> g(static_cast<std::size_t>(k_max) + 1);
  g[0] = bg.rho * mass;
  if (k_max == 0) return g;

  g[1] = bg.u * g[0] - bg.theta * (whi - wlo);

  // blo/bhi accumulate v^{k-1} * w(v) at the endpoints; a vanished weight
  // stays zero so infinite endpoints never produce 0*inf.
  double blo = wlo;
  double bhi = whi;
  for (int k = 2; k <= k_max; ++k) {
    if (wlo != 0.0) blo *= iv.lo;
    if (whi != 0.0) bhi *= iv.hi;
    g[k] = bg.u * g[k - 1] + bg.theta * (k - 1) * g[k - 2] -
           bg.theta * (bhi - blo);
  }
  return g;
}

/// All real roots of 1 + g(v)/N, ascending, deduplicated within
/// 1e-12*(1+|root|). Between consecutive breakpoints the sign of the
/// renormalization argument is constant. Near-real complex pairs from the
/// eigensolver (|Im| < 1e-10*(1+|Re|)) are tangencies and are kept.
inline std::vector<double> positivity_breakpoints(const VelocityPoly& g,
                                                  const RenormSpec& spec) {
  const std::vector<double> p = detail::renorm_argument(g, spec);
  if (p.size() == 1) {
    if (p[0] == 0.0)
      throw KineticError(
          "positivity_breakpoints: renormalization argument vanishes "
          "identically");
    return {};
  }

  const int deg = static_cast<int>(p.size()) - 1;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  const double lead = p.back();
  for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -p[i] / lead;
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;

  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw KineticError("positivity_breakpoints: eigensolver failed");

  const std::vector<double> dp = detail::poly_derivative(p);
  std::vector<double> roots;
  for (int i = 0; i < deg; ++i) {
    const std::complex<double> ev = es.eigenvalues()(i);
    if (std::abs(ev.imag()) >= 1e-10 * (1.0 + std::abs(ev.real()))) continue;
    double r = ev.real();
    // One Newton polish per root; keep the polished value only if it helps.
    const double slope = detail::poly_eval(dp, r);
    if (slope != 0.0) {
      const double rn = r - detail::poly_eval(p, r) / slope;
      if (std::isfinite(rn) &&
          std::abs(detail::poly_eval(p, rn)) <= std::abs(detail::poly_eval(p, r)))
        r = rn;
    }
    roots.push_back(r);
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> unique_roots;
  for (double r : roots) {
    if (unique_roots.empty() ||
        r - unique_roots.back() > 1e-12 * (1.0 + std::abs(r)))
      unique_roots.push_back(r);
  }
  return unique_roots;
}

namespace detail {

/// Maximal subintervals of (range_lo, range_hi) on which 1 + g/N > 0.
inline std::vector<Interval> positive_support(const VelocityPoly& g,
                                              const RenormSpec& spec,
                                              double range_lo,
                                              double range_hi) {
  const std::vector<double> p = renorm_argument(g, spec);
  std::vector<double> cuts{range_lo};
  for (double r : positivity_breakpoints(g, spec))
    if (r > range_lo && r < range_hi) cuts.push_back(r);
  cuts.push_back(range_hi);

  std::vector<Interval> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    double probe;
    if (std::isfinite(a) && std::isfinite(b))
      probe = 0.5 * (a + b);
    else if (std::isfinite(a))
      probe = a + std::max(1.0, std::abs(a));
    else if (std::isfinite(b))
      probe = b - std::max(1.0, std::abs(b));
    else
      probe = 0.0;
    if (poly_eval(p, probe) > 0.0) out.emplace_back(a, b);
  }
  return out;
}

/// Moments <v^k * B * (1+g/N)_+^exponent> over the requested range,
/// computed exactly: expand the power into monomials, restrict to the
/// subintervals where the renormalization argument is positive, and
/// contract against incomplete Gaussian moments.
inline std::vector<double> clipped_power_moments(
    const VelocityPoly& g, const RenormSpec& spec, const GaussianParams& bg,
    int k_max, VRange range, int exponent) {
  if (k_max < 0)
    throw std::invalid_argument("clipped_power_moments: k_max < 0");
  const std::vector<double> q =
      poly_pow(renorm_argument(g, spec), exponent);
  const int qdeg = static_cast<int>(q.size()) - 1;
  if (k_max + qdeg > kMaxMomentOrder)
    throw KineticError("moment order " + std::to_string(k_max + qdeg) +
                       " above cap " + std::to_string(kMaxMomentOrder));

  const double inf = std::numeric_limits<double>::infinity();
  double lo = -inf, hi = inf;
  if (range == VRange::positive) lo = 0.0;
  if (range == VRange::negative) hi = 0.0;

  std::vector<double> out(static_cast<std::size_t>(k_max) + 1, 0.0);
  for (const Interval& iv : positive_support(g, spec, lo, hi)) {
    const std::vector<double> gm =
        incomplete_gaussian_moments(k_max + qdeg, iv, bg);
    for (int k = 0; k <= k_max; ++k) {
      double acc = 0.0;
      for (int d = 0; d <= qdeg; ++d) acc += q[d] * gm[k + d];
      out[k] += acc;
    }
  }
  return out;
}

}  // namespace detail

/// <v^k beta(g)> for k = 0..k_max over the requested velocity range.
inline std::vector<double> beta_monomial_moments(const VelocityPoly& g,
                                                 const RenormSpec& spec,
                                                 const GaussianParams& bg,
                                                 int k_max, VRange range) {
  return detail::clipped_power_moments(g, spec, bg, k_max, range,
                                       spec.n_exponent);
}

/// <v^k beta'(g)> for k = 0..k_max over the requested velocity range.
inline std::vector<double> beta_prime_monomial_moments(
    const VelocityPoly& g, const RenormSpec& spec, const GaussianParams& bg,
    int k_max, VRange range) {
  return detail::clipped_power_moments(g, spec, bg, k_max, range,
                                       spec.n_exponent - 1);
}

/// Invariant moments of beta(g) together with the macroscopic state.
struct MomentState {
  double rho;       ///< <beta>
  double momentum;  ///< <v beta>
  double energy;    ///< <v^2 beta>
  double u;         ///< momentum / rho
  double theta;     ///< energy/rho - u^2 (single translational dof)
};

inline MomentState conserved_moments(const VelocityPoly& g,
                                     const RenormSpec& spec,
                                     const GaussianParams& bg) {
  const std::vector<double> m = beta_monomial_moments(g, spec, bg, 2,
                                                      VRange::full);
  if (!(m[0] > 0.0))
    throw VacuumError("conserved_moments: nonpositive density <beta> = " +
                      std::to_string(m[0]));
  const double u = m[1] / m[0];
  const double theta = m[2] / m[0] - u * u;
  if (!(theta > 0.0))
    throw RealizabilityError("conserved_moments: nonpositive temperature " +
                             std::to_string(theta));
  return {m[0], m[1], m[2], u, theta};
}

/// Maxwellian sharing the given invariant moments; inverse of
/// conserved_moments at g = 0.
inline GaussianParams maxwellian_from_moments(double rho, double momentum,
                                              double energy) {
  if (!(rho > 0.0))
    throw VacuumError("maxwellian_from_moments: rho must be positive");
  const double u = momentum / rho;
  const double theta = energy / rho - u * u;
  if (!(theta > 0.0))
    throw RealizabilityError(
        "maxwellian_from_moments: moments are not realizable");
  return {rho, u, theta};
}

}  // namespace momadapt
