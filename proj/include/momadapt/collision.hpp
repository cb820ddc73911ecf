#pragma once

// BGK collision operator: hard-sphere relaxation time, moment-space
// evaluation, and the exact linearization used by the Newton and dual
// systems.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "momadapt/velocity.hpp"

namespace momadapt {

struct BgkParams {
  double mean_free_path;

  explicit BgkParams(double lambda) : mean_free_path(lambda) {
    if (!(lambda > 0.0))
      throw std::invalid_argument("BgkParams: mean free path must be > 0");
  }
};

/// Hard-sphere relaxation time tau = (5*lambda/16) * sqrt(2*pi*rho/p).
inline double relaxation_time(double rho, double pressure,
                              const BgkParams& params) {
  if (!(rho > 0.0) || !(pressure > 0.0))
    throw std::invalid_argument(
        "relaxation_time: rho and pressure must be positive");
  return 5.0 * params.mean_free_path / 16.0 *
         std::sqrt(2.0 * kPi * rho / pressure);
}

/// <v^k C(beta(g))> = tau^-1 * (<v^k M_f> - <v^k beta(g)>) for k = 0..k_max,
/// with M_f the Maxwellian sharing the invariant moments of beta(g) and
/// pressure p = rho*theta.
inline std::vector<double> bgk_moments(const VelocityPoly& g,
                                       const RenormSpec& spec,
                                       const GaussianParams& bg,
                                       const BgkParams& params, int k_max) {
  const MomentState ms = conserved_moments(g, spec, bg);
  const GaussianParams meq =
      maxwellian_from_moments(ms.rho, ms.momentum, ms.energy);
  const double inv_tau =
      1.0 / relaxation_time(ms.rho, ms.rho * ms.theta, params);

  const std::vector<double> fm =
      beta_monomial_moments(g, spec, bg, k_max, VRange::full);
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> em =
      incomplete_gaussian_moments(k_max, Interval(-inf, inf), meq);

  std::vector<double> out(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) out[k] = inv_tau * (em[k] - fm[k]);
  return out;
}

/// Jacobian of the BGK moments with respect to the coefficients of g:
///   (i,j) = d<v^i C(beta(g))> / dc_j
///         = tau^-1 * ( sum_a d<v^i M_f>/dmu_a * <v^{a+j} beta'(g)>
///                      - <v^{i+j} beta'(g)> )
/// with mu = (rho, momentum, energy). The relaxation time is frozen at the
/// linearization point. Rows i <= 2 vanish identically: the Maxwellian
/// moment derivatives reduce to the Kronecker delta there.
inline Eigen::MatrixXd bgk_jacobian(const VelocityPoly& g,
                                    const RenormSpec& spec,
                                    const GaussianParams& bg,
                                    const BgkParams& params, int rows,
                                    int cols) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("bgk_jacobian: empty block requested");
  const MomentState ms = conserved_moments(g, spec, bg);
  const GaussianParams meq =
      maxwellian_from_moments(ms.rho, ms.momentum, ms.energy);
  const double inv_tau =
      1.0 / relaxation_time(ms.rho, ms.rho * ms.theta, params);

  const int bp_order = std::max(2 + (cols - 1), (rows - 1) + (cols - 1));
  const std::vector<double> bp =
      beta_prime_monomial_moments(g, spec, bg, bp_order, VRange::full);

  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> em =
      incomplete_gaussian_moments(std::max(rows - 1, 2), Interval(-inf, inf),
                                  meq);

  Eigen::MatrixXd jac(rows, cols);
  for (int i = 0; i < rows; ++i) {
    // d<v^i M>/d(rho, momentum, energy) through (rho, u, theta).
    double d0, d1, d2;
    if (i <= 2) {
      d0 = (i == 0) ? 1.0 : 0.0;
      d1 = (i == 1) ? 1.0 : 0.0;
      d2 = (i == 2) ? 1.0 : 0.0;
    } else {
      const double rho = meq.rho, u = meq.u, theta = meq.theta;
      const double gi = em[i], gi1 = em[i - 1], gi2 = em[i - 2];
      const double half_ii1 = 0.5 * i * (i - 1);
      d0 = gi / rho - i * gi1 * u / rho + half_ii1 * gi2 * (u * u - theta) / rho;
      d1 = i * gi1 / rho - 2.0 * half_ii1 * gi2 * u / rho;
      d2 = half_ii1 * gi2 / rho;
    }
    for (int j = 0; j < cols; ++j) {
      jac(i, j) =
          inv_tau * (d0 * bp[j] + d1 * bp[1 + j] + d2 * bp[2 + j] - bp[i + j]);
    }
  }
  return jac;
}

/// Entropy dissipation rate <eta'(beta(g)) C(beta(g))> evaluated on the
/// support of beta(g), where eta'(beta(g)) = g pointwise:
///   tau^-1 * ( <g M_f>_supp - <g beta(g)> ).
/// Nonpositive (to round-off) for every realizable state.
inline double bgk_entropy_dissipation(const VelocityPoly& g,
                                      const RenormSpec& spec,
                                      const GaussianParams& bg,
                                      const BgkParams& params) {
  const MomentState ms = conserved_moments(g, spec, bg);
  const GaussianParams meq =
      maxwellian_from_moments(ms.rho, ms.momentum, ms.energy);
  const double inv_tau =
      1.0 / relaxation_time(ms.rho, ms.rho * ms.theta, params);

  const int deg = g.degree();
  const std::vector<double> bm =
      beta_monomial_moments(g, spec, bg, deg, VRange::full);
  double g_beta = 0.0;
  for (int k = 0; k <= deg; ++k) g_beta += g.coeffs[k] * bm[k];

  const double inf = std::numeric_limits<double>::infinity();
  double g_meq = 0.0;
  for (const Interval& iv : detail::positive_support(g, spec, -inf, inf)) {
    const std::vector<double> gm = incomplete_gaussian_moments(deg, iv, meq);
    for (int k = 0; k <= deg; ++k) g_meq += g.coeffs[k] * gm[k];
  }
  return inv_tau * (g_meq - g_beta);
}

}  // namespace momadapt
