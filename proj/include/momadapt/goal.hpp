#pragma once

// Goal functional (average heat flux), its linearization, and the
// dual-weighted-residual error breakdown with both upper bounds.

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "momadapt/dg.hpp"
#include "momadapt/marking.hpp"

namespace momadapt {

/// Heat-flux goal J(g) = int <(v - U)^3 beta(g)> dx with a per-element
/// shift U taken from the background bulk velocity field.
struct GoalSpec {
  std::vector<double> u_shift;
};

namespace detail {

/// Coefficients of (v - u)^3 in the monomial basis.
inline std::array<double, 4> cubic_shift_coeffs(double u) {
  return {-u * u * u, 3.0 * u * u, -3.0 * u, 1.0};
}

}  // namespace detail

inline double goal_value(const DGSolution& sol, const AssemblyContext& ctx,
                         const GoalSpec& goal) {
  if (static_cast<int>(goal.u_shift.size()) != ctx.mesh.n_elements)
    throw std::invalid_argument("goal_value: shift field size mismatch");
  const double h = ctx.mesh.width();
  double value = 0.0;
  for (int k = 0; k < ctx.mesh.n_elements; ++k) {
    const auto cubic = detail::cubic_shift_coeffs(goal.u_shift[k]);
    const std::vector<double> bm = beta_monomial_moments(
        sol.coeffs[k], ctx.renorm, ctx.backgrounds[k], 3, VRange::full);
    double cell = 0.0;
    for (int m = 0; m < 4; ++m) cell += cubic[m] * bm[m];
    value += h * cell;
  }
  return value;
}

/// Gradient of the goal on the given test orders: entry (kappa, i) is
/// h * <(v - U_kappa)^3 beta'(g_kappa) v^i>.
inline Eigen::VectorXd goal_gradient(const DGSolution& sol,
                                     const AssemblyContext& ctx,
                                     const GoalSpec& goal,
                                     const OrderMap& test_orders) {
  if (static_cast<int>(goal.u_shift.size()) != ctx.mesh.n_elements)
    throw std::invalid_argument("goal_gradient: shift field size mismatch");
  const double h = ctx.mesh.width();
  const std::vector<int> off = test_orders.offsets();
  Eigen::VectorXd grad(test_orders.dof());
  for (int k = 0; k < ctx.mesh.n_elements; ++k) {
    const auto cubic = detail::cubic_shift_coeffs(goal.u_shift[k]);
    const std::vector<double> bp = beta_prime_monomial_moments(
        sol.coeffs[k], ctx.renorm, ctx.backgrounds[k], 3 + test_orders[k],
        VRange::full);
    for (int i = 0; i <= test_orders[k]; ++i) {
      double e = 0.0;
      for (int m = 0; m < 4; ++m) e += cubic[m] * bp[m + i];
      grad[off[k] + i] = h * e;
    }
  }
  return grad;
}

/// Per-element indicators zeta_kappa, the signed estimate, and the two
/// upper bounds. The chain |estimate| <= bound_cancel <= bound_triangle
/// holds on every instance.
struct ErrorBreakdown {
  std::vector<double> zeta;
  double estimate = 0.0;
  double bound_cancel = 0.0;    ///< aggregate after the cancellation discount
  double bound_triangle = 0.0;  ///< conventional triangle-inequality bound
};

/// Dual-weighted residual decomposition: zeta_kappa contracts the enriched
/// residual of the primal state against the dual weights element by
/// element, so the global estimate and the per-element indicators agree
/// exactly by construction.
inline ErrorBreakdown error_indicators(const DGSolution& primal,
                                       const DGSolution& dual,
                                       const AssemblyContext& ctx) {
  for (int k = 0; k < dual.orders.size(); ++k)
    if (dual.orders[k] < primal.orders[k])
      throw std::invalid_argument(
          "error_indicators: dual orders must dominate the primal orders");

  const Eigen::VectorXd res = assemble_residual(primal, ctx, dual.orders);
  const std::vector<int> off = dual.orders.offsets();

  ErrorBreakdown out;
  out.zeta.resize(ctx.mesh.n_elements);
  for (int k = 0; k < ctx.mesh.n_elements; ++k) {
    double z = 0.0;
    for (int i = 0; i <= dual.orders[k]; ++i)
      z += res[off[k] + i] * dual.coeffs[k].coeffs[i];
    out.zeta[k] = z;
  }
  out.estimate = std::accumulate(out.zeta.begin(), out.zeta.end(), 0.0);
  for (double z : out.zeta) out.bound_triangle += std::abs(z);

  if (out.estimate == 0.0) {
    out.bound_cancel = 0.0;
  } else {
    const SignSplit split = split_signs(out.zeta);
    const std::vector<int> cancelled = cancellation_subset(out.zeta, split);
    for (int k : split.t_plus)
      if (!std::binary_search(cancelled.begin(), cancelled.end(), k))
        out.bound_cancel += std::abs(out.zeta[k]);
  }
  return out;
}

}  // namespace momadapt
