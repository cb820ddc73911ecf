#pragma once

// Damped Newton iteration for the primal problem and transpose linear solve
// for the dual, on variable-block tridiagonal systems.

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "momadapt/dg.hpp"

namespace momadapt {

struct SingularBlockError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NewtonFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Block LU (Thomas) solve of A x = b, or A^T x = b with transpose set.
/// No pivoting across blocks; partial pivoting within blocks.
inline Eigen::VectorXd block_tridiag_solve(const BlockTriDiag& A,
                                           const Eigen::VectorXd& b,
                                           bool transpose = false) {
  if (transpose) return block_tridiag_solve(A.transposed(), b, false);
  const int n = A.n_blocks();
  if (n == 0) throw std::invalid_argument("block_tridiag_solve: empty matrix");
  if (A.total_rows() != A.total_cols() || A.total_rows() != b.size())
    throw std::invalid_argument("block_tridiag_solve: dimension mismatch");

  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu(n);
  std::vector<Eigen::MatrixXd> w(n > 1 ? n - 1 : 0);  // sub[i] * D_i^-1

  const auto factor = [&](int i, const Eigen::MatrixXd& d) {
    if (d.rows() != d.cols())
      throw std::invalid_argument("block_tridiag_solve: non-square block");
    lu[i].compute(d);
    const auto& u = lu[i].matrixLU();
    for (int k = 0; k < u.rows(); ++k)
      if (!(std::abs(u(k, k)) > 0.0) || !std::isfinite(u(k, k)))
        throw SingularBlockError(
            "block_tridiag_solve: singular diagonal block " +
            std::to_string(i) + " after elimination");
  };

  factor(0, A.diag[0]);
  for (int i = 1; i < n; ++i) {
    // w = sub * D^-1 via the transposed factorization of the previous block.
    const Eigen::MatrixXd wt =
        lu[i - 1].transpose().solve(Eigen::MatrixXd(A.sub[i - 1].transpose()));
    w[i - 1] = wt.transpose();
    factor(i, A.diag[i] - w[i - 1] * A.super[i - 1]);
  }

  std::vector<long> row_off(n + 1, 0);
  for (int i = 0; i < n; ++i) row_off[i + 1] = row_off[i] + A.diag[i].rows();

  Eigen::VectorXd y(b.size());
  y.segment(row_off[0], A.diag[0].rows()) =
      b.segment(row_off[0], A.diag[0].rows());
  for (int i = 1; i < n; ++i)
    y.segment(row_off[i], A.diag[i].rows()) =
        b.segment(row_off[i], A.diag[i].rows()) -
        w[i - 1] * y.segment(row_off[i - 1], A.diag[i - 1].rows());

  Eigen::VectorXd x(b.size());
  x.segment(row_off[n - 1], A.diag[n - 1].rows()) =
      lu[n - 1].solve(y.segment(row_off[n - 1], A.diag[n - 1].rows()));
  for (int i = n - 2; i >= 0; --i)
    x.segment(row_off[i], A.diag[i].rows()) = lu[i].solve(
        y.segment(row_off[i], A.diag[i].rows()) -
        A.super[i] * x.segment(row_off[i + 1], A.diag[i + 1].rows()));
  return x;
}

struct NewtonConfig {
  /// Absolute tolerance on the max-norm of the residual.
  double residual_tol = 1e-10;
  int max_iters = 50;
  /// Halving line search from unit step; a step is accepted when the
  /// residual norm decreases.
  int max_halvings = 30;

  void validate() const {
    if (!(residual_tol > 0.0))
      throw std::invalid_argument("NewtonConfig: residual_tol must be > 0");
    if (max_iters < 0 || max_halvings < 0)
      throw std::invalid_argument("NewtonConfig: iteration counts must be >= 0");
  }
};

struct NewtonTrace {
  std::vector<double> residual_norms;  ///< including the initial residual
  int iterations = 0;                  ///< accepted Newton steps
  bool converged = false;
};

namespace detail {

inline DGSolution apply_step(const DGSolution& sol, const Eigen::VectorXd& dx,
                             double scale) {
  const std::vector<int> off = sol.orders.offsets();
  std::vector<VelocityPoly> coeffs;
  coeffs.reserve(sol.coeffs.size());
  for (int k = 0; k < sol.mesh.n_elements; ++k) {
    std::vector<double> c = sol.coeffs[k].coeffs;
    for (int i = 0; i <= sol.orders[k]; ++i) c[i] += scale * dx[off[k] + i];
    coeffs.emplace_back(std::move(c));
  }
  return {sol.mesh, sol.orders, std::move(coeffs)};
}

}  // namespace detail

/// Damped Newton iteration on the square system (test = trial = solution
/// orders). A trial state that loses realizability counts as a rejected
/// step. The returned trace holds the residual norm after every accepted
/// step, monotonically decreasing.
inline std::pair<DGSolution, NewtonTrace> newton_solve(
    DGSolution initial, const AssemblyContext& ctx, const NewtonConfig& cfg) {
  cfg.validate();
  DGSolution sol = std::move(initial);
  NewtonTrace trace;

  Eigen::VectorXd res = assemble_residual(sol, ctx, sol.orders);
  double norm = res.lpNorm<Eigen::Infinity>();
  trace.residual_norms.push_back(norm);

  while (norm > cfg.residual_tol) {
    if (trace.iterations >= cfg.max_iters)
      throw NewtonFailure("newton_solve: no convergence after " +
                          std::to_string(cfg.max_iters) +
                          " iterations (residual " + std::to_string(norm) +
                          ")");
    const BlockTriDiag jac = assemble_jacobian(sol, ctx, sol.orders, sol.orders);
    const Eigen::VectorXd dx = block_tridiag_solve(jac, -res);

    double scale = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= cfg.max_halvings; ++halving) {
      DGSolution trial = detail::apply_step(sol, dx, scale);
      try {
        Eigen::VectorXd trial_res = assemble_residual(trial, ctx, sol.orders);
        const double trial_norm = trial_res.lpNorm<Eigen::Infinity>();
        if (trial_norm < norm) {
          sol = std::move(trial);
          res = std::move(trial_res);
          norm = trial_norm;
          accepted = true;
          break;
        }
      } catch (const KineticError&) {
        // Unrealizable trial state: treat like an increase and halve.
      }
      scale *= 0.5;
    }
    if (!accepted)
      throw NewtonFailure("newton_solve: line search failed at iteration " +
                          std::to_string(trace.iterations) + " (residual " +
                          std::to_string(norm) + ")");
    ++trace.iterations;
    trace.residual_norms.push_back(norm);
  }
  trace.converged = true;
  return {std::move(sol), std::move(trace)};
}

/// Linearized dual solve: assembles the Jacobian on the enriched test and
/// trial spaces at the (implicitly zero-padded) primal state and solves
/// K^T z = J' exactly in that space.
inline DGSolution dual_solve(const DGSolution& primal,
                             const AssemblyContext& ctx,
                             const OrderMap& enriched_orders,
                             const Eigen::VectorXd& goal_gradient) {
  bool strictly_larger = false;
  for (int k = 0; k < enriched_orders.size(); ++k) {
    if (enriched_orders[k] < primal.orders[k])
      throw std::invalid_argument(
          "dual_solve: enriched orders must dominate the primal orders");
    if (enriched_orders[k] > primal.orders[k]) strictly_larger = true;
  }
  if (!strictly_larger)
    throw std::invalid_argument(
        "dual_solve: enrichment must be strict somewhere, otherwise the "
        "estimate vanishes by Galerkin orthogonality");
  if (goal_gradient.size() != enriched_orders.dof())
    throw std::invalid_argument("dual_solve: gradient size mismatch");

  const BlockTriDiag jac =
      assemble_jacobian(primal, ctx, enriched_orders, enriched_orders);
  const Eigen::VectorXd z =
      block_tridiag_solve(jac, goal_gradient, /*transpose=*/true);

  const std::vector<int> off = enriched_orders.offsets();
  std::vector<VelocityPoly> coeffs;
  coeffs.reserve(enriched_orders.size());
  for (int k = 0; k < enriched_orders.size(); ++k) {
    std::vector<double> c(enriched_orders[k] + 1);
    for (int i = 0; i <= enriched_orders[k]; ++i) c[i] = z[off[k] + i];
    coeffs.emplace_back(std::move(c));
  }
  return {primal.mesh, enriched_orders, std::move(coeffs)};
}

}  // namespace momadapt
