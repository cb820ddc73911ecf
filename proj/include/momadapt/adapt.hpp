#pragma once

// SEMR driver: Solve -> Estimate -> Mark -> Refine with cancellation-aware
// marking and element-wise moment-order refinement.

#include <string>
#include <utility>
#include <vector>

#include "momadapt/goal.hpp"
#include "momadapt/marking.hpp"
#include "momadapt/problems.hpp"
#include "momadapt/solver.hpp"

namespace momadapt {

struct AdaptConfig {
  double estimate_tol = 1e-12;  ///< stop when |estimate| drops below this
  int max_iterations = 12;
  int initial_order = 4;
  int max_order = 14;        ///< saturated elements are skipped by marking
  int refine_increment = 2;  ///< moment-order step per marked element
  int dual_increment = 2;    ///< dual enrichment M* = M + this
  MarkingConfig marking;
  NewtonConfig newton;

  void validate() const {
    if (!(estimate_tol >= 0.0))
      throw std::invalid_argument("AdaptConfig: estimate_tol must be >= 0");
    if (max_iterations < 1)
      throw std::invalid_argument("AdaptConfig: max_iterations must be >= 1");
    if (initial_order < 2)
      throw std::invalid_argument("AdaptConfig: initial_order must be >= 2");
    if (refine_increment < 1 || dual_increment < 1)
      throw std::invalid_argument("AdaptConfig: increments must be >= 1");
    if (max_order < initial_order)
      throw std::invalid_argument("AdaptConfig: max_order below initial order");
    marking.validate();
    newton.validate();
  }
};

/// One Solve/Estimate record of the adaptive loop; `marked` is empty on the
/// final record.
struct AdaptRecord {
  int iteration = 0;
  int dof = 0;
  double goal = 0.0;
  double estimate = 0.0;
  double bound_cancel = 0.0;
  double bound_triangle = 0.0;
  int newton_iterations = 0;
  std::vector<int> marked;
};

struct AdaptState {
  std::vector<int> ranks;  ///< per-element hierarchical rank r_kappa
  std::vector<AdaptRecord> history;
  DGSolution primal;
  DGSolution dual;
  bool reached_tolerance = false;
  bool newton_failed = false;
  std::string stop_reason;
};

/// Run the adaptive loop until the estimate tolerance, an empty marked set,
/// or the iteration cap. The primal of each round is warm-started by
/// zero-padded prolongation of the previous one. A Newton failure stops the
/// loop with the history collected so far preserved.
inline AdaptState semr_loop(const ProblemSetup& prob, const AdaptConfig& cfg) {
  cfg.validate();
  const int n = prob.ctx.mesh.n_elements;

  OrderMap orders = OrderMap::uniform(n, cfg.initial_order);
  DGSolution primal = DGSolution::zero(prob.ctx.mesh, orders);
  AdaptState state{std::vector<int>(n, 0), {}, primal, primal,
                   false,                  false, ""};

  for (int r = 0; r < cfg.max_iterations; ++r) {
    NewtonTrace trace;
    try {
      auto solved = newton_solve(std::move(primal), prob.ctx, cfg.newton);
      primal = std::move(solved.first);
      trace = std::move(solved.second);
    } catch (const NewtonFailure& e) {
      state.newton_failed = true;
      state.stop_reason = e.what();
      return state;
    }

    std::vector<int> enriched(n);
    for (int k = 0; k < n; ++k) enriched[k] = orders[k] + cfg.dual_increment;
    const OrderMap dual_orders{std::move(enriched)};
    const Eigen::VectorXd grad =
        goal_gradient(primal, prob.ctx, prob.goal, dual_orders);
    const DGSolution dual = dual_solve(primal, prob.ctx, dual_orders, grad);
    const ErrorBreakdown br = error_indicators(primal, dual, prob.ctx);

    AdaptRecord rec;
    rec.iteration = r;
    rec.dof = orders.dof();
    rec.goal = goal_value(primal, prob.ctx, prob.goal);
    rec.estimate = br.estimate;
    rec.bound_cancel = br.bound_cancel;
    rec.bound_triangle = br.bound_triangle;
    rec.newton_iterations = trace.iterations;

    state.primal = primal;
    state.dual = dual;

    if (std::abs(br.estimate) < cfg.estimate_tol) {
      state.history.push_back(std::move(rec));
      state.reached_tolerance = true;
      state.stop_reason = "estimate below tolerance";
      return state;
    }
    if (r + 1 == cfg.max_iterations) {
      state.history.push_back(std::move(rec));
      state.stop_reason = "iteration cap reached";
      return state;
    }

    std::vector<bool> markable(n);
    for (int k = 0; k < n; ++k)
      markable[k] = orders[k] + cfg.refine_increment <= cfg.max_order;
    std::vector<int> marked;
    try {
      marked = mark(br.zeta, cfg.marking, &markable);
    } catch (const ZeroEstimateError&) {
      state.history.push_back(std::move(rec));
      state.reached_tolerance = true;
      state.stop_reason = "estimate is exactly zero";
      return state;
    }
    if (marked.empty()) {
      state.history.push_back(std::move(rec));
      state.stop_reason = "all candidate elements at the order cap";
      return state;
    }

    rec.marked = marked;
    state.history.push_back(std::move(rec));

    std::vector<int> next = orders.orders;
    for (int k : marked) {
      next[k] += cfg.refine_increment;
      ++state.ranks[k];
    }
    orders = OrderMap{std::move(next)};
    primal = primal.prolonged(orders);
  }
  return state;  // unreachable; loop exits through one of the breaks
}

}  // namespace momadapt
