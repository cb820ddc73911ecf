#pragma once

// 1D mesh, per-element moment orders, and assembly of the nonlinear DG
// residual and its block-tridiagonal Jacobian with the kinetic upwind flux
// and both boundary-condition families. Spatial polynomial degree is fixed
// at p = 0, so the volume transport term is structurally absent; extending
// to p > 0 would add it to both assembly routines.

#include <array>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "momadapt/collision.hpp"
#include "momadapt/velocity.hpp"

namespace momadapt {

struct Mesh1D {
  double x_lo;
  double x_hi;
  int n_elements;

  Mesh1D(double lo, double hi, int n) : x_lo(lo), x_hi(hi), n_elements(n) {
    if (!(lo < hi)) throw std::invalid_argument("Mesh1D: require x_lo < x_hi");
    if (n < 1) throw std::invalid_argument("Mesh1D: require n_elements >= 1");
  }

  double width() const { return (x_hi - x_lo) / n_elements; }
  double centroid(int k) const { return x_lo + (k + 0.5) * width(); }
};

/// Per-element moment orders M_kappa.
struct OrderMap {
  std::vector<int> orders;

  explicit OrderMap(std::vector<int> m) : orders(std::move(m)) {
    for (int mk : orders)
      if (mk < 2)
        throw std::invalid_argument("OrderMap: every order must be >= 2");
  }
  static OrderMap uniform(int n_elements, int order) {
    return OrderMap(std::vector<int>(n_elements, order));
  }

  int size() const { return static_cast<int>(orders.size()); }
  int operator[](int k) const { return orders[k]; }

  /// Total degrees of freedom, sum of (M_kappa + 1).
  int dof() const {
    int n = 0;
    for (int mk : orders) n += mk + 1;
    return n;
  }

  /// Start index of each element's coefficient block, plus the total.
  std::vector<int> offsets() const {
    std::vector<int> off(orders.size() + 1, 0);
    for (std::size_t k = 0; k < orders.size(); ++k)
      off[k + 1] = off[k] + orders[k] + 1;
    return off;
  }
};

/// Mesh + per-element orders + per-element coefficient vectors; represents
/// either the primal or the dual state.
struct DGSolution {
  Mesh1D mesh;
  OrderMap orders;
  std::vector<VelocityPoly> coeffs;

  DGSolution(Mesh1D m, OrderMap o, std::vector<VelocityPoly> c)
      : mesh(m), orders(std::move(o)), coeffs(std::move(c)) {
    if (static_cast<int>(coeffs.size()) != mesh.n_elements ||
        orders.size() != mesh.n_elements)
      throw std::invalid_argument("DGSolution: element count mismatch");
    for (int k = 0; k < mesh.n_elements; ++k)
      if (coeffs[k].degree() != orders[k])
        throw std::invalid_argument(
            "DGSolution: coefficient count does not match order of element " +
            std::to_string(k));
  }

  static DGSolution zero(Mesh1D m, OrderMap o) {
    std::vector<VelocityPoly> c;
    c.reserve(o.size());
    for (int k = 0; k < o.size(); ++k)
      c.emplace_back(std::vector<double>(o[k] + 1, 0.0));
    return {m, std::move(o), std::move(c)};
  }

  /// Same state on (element-wise) larger orders, new coefficients zero.
  DGSolution prolonged(const OrderMap& finer) const {
    std::vector<VelocityPoly> c;
    c.reserve(finer.size());
    for (int k = 0; k < finer.size(); ++k) {
      if (finer[k] < orders[k])
        throw std::invalid_argument("prolonged: orders may not decrease");
      std::vector<double> ck(finer[k] + 1, 0.0);
      std::copy(coeffs[k].coeffs.begin(), coeffs[k].coeffs.end(), ck.begin());
      c.emplace_back(std::move(ck));
    }
    return {mesh, finer, std::move(c)};
  }
};

struct BoundaryCondition {
  enum class Kind { fixed_maxwellian, accommodation };

  Kind kind;
  /// fixed_maxwellian: the full inflow triple. accommodation: u and theta
  /// of the wall (u must be 0); rho is determined per evaluation from mass
  /// impermeability.
  GaussianParams inflow;

  static BoundaryCondition fixed(const GaussianParams& m) {
    return {Kind::fixed_maxwellian, m};
  }
  static BoundaryCondition accommodation_wall(double theta_wall) {
    return {Kind::accommodation, GaussianParams(1.0, 0.0, theta_wall)};
  }

 private:
  BoundaryCondition(Kind k, GaussianParams m) : kind(k), inflow(m) {
    if (kind == Kind::accommodation && inflow.u != 0.0)
      throw std::invalid_argument(
          "BoundaryCondition: accommodation wall must be at rest");
  }
};

/// Variable-block-size block-tridiagonal matrix. diag[i] couples element i
/// to itself; sub[i] couples row block i+1 to column block i; super[i]
/// couples row block i to column block i+1.
struct BlockTriDiag {
  std::vector<Eigen::MatrixXd> diag;
  std::vector<Eigen::MatrixXd> sub;
  std::vector<Eigen::MatrixXd> super;

  int n_blocks() const { return static_cast<int>(diag.size()); }

  long total_rows() const {
    long n = 0;
    for (const auto& d : diag) n += d.rows();
    return n;
  }
  long total_cols() const {
    long n = 0;
    for (const auto& d : diag) n += d.cols();
    return n;
  }

  BlockTriDiag transposed() const {
    BlockTriDiag t;
    t.diag.reserve(diag.size());
    for (const auto& d : diag) t.diag.push_back(d.transpose());
    t.sub.reserve(super.size());
    for (const auto& s : super) t.sub.push_back(s.transpose());
    t.super.reserve(sub.size());
    for (const auto& s : sub) t.super.push_back(s.transpose());
    return t;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(total_rows());
    long row = 0, col = 0;
    for (int i = 0; i < n_blocks(); ++i) {
      const long r = diag[i].rows(), c = diag[i].cols();
      Eigen::VectorXd yi = diag[i] * x.segment(col, c);
      if (i > 0) yi += sub[i - 1] * x.segment(col - sub[i - 1].cols(), sub[i - 1].cols());
      if (i + 1 < n_blocks()) yi += super[i] * x.segment(col + c, super[i].cols());
      y.segment(row, r) = yi;
      row += r;
      col += c;
    }
    return y;
  }
};

/// Everything the residual/Jacobian assembly needs besides the state.
struct AssemblyContext {
  Mesh1D mesh;
  std::vector<GaussianParams> backgrounds;  ///< one per element (centroid value)
  std::array<BoundaryCondition, 2> bcs;     ///< [0] = left, [1] = right
  RenormSpec renorm;
  BgkParams bgk;
};

enum class Side { left, right };

/// Kinetic upwind flux moments at an interior edge:
///   F_k = int_{v>0} v^{k+1} beta(g_left) + int_{v<0} v^{k+1} beta(g_right)
/// for k = 0..k_max, each half taken with the owning side's background.
inline std::vector<double> upwind_flux_moments(
    const VelocityPoly& g_left, const VelocityPoly& g_right,
    const RenormSpec& spec, const GaussianParams& bg_left,
    const GaussianParams& bg_right, int k_max) {
  const std::vector<double> lm =
      beta_monomial_moments(g_left, spec, bg_left, k_max + 1, VRange::positive);
  const std::vector<double> rm = beta_monomial_moments(
      g_right, spec, bg_right, k_max + 1, VRange::negative);
  std::vector<double> f(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) f[k] = lm[k + 1] + rm[k + 1];
  return f;
}

struct BoundaryFlux {
  std::vector<double> fluxes;
  /// Wall density from mass impermeability (accommodation only).
  std::optional<double> rho_wall;
};

/// Flux moments through a boundary edge. The incoming velocity half-range
/// carries the boundary Maxwellian, the outgoing half carries the interior
/// trace. For accommodation walls the boundary density solves the mass
/// impermeability condition in closed form, making F_0 vanish.
inline BoundaryFlux boundary_flux_moments(const VelocityPoly& g_inside,
                                          Side side,
                                          const BoundaryCondition& bc,
                                          const RenormSpec& spec,
                                          const GaussianParams& bg_inside,
                                          int k_max) {
  const VRange out_range =
      (side == Side::left) ? VRange::negative : VRange::positive;
  const std::vector<double> out =
      beta_monomial_moments(g_inside, spec, bg_inside, k_max + 1, out_range);

  GaussianParams inflow = bc.inflow;
  std::optional<double> rho_wall;
  if (bc.kind == BoundaryCondition::Kind::accommodation) {
    const double theta_w = bc.inflow.theta;
    // Mass flux of the unit-density wall Maxwellian through the wall,
    // written exactly as the moment recurrence produces it.
    const double unit_flux = theta_w * maxwellian_density(
                                           GaussianParams(1.0, 0.0, theta_w), 0.0);
    const double outgoing = out[1];  // <v beta>_out, signed
    const double rw = (side == Side::left) ? -outgoing / unit_flux
                                           : outgoing / unit_flux;
    if (!(rw > 0.0))
      throw KineticError(
          "boundary_flux_moments: outgoing mass flux has the wrong sign at "
          "the " +
          std::string(side == Side::left ? "left" : "right") + " wall");
    rho_wall = rw;
    inflow = GaussianParams(rw, 0.0, theta_w);
  }

  const double inf = std::numeric_limits<double>::infinity();
  const Interval in_half = (side == Side::left) ? Interval(0.0, inf)
                                                : Interval(-inf, 0.0);
  const std::vector<double> in =
      incomplete_gaussian_moments(k_max + 1, in_half, inflow);

  std::vector<double> f(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) f[k] = in[k + 1] + out[k + 1];
  return {std::move(f), rho_wall};
}

namespace detail {

template <typename F>
auto with_element_context(int element, F&& f) {
  const auto tag = [element](const char* what) {
    return "element " + std::to_string(element) + ": " + what;
  };
  try {
    return f();
  } catch (const VacuumError& e) {
    throw VacuumError(tag(e.what()));
  } catch (const RealizabilityError& e) {
    throw RealizabilityError(tag(e.what()));
  } catch (const KineticError& e) {
    throw KineticError(tag(e.what()));
  }
}

/// All edge fluxes for one assembly pass, each edge computed once.
/// Edge j sits between elements j-1 and j; edges 0 and n are the boundary.
inline std::vector<std::vector<double>> edge_fluxes(
    const DGSolution& sol, const AssemblyContext& ctx,
    const OrderMap& test_orders) {
  const int n = ctx.mesh.n_elements;
  std::vector<std::vector<double>> flux(n + 1);
  flux[0] = with_element_context(0, [&] {
    return boundary_flux_moments(sol.coeffs[0], Side::left, ctx.bcs[0],
                                 ctx.renorm, ctx.backgrounds[0],
                                 test_orders[0])
        .fluxes;
  });
  for (int j = 1; j < n; ++j) {
    flux[j] = with_element_context(j, [&] {
      return upwind_flux_moments(sol.coeffs[j - 1], sol.coeffs[j], ctx.renorm,
                                 ctx.backgrounds[j - 1], ctx.backgrounds[j],
                                 std::max(test_orders[j - 1], test_orders[j]));
    });
  }
  flux[n] = with_element_context(n - 1, [&] {
    return boundary_flux_moments(sol.coeffs[n - 1], Side::right, ctx.bcs[1],
                                 ctx.renorm, ctx.backgrounds[n - 1],
                                 test_orders[n - 1])
        .fluxes;
  });
  return flux;
}

inline void check_assembly_inputs(const DGSolution& sol,
                                  const AssemblyContext& ctx,
                                  const OrderMap& test_orders) {
  const int n = ctx.mesh.n_elements;
  if (sol.mesh.n_elements != n ||
      static_cast<int>(ctx.backgrounds.size()) != n || test_orders.size() != n)
    throw std::invalid_argument("assembly: element count mismatch");
  for (int k = 0; k < n; ++k)
    if (test_orders[k] < sol.orders[k])
      throw std::invalid_argument(
          "assembly: test orders must dominate the solution orders");
}

}  // namespace detail

/// Nonlinear DG residual: entry (kappa, k) is
///   F_k(right edge) - F_k(left edge) - h * <v^k C(beta(g_kappa))>
/// for k = 0..test_orders[kappa]. Shared edge fluxes are computed once, so
/// invariant moments telescope across elements exactly.
inline Eigen::VectorXd assemble_residual(const DGSolution& sol,
                                         const AssemblyContext& ctx,
                                         const OrderMap& test_orders) {
  detail::check_assembly_inputs(sol, ctx, test_orders);
  const int n = ctx.mesh.n_elements;
  const double h = ctx.mesh.width();

  const auto flux = detail::edge_fluxes(sol, ctx, test_orders);
  const std::vector<int> off = test_orders.offsets();

  Eigen::VectorXd res(off[n]);
  for (int k = 0; k < n; ++k) {
    const std::vector<double> coll = detail::with_element_context(k, [&] {
      return bgk_moments(sol.coeffs[k], ctx.renorm, ctx.backgrounds[k],
                         ctx.bgk, test_orders[k]);
    });
    for (int i = 0; i <= test_orders[k]; ++i)
      res[off[k] + i] = flux[k + 1][i] - flux[k][i] - h * coll[i];
  }
  return res;
}

/// Jacobian of the residual with respect to the trial coefficients, as a
/// block-tridiagonal operator. The accommodation wall density is frozen
/// (recomputed each residual evaluation, not differentiated), and the
/// relaxation time is frozen inside bgk_jacobian.
inline BlockTriDiag assemble_jacobian(const DGSolution& sol,
                                      const AssemblyContext& ctx,
                                      const OrderMap& test_orders,
                                      const OrderMap& trial_orders) {
  detail::check_assembly_inputs(sol, ctx, test_orders);
  if (trial_orders.size() != ctx.mesh.n_elements)
    throw std::invalid_argument("assembly: trial order count mismatch");
  const int n = ctx.mesh.n_elements;
  const double h = ctx.mesh.width();

  // Half-range moments of beta'(g_k) to the highest power any block needs:
  // own rows, plus the neighbours' rows through the shared edges.
  std::vector<std::vector<double>> pos(n), neg(n);
  for (int k = 0; k < n; ++k) {
    int rows_need = test_orders[k];
    if (k > 0) rows_need = std::max(rows_need, test_orders[k - 1]);
    if (k + 1 < n) rows_need = std::max(rows_need, test_orders[k + 1]);
    const int m_max = rows_need + 1 + trial_orders[k];
    detail::with_element_context(k, [&] {
      pos[k] = beta_prime_monomial_moments(sol.coeffs[k], ctx.renorm,
                                           ctx.backgrounds[k], m_max,
                                           VRange::positive);
      neg[k] = beta_prime_monomial_moments(sol.coeffs[k], ctx.renorm,
                                           ctx.backgrounds[k], m_max,
                                           VRange::negative);
      return 0;
    });
  }

  BlockTriDiag jac;
  jac.diag.reserve(n);
  jac.sub.reserve(n - 1);
  jac.super.reserve(n - 1);
  for (int k = 0; k < n; ++k) {
    const int rows = test_orders[k] + 1;
    const int cols = trial_orders[k] + 1;
    const Eigen::MatrixXd coll = detail::with_element_context(k, [&] {
      return bgk_jacobian(sol.coeffs[k], ctx.renorm, ctx.backgrounds[k],
                          ctx.bgk, rows, cols);
    });
    Eigen::MatrixXd d(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        d(i, j) = pos[k][i + 1 + j] - neg[k][i + 1 + j] - h * coll(i, j);
    jac.diag.push_back(std::move(d));
  }
  for (int k = 0; k + 1 < n; ++k) {
    // sub[k]: residual of element k+1 against coefficients of element k,
    // through the v>0 half of their shared edge.
    Eigen::MatrixXd s(test_orders[k + 1] + 1, trial_orders[k] + 1);
    for (int i = 0; i < s.rows(); ++i)
      for (int j = 0; j < s.cols(); ++j) s(i, j) = -pos[k][i + 1 + j];
    jac.sub.push_back(std::move(s));

    // super[k]: residual of element k against coefficients of element k+1,
    // through the v<0 half of the same edge.
    Eigen::MatrixXd p(test_orders[k] + 1, trial_orders[k + 1] + 1);
    for (int i = 0; i < p.rows(); ++i)
      for (int j = 0; j < p.cols(); ++j) p(i, j) = neg[k + 1][i + 1 + j];
    jac.super.push_back(std::move(p));
  }
  return jac;
}

}  // namespace momadapt
