#pragma once

// Fully specified heat-transfer and shock-structure configurations:
// backgrounds, boundary conditions, physical constants, and the goal shift
// field.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "momadapt/dg.hpp"
#include "momadapt/goal.hpp"

namespace momadapt {

/// Heat conduction between two fully accommodating walls on the unit
/// interval. The mean free path is knudsen * domain length (= knudsen).
struct HeatTransferConfig {
  double theta_left = 1.0;
  double theta_ratio = 1.2;  ///< theta_right / theta_left
  double knudsen = 1e-3;
  int n_elements = 100;      ///< desk scale; full scale uses 1000
  int renorm_n = 1;
  int initial_order = 4;
  int dual_increment = 2;
  int reference_order = 14;

  void validate() const {
    if (!(theta_left > 0.0))
      throw std::invalid_argument("heat_transfer.theta_left must be > 0");
    if (!(theta_ratio > 0.0))
      throw std::invalid_argument("heat_transfer.theta_ratio must be > 0");
    if (!(knudsen > 0.0))
      throw std::invalid_argument("heat_transfer.knudsen must be > 0");
    if (n_elements < 1)
      throw std::invalid_argument("heat_transfer.n_elements must be >= 1");
  }
};

/// Stationary normal shock on (-40*lambda, 40*lambda), upstream state
/// normalized to rho = theta = 1, downstream from the Rankine-Hugoniot
/// conditions. The adiabatic exponent is gamma = 1 + 2/dof_n; the paper
/// leaves the molecular degree count open, so it is a config knob
/// (default 3, the monatomic value).
struct ShockConfig {
  double mach = 1.4;
  double lambda = 3.67e-3;
  int n_elements = 125;  ///< desk scale; full scale uses 1250
  int dof_n = 3;
  int renorm_n = 2;
  int initial_order = 4;
  int dual_increment = 4;
  int reference_order = 12;

  void validate() const {
    if (!(mach > 1.0))
      throw std::invalid_argument("shock.mach must be > 1 (compressive)");
    if (!(lambda > 0.0))
      throw std::invalid_argument("shock.lambda must be > 0");
    if (n_elements < 1)
      throw std::invalid_argument("shock.n_elements must be >= 1");
    if (dof_n < 1) throw std::invalid_argument("shock.dof_n must be >= 1");
  }

  double gamma() const { return 1.0 + 2.0 / dof_n; }
  double domain_half_width() const { return 40.0 * lambda; }
};

/// Continuum background of the heat-transfer problem:
/// theta(x) linear between the wall temperatures, rho(x) isobaric.
inline GaussianParams heat_transfer_background(double x,
                                               const HeatTransferConfig& cfg) {
  const double theta_l = cfg.theta_left;
  const double theta_r = cfg.theta_ratio * cfg.theta_left;
  const double theta = theta_l + (theta_r - theta_l) * x;
  const double rho = (theta_l + theta_r) / (2.0 * theta);
  return {rho, 0.0, theta};
}

struct RankineHugoniotStates {
  GaussianParams left;
  GaussianParams right;
  double u_left;
  double u_right;
};

/// Upstream/downstream states of a steady shock with upstream
/// (rho_l, theta_l) and Mach number measured against sqrt(gamma*theta_l).
inline RankineHugoniotStates rankine_hugoniot(double rho_l, double theta_l,
                                              double mach, double gamma) {
  if (!(mach > 0.0) || !(gamma > 1.0))
    throw std::invalid_argument("rankine_hugoniot: require mach > 0, gamma > 1");
  const double m2 = mach * mach;
  const double rho_r = rho_l * (gamma + 1.0) * m2 / (2.0 + (gamma - 1.0) * m2);
  const double theta_r = theta_l * (rho_l / rho_r) *
                         (2.0 * gamma * m2 - (gamma - 1.0)) / (gamma + 1.0);
  const double u_l = mach * std::sqrt(gamma * theta_l);
  const double u_r = u_l * (2.0 + (gamma - 1.0) * m2) / ((gamma + 1.0) * m2);
  return {GaussianParams(rho_l, u_l, theta_l),
          GaussianParams(rho_r, u_r, theta_r), u_l, u_r};
}

/// Mott-Smith-like interpolated background of the shock problem. The mass
/// flux rho(x)*u(x) is constant by construction.
inline GaussianParams shock_background(double x, const ShockConfig& cfg) {
  const RankineHugoniotStates rh =
      rankine_hugoniot(1.0, 1.0, cfg.mach, cfg.gamma());
  const double ul_over_ur = rh.u_left / rh.u_right;
  const double X = 0.5 - 0.5 * std::tanh(2.0 * x / cfg.domain_half_width());

  const double rho = rh.left.rho * (X + ul_over_ur * (1.0 - X));
  const double u = rh.u_left * rh.left.rho / rho;
  const double rl_over_r = rh.left.rho / rho;
  const double theta_ratio_r = rh.right.theta / rh.left.theta;
  const double one_minus_ur = 1.0 - rh.u_right / rh.u_left;
  const double theta =
      rh.left.theta *
      (rl_over_r * (X + theta_ratio_r * ul_over_ur * (1.0 - X)) +
       cfg.gamma() / 3.0 * rl_over_r * rl_over_r * one_minus_ur *
           one_minus_ur * cfg.mach * cfg.mach * (1.0 - X) * X);
  return {rho, u, theta};
}

/// Assembled problem: assembly inputs plus the goal shift field and the
/// order schedule knobs.
struct ProblemSetup {
  AssemblyContext ctx;
  GoalSpec goal;
  int initial_order;
  int dual_increment;
  int reference_order;
};

inline ProblemSetup build_problem(const HeatTransferConfig& cfg) {
  cfg.validate();
  Mesh1D mesh(0.0, 1.0, cfg.n_elements);
  std::vector<GaussianParams> bgs;
  std::vector<double> shift;
  bgs.reserve(cfg.n_elements);
  shift.reserve(cfg.n_elements);
  for (int k = 0; k < cfg.n_elements; ++k) {
    bgs.push_back(heat_transfer_background(mesh.centroid(k), cfg));
    shift.push_back(bgs.back().u);
  }
  const double theta_r = cfg.theta_ratio * cfg.theta_left;
  AssemblyContext ctx{mesh, std::move(bgs),
                      {BoundaryCondition::accommodation_wall(cfg.theta_left),
                       BoundaryCondition::accommodation_wall(theta_r)},
                      RenormSpec(cfg.renorm_n),
                      BgkParams(cfg.knudsen * (mesh.x_hi - mesh.x_lo))};
  return {std::move(ctx), GoalSpec{std::move(shift)}, cfg.initial_order,
          cfg.dual_increment, cfg.reference_order};
}

inline ProblemSetup build_problem(const ShockConfig& cfg) {
  cfg.validate();
  const double half = cfg.domain_half_width();
  Mesh1D mesh(-half, half, cfg.n_elements);
  std::vector<GaussianParams> bgs;
  std::vector<double> shift;
  bgs.reserve(cfg.n_elements);
  shift.reserve(cfg.n_elements);
  for (int k = 0; k < cfg.n_elements; ++k) {
    bgs.push_back(shock_background(mesh.centroid(k), cfg));
    shift.push_back(bgs.back().u);
  }
  const RankineHugoniotStates rh =
      rankine_hugoniot(1.0, 1.0, cfg.mach, cfg.gamma());
  AssemblyContext ctx{mesh, std::move(bgs),
                      {BoundaryCondition::fixed(rh.left),
                       BoundaryCondition::fixed(rh.right)},
                      RenormSpec(cfg.renorm_n), BgkParams(cfg.lambda)};
  return {std::move(ctx), GoalSpec{std::move(shift)}, cfg.initial_order,
          cfg.dual_increment, cfg.reference_order};
}

}  // namespace momadapt
