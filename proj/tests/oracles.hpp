#pragma once

// Test-only oracles, kept independent of the library implementation paths
// they are used to check: adaptive numerical quadrature of the clipped
// renormalized distribution (pointwise evaluation, grid/bisection support
// detection, Gauss-Kronrod panels), dense LU reference solves, central
// finite differences, and brute-force subset enumeration for the marking
// strategy.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "momadapt/dg.hpp"
#include "momadapt/velocity.hpp"

namespace oracle {

inline double horner(const std::vector<double>& c, double v) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * v + *it;
  return acc;
}

/// Pointwise beta evaluated from the defining formula only.
inline double beta_pointwise(const std::vector<double>& g_coeffs, int n_exp,
                             double rho, double u, double theta, double v) {
  const double base = 1.0 + horner(g_coeffs, v) / n_exp;
  if (base <= 0.0) return 0.0;
  const double w = rho / std::sqrt(2.0 * momadapt::kPi * theta) *
                   std::exp(-0.5 * (v - u) * (v - u) / theta);
  return w * std::pow(base, n_exp);
}

/// Sign-change scan plus bisection: smooth-piece boundaries of
/// 1 + g(v)/N on [lo, hi], independent of the companion-matrix route.
inline std::vector<double> scan_sign_changes(
    const std::vector<double>& g_coeffs, int n_exp, double lo, double hi) {
  const int samples = 40000;
  std::vector<double> cuts;
  auto p = [&](double v) { return 1.0 + horner(g_coeffs, v) / n_exp; };
  double prev_v = lo, prev_p = p(lo);
  for (int i = 1; i <= samples; ++i) {
    const double v = lo + (hi - lo) * i / samples;
    const double pv = p(v);
    if ((prev_p > 0.0 && pv <= 0.0) || (prev_p <= 0.0 && pv > 0.0)) {
      double a = prev_v, b = v;
      for (int it = 0; it < 100; ++it) {
        const double m = 0.5 * (a + b);
        if ((p(a) > 0.0) == (p(m) > 0.0))
          a = m;
        else
          b = m;
      }
      cuts.push_back(0.5 * (a + b));
    }
    prev_v = v;
    prev_p = pv;
  }
  return cuts;
}

/// Adaptive quadrature of <v^k beta(g)> over the requested range, with the
/// integrand assembled from the defining formulas above. range: 0 = full,
/// +1 = v > 0, -1 = v < 0.
inline double beta_moment(const std::vector<double>& g_coeffs, int n_exp,
                          double rho, double u, double theta, int k,
                          int range) {
  const double spread = 50.0 * std::sqrt(theta) + std::abs(u) + 10.0;
  double lo = u - spread, hi = u + spread;
  if (range > 0) lo = std::max(lo, 0.0);
  if (range < 0) hi = std::min(hi, 0.0);
  if (!(lo < hi)) return 0.0;

  std::vector<double> cuts{lo};
  for (double c : scan_sign_changes(g_coeffs, n_exp, lo, hi))
    cuts.push_back(c);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());

  auto f = [&](double v) {
    return std::pow(v, k) * beta_pointwise(g_coeffs, n_exp, rho, u, theta, v);
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i] < cuts[i + 1])) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, cuts[i], cuts[i + 1], 20, 1e-13);
  }
  return total;
}

inline Eigen::MatrixXd to_dense(const momadapt::BlockTriDiag& a) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.total_rows(), a.total_cols());
  long row = 0, col = 0;
  for (int i = 0; i < a.n_blocks(); ++i) {
    m.block(row, col, a.diag[i].rows(), a.diag[i].cols()) = a.diag[i];
    if (i + 1 < a.n_blocks()) {
      m.block(row + a.diag[i].rows(), col, a.sub[i].rows(), a.sub[i].cols()) =
          a.sub[i];
      m.block(row, col + a.diag[i].cols(), a.super[i].rows(),
              a.super[i].cols()) = a.super[i];
    }
    row += a.diag[i].rows();
    col += a.diag[i].cols();
  }
  return m;
}

inline Eigen::VectorXd dense_solve(const momadapt::BlockTriDiag& a,
                                   const Eigen::VectorXd& b, bool transpose) {
  Eigen::MatrixXd m = to_dense(a);
  if (transpose) m.transposeInPlace();
  return m.fullPivLu().solve(b);
}

/// Central difference of a scalar function, step 1e-6 * (1 + |x|).
inline double central_diff(const std::function<double(double)>& f, double x) {
  const double h = 1e-6 * (1.0 + std::abs(x));
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Random realizable state: polynomial coefficients with decaying
/// magnitude over a random background; retries until the state has
/// positive density and temperature.
struct RandomState {
  std::vector<double> coeffs;
  momadapt::GaussianParams bg;
};

inline RandomState random_realizable_state(std::mt19937_64& rng, int n_exp,
                                           int max_degree = 8) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> deg(2, max_degree);
  for (;;) {
    const int m = deg(rng);
    std::vector<double> c(m + 1);
    double scale = 0.4;
    for (int k = 0; k <= m; ++k) {
      c[k] = (2.0 * unit(rng) - 1.0) * scale;
      scale *= 0.6;
    }
    momadapt::GaussianParams bg(0.5 + 1.5 * unit(rng), 2.0 * unit(rng) - 1.0,
                                0.5 + 1.5 * unit(rng));
    try {
      momadapt::conserved_moments(momadapt::VelocityPoly(c),
                                  momadapt::RenormSpec(n_exp), bg);
      return {std::move(c), bg};
    } catch (const momadapt::KineticError&) {
      // resample
    }
  }
}

/// All subsets of t_plus satisfying the cancellation budget, reduced to
/// the maximum attainable cardinality. Exponential; n <= ~16 only.
inline int max_cancellable_cardinality(const std::vector<double>& zeta,
                                       const std::vector<int>& t_plus,
                                       double budget) {
  const int n = static_cast<int>(t_plus.size());
  int best = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double sum = 0.0;
    int card = 0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        sum += std::abs(zeta[t_plus[i]]);
        ++card;
      }
    if (sum <= budget) best = std::max(best, card);
  }
  return best;
}

}  // namespace oracle
