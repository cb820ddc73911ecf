#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <doctest.h>

#include "momadapt/velocity.hpp"
#include "oracles.hpp"

using namespace momadapt;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
const double kInvSqrt2Pi = 0.3989422804014327;

VelocityPoly constant(double c) { return VelocityPoly({c, 0.0, 0.0}); }
}  // namespace

TEST_CASE("eval_beta matches the defining formula") {
  GaussianParams bg(1.0, 0.0, 1.0);

  SUBCASE("beta(0) is the background Maxwellian") {
    for (int n = 1; n <= 3; ++n)
      CHECK(eval_beta(constant(0.0), RenormSpec(n), bg, 0.0) ==
            doctest::Approx(kInvSqrt2Pi).epsilon(1e-14));
  }
  SUBCASE("positive part clips a negative argument") {
    for (int n = 1; n <= 3; ++n) {
      CHECK(eval_beta(constant(-2.0 * n), RenormSpec(n), bg, 0.7) == 0.0);
      CHECK(eval_beta(constant(-2.0 * n), RenormSpec(n), bg, -3.0) == 0.0);
    }
  }
  SUBCASE("direct evaluation, g(v) = v, N = 1, v = 1") {
    VelocityPoly g({0.0, 1.0, 0.0});
    const double expected = 2.0 * std::exp(-0.5) * kInvSqrt2Pi;
    CHECK(eval_beta(g, RenormSpec(1), bg, 1.0) ==
          doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("eval_beta_prime") {
  GaussianParams bg(1.0, 0.0, 1.0);
  CHECK(eval_beta_prime(constant(0.0), RenormSpec(1), bg, 0.0) ==
        doctest::Approx(kInvSqrt2Pi).epsilon(1e-14));
  CHECK(eval_beta_prime(constant(-4.0), RenormSpec(2), bg, 0.0) == 0.0);
  CHECK(eval_beta_prime(constant(2.0), RenormSpec(2), bg, 0.0) ==
        doctest::Approx(2.0 * kInvSqrt2Pi).epsilon(1e-14));
}

TEST_CASE("entropy density and its derivative") {
  SUBCASE("eta vanishes at the background") {
    for (int n = 1; n <= 4; ++n)
      CHECK(eval_eta(0.7, RenormSpec(n), 0.7) ==
            doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("eta at vanishing f") {
    CHECK(eval_eta(0.0, RenormSpec(1), 1.0) == doctest::Approx(0.5));
    CHECK(eval_eta(0.0, RenormSpec(3), 2.0) == doctest::Approx(1.5));
  }
  SUBCASE("direct formula value") {
    CHECK(eval_eta(4.0, RenormSpec(1), 1.0) == doctest::Approx(4.5));
  }
  SUBCASE("eta_prime closed form and inverse relation") {
    CHECK(eval_eta_prime(1.0, RenormSpec(2), 1.0) == 0.0);
    CHECK(eval_eta_prime(2.25, RenormSpec(2), 1.0) == doctest::Approx(1.0));
    CHECK(eval_eta_prime(4.0, RenormSpec(1), 1.0) == doctest::Approx(3.0));
  }
}

TEST_CASE("eta'(beta(g)) recovers g pointwise on the support") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int n = 1; n <= 2; ++n) {
    RenormSpec spec(n);
    for (int trial = 0; trial < 50; ++trial) {
      VelocityPoly g({0.3 * unit(rng), 0.3 * unit(rng), 0.1 * unit(rng)});
      GaussianParams bg(1.0 + 0.5 * unit(rng), 0.5 * unit(rng),
                        1.0 + 0.5 * unit(rng));
      const double v = 2.0 * unit(rng);
      if (1.0 + g(v) / n <= 1e-6) continue;
      const double f = eval_beta(g, spec, bg, v);
      const double b = maxwellian_density(bg, v);
      CHECK(eval_eta_prime(f, spec, b) == doctest::Approx(g(v)).epsilon(1e-10));
    }
  }
}

TEST_CASE("eta is convex") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int n = 1; n <= 3; ++n) {
    RenormSpec spec(n);
    for (int trial = 0; trial < 100; ++trial) {
      const double f1 = 0.01 + 4.0 * unit(rng);
      const double f2 = 0.01 + 4.0 * unit(rng);
      const double b = 0.1 + 2.0 * unit(rng);
      const double a = unit(rng);
      const double lhs = eval_eta(a * f1 + (1.0 - a) * f2, spec, b);
      const double rhs = a * eval_eta(f1, spec, b) +
                         (1.0 - a) * eval_eta(f2, spec, b);
      CHECK(lhs <= rhs + 1e-12 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST_CASE("incomplete Gaussian moments") {
  GaussianParams unit_bg(1.0, 0.0, 1.0);

  SUBCASE("normalization, half-range first moment, fourth moment") {
    CHECK(incomplete_gaussian_moments(0, Interval(-kInf, kInf), unit_bg)[0] ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK(incomplete_gaussian_moments(1, Interval(0.0, kInf), unit_bg)[1] ==
          doctest::Approx(kInvSqrt2Pi).epsilon(1e-14));
    CHECK(incomplete_gaussian_moments(4, Interval(-kInf, kInf), unit_bg)[4] ==
          doctest::Approx(3.0).epsilon(1e-14));
  }
  SUBCASE("full-range moments obey the Gaussian recurrence exactly") {
    GaussianParams bg(2.0, 0.7, 1.3);
    const auto g = incomplete_gaussian_moments(12, Interval(-kInf, kInf), bg);
    for (int k = 2; k <= 12; ++k)
      CHECK(g[k] == doctest::Approx(bg.u * g[k - 1] +
                                    bg.theta * (k - 1) * g[k - 2])
                        .epsilon(1e-14));
  }
  SUBCASE("finite intervals agree with the quadrature oracle") {
    GaussianParams bg(1.4, -0.3, 0.8);
    const auto g = incomplete_gaussian_moments(8, Interval(-1.0, 2.5), bg);
    for (int k = 0; k <= 8; ++k) {
      auto f = [&](double v) {
        return std::pow(v, k) * maxwellian_density(bg, v);
      };
      const double ref =
          boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
              f, -1.0, 2.5, 15, 1e-14);
      CHECK(g[k] == doctest::Approx(ref).epsilon(1e-12));
    }
  }
  SUBCASE("order cap is enforced") {
    CHECK_THROWS_AS(incomplete_gaussian_moments(kMaxMomentOrder + 1,
                                                Interval(-kInf, kInf), unit_bg),
                    KineticError);
  }
}

TEST_CASE("positivity breakpoints") {
  SUBCASE("positive everywhere: none") {
    CHECK(positivity_breakpoints(constant(0.0), RenormSpec(1)).empty());
  }
  SUBCASE("g(v) = v, N = 1: single root at -1") {
    const auto r =
        positivity_breakpoints(VelocityPoly({0.0, 1.0, 0.0}), RenormSpec(1));
    REQUIRE(r.size() == 1);
    CHECK(r[0] == doctest::Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("g(v) = v^2 - 4, N = 2: roots at +-sqrt(2)") {
    const auto r =
        positivity_breakpoints(VelocityPoly({-4.0, 0.0, 1.0}), RenormSpec(2));
    REQUIRE(r.size() == 2);
    CHECK(r[0] == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));
    CHECK(r[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }
  SUBCASE("double root is kept once") {
    // 1 + g = (v - 1)^2  =>  g = v^2 - 2v
    const auto r =
        positivity_breakpoints(VelocityPoly({0.0, -2.0, 1.0}), RenormSpec(1));
    REQUIRE(r.size() == 1);
    CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-7));
  }
  SUBCASE("identically zero argument is an error") {
    CHECK_THROWS_AS(positivity_breakpoints(constant(-1.0), RenormSpec(1)),
                    KineticError);
  }
}

TEST_CASE("beta_monomial_moments") {
  SUBCASE("Maxwellian moments at g = 0") {
    GaussianParams bg(1.7, 0.4, 2.2);
    for (int n = 1; n <= 2; ++n) {
      const auto m =
          beta_monomial_moments(constant(0.0), RenormSpec(n), bg, 2,
                                VRange::full);
      CHECK(m[0] == doctest::Approx(bg.rho).epsilon(1e-14));
      CHECK(m[1] == doctest::Approx(bg.rho * bg.u).epsilon(1e-14));
      CHECK(m[2] ==
            doctest::Approx(bg.rho * (bg.u * bg.u + bg.theta)).epsilon(1e-14));
    }
  }
  SUBCASE("fully clipped state has zero moments") {
    GaussianParams bg(1.0, 0.0, 1.0);
    for (auto range : {VRange::full, VRange::positive, VRange::negative}) {
      const auto m =
          beta_monomial_moments(constant(-2.0), RenormSpec(1), bg, 4, range);
      for (double mk : m) CHECK(mk == 0.0);
    }
  }
  SUBCASE("clipped linear state matches the quadrature oracle") {
    GaussianParams bg(1.0, 0.0, 1.0);
    const std::vector<double> g{0.0, 1.0, 0.0};
    const auto m = beta_monomial_moments(VelocityPoly(g), RenormSpec(1), bg, 0,
                                         VRange::full);
    const double ref = oracle::beta_moment(g, 1, 1.0, 0.0, 1.0, 0, 0);
    CHECK(m[0] == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("quadrature exactness against the adaptive oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int n_exp = 1 + (trial % 2);
    const auto st = oracle::random_realizable_state(rng, n_exp);
    VelocityPoly g(st.coeffs);
    RenormSpec spec(n_exp);
    for (auto [range, tag] : {std::pair{VRange::full, 0},
                              std::pair{VRange::positive, 1},
                              std::pair{VRange::negative, -1}}) {
      const auto m = beta_monomial_moments(g, spec, st.bg, 6, range);
      for (int k = 0; k <= 6; ++k) {
        const double ref = oracle::beta_moment(st.coeffs, n_exp, st.bg.rho,
                                               st.bg.u, st.bg.theta, k, tag);
        CHECK(std::abs(m[k] - ref) <= 1e-10 * (1.0 + std::abs(ref)));
      }
    }
  }
}

TEST_CASE("half-range additivity") {
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 40; ++trial) {
    const int n_exp = 1 + (trial % 2);
    const auto st = oracle::random_realizable_state(rng, n_exp);
    VelocityPoly g(st.coeffs);
    RenormSpec spec(n_exp);
    const auto full = beta_monomial_moments(g, spec, st.bg, 8, VRange::full);
    const auto pos =
        beta_monomial_moments(g, spec, st.bg, 8, VRange::positive);
    const auto neg =
        beta_monomial_moments(g, spec, st.bg, 8, VRange::negative);
    for (int k = 0; k <= 8; ++k)
      CHECK(std::abs(pos[k] + neg[k] - full[k]) <=
            1e-12 * (1.0 + std::abs(full[k])));
  }
}

TEST_CASE("conserved moments and Maxwellian round trip") {
  SUBCASE("background recovery at g = 0") {
    GaussianParams bg(2.0, 1.0, 3.0);
    const MomentState ms =
        conserved_moments(constant(0.0), RenormSpec(1), bg);
    CHECK(ms.rho == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(ms.momentum == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(ms.energy == doctest::Approx(8.0).epsilon(1e-13));
    CHECK(ms.u == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ms.theta == doctest::Approx(3.0).epsilon(1e-13));
  }
  SUBCASE("constant g doubling the background") {
    for (int n = 1; n <= 3; ++n) {
      const double c = n * (std::pow(2.0, 1.0 / n) - 1.0);
      const MomentState ms = conserved_moments(constant(c), RenormSpec(n),
                                               GaussianParams(1.0, 0.0, 1.0));
      CHECK(ms.rho == doctest::Approx(2.0).epsilon(1e-13));
      CHECK(ms.momentum == doctest::Approx(0.0).epsilon(1e-13));
      CHECK(ms.energy == doctest::Approx(2.0).epsilon(1e-13));
      CHECK(ms.theta == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
  SUBCASE("quadratic perturbation, Gaussian-moment algebra") {
    const MomentState ms =
        conserved_moments(VelocityPoly({0.0, 0.0, 0.1}), RenormSpec(1),
                          GaussianParams(1.0, 0.0, 1.0));
    CHECK(ms.rho == doctest::Approx(1.1).epsilon(1e-14));
    CHECK(ms.u == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(ms.theta == doctest::Approx(1.3 / 1.1).epsilon(1e-13));
  }
  SUBCASE("vacuum and non-realizable inputs are distinct errors") {
    CHECK_THROWS_AS(conserved_moments(constant(-2.0), RenormSpec(1),
                                      GaussianParams(1.0, 0.0, 1.0)),
                    VacuumError);
    CHECK_THROWS_AS(maxwellian_from_moments(-1.0, 0.0, 1.0), VacuumError);
    CHECK_THROWS_AS(maxwellian_from_moments(1.0, 1.0, 1.0),
                    RealizabilityError);
  }
  SUBCASE("maxwellian_from_moments closed forms") {
    const GaussianParams a = maxwellian_from_moments(1.0, 0.0, 1.0);
    CHECK(a.rho == 1.0);
    CHECK(a.u == 0.0);
    CHECK(a.theta == 1.0);
    const GaussianParams b = maxwellian_from_moments(2.0, 2.0, 8.0);
    CHECK(b.rho == doctest::Approx(2.0));
    CHECK(b.u == doctest::Approx(1.0));
    CHECK(b.theta == doctest::Approx(3.0));
    const GaussianParams c = maxwellian_from_moments(1.0, 0.5, 1.0);
    CHECK(c.theta == doctest::Approx(0.75));
  }
  SUBCASE("round trip through conserved_moments at g = 0") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
      GaussianParams bg(0.5 + 2.0 * unit(rng), 2.0 * unit(rng) - 1.0,
                        0.5 + 2.0 * unit(rng));
      const MomentState ms = conserved_moments(constant(0.0), RenormSpec(2), bg);
      const GaussianParams back =
          maxwellian_from_moments(ms.rho, ms.momentum, ms.energy);
      CHECK(back.rho == doctest::Approx(bg.rho).epsilon(1e-12));
      CHECK(back.u == doctest::Approx(bg.u).epsilon(1e-12));
      CHECK(back.theta == doctest::Approx(bg.theta).epsilon(1e-12));
    }
  }
}

TEST_CASE("type invariants are enforced") {
  CHECK_THROWS_AS(GaussianParams(-1.0, 0.0, 1.0), VacuumError);
  CHECK_THROWS_AS(GaussianParams(1.0, 0.0, 0.0), RealizabilityError);
  CHECK_THROWS_AS(RenormSpec(0), std::invalid_argument);
  CHECK_THROWS_AS(VelocityPoly({1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(VelocityPoly({1.0, std::nan(""), 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Interval(1.0, 1.0), std::invalid_argument);
}
