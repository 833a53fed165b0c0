#include <doctest.h>

#include <cmath>
#include <random>

#include "eqport/errors.hpp"
#include "eqport/verify.hpp"

using namespace eqport;
using Dist = RiskAversionDistribution;

namespace {

struct Setup {
  MarketModel market;
  TimeGrid grid;
  StrategyCurve curve;
};

Setup solve(const Dist& d, double lambda, double sigma, double T, std::size_t n = 2000) {
  MarketModel m = MarketModel::constant(lambda, sigma, T);
  TimeGrid g = TimeGrid::uniform(m, n);
  PreferenceKernel k(d);
  StrategyCurve c = solve_equilibrium(k, m, g);
  return {m, g, c};
}

double lognormal_objective(const Dist& d, double y, double s) {
  return std::exp(y + d.log_laplace(0.5 * s));
}

}  // namespace

TEST_CASE("philox known answers") {
  auto r = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  CHECK(r[0] == 0x6627e8d5u);
  CHECK(r[1] == 0xe169c58du);
  CHECK(r[2] == 0xbc57ac4cu);
  CHECK(r[3] == 0x9b00dbd8u);
  r = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                        {0xffffffffu, 0xffffffffu});
  CHECK(r[0] == 0x408f276du);
  CHECK(r[1] == 0x41c83b0eu);
  CHECK(r[2] == 0xa20bc7c6u);
  CHECK(r[3] == 0x6d5451fdu);
}

TEST_CASE("box-muller normals have unit moments") {
  double s = 0, s2 = 0, s4 = 0;
  const int n = 100000;
  for (int p = 0; p < n / 2; ++p) {
    const auto [a, b] = normal_pair(7, p, 3);
    for (double z : {a, b}) {
      s += z;
      s2 += z * z;
      s4 += z * z * z * z;
    }
  }
  CHECK(std::abs(s / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(s4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

TEST_CASE("zero strategy has objective one without noise") {
  const auto m = MarketModel::constant(0.4, 0.2, 5.0);
  const auto z = zero_strategy(m, TimeGrid::uniform(m, 100));
  const auto e = mc_objective(z, m, Dist::discrete({1, 3}, {0.9, 0.1}), 0.0);
  CHECK(e.value == 1.0);
  CHECK(e.stderr_ == 0.0);
}

TEST_CASE("monte carlo matches the closed-form objective") {
  SimConfig sim;
  sim.paths = 100000;
  const std::vector<Dist> laws{Dist::point(1.0), Dist::point(2.5),
                               Dist::discrete({1, 3}, {0.9, 0.1}),
                               Dist::gamma(2.0, 0.5), Dist::poisson(2.0)};
  for (const auto& d : laws) {
    const auto s = solve(d, 0.4, 0.2, 20.0);
    for (double t : {0.0, 10.0}) {
      const std::size_t i = t == 0.0 ? 0 : 1000;
      const double exact = objective_at(PreferenceKernel(d), s.curve.v[i]).value;
      // J0 = exp(y) l(v/2) = 1 / l(v/2) on an equilibrium curve.
      const double j = std::exp(s.curve.y[i] + d.log_laplace(0.5 * s.curve.v[i]));
      CHECK(j == doctest::Approx(exact).epsilon(1e-6));
      const auto e = mc_objective(s.curve, s.market, d, t, sim);
      INFO(d.describe(), " t=", t, " mc=", e.value, " se=", e.stderr_, " exact=", exact);
      CHECK(e.stderr_ > 0.0);
      CHECK(e.stderr_ < 0.02 * exact);
      CHECK(std::abs(e.value - exact) <= 3.0 * e.stderr_);
    }
  }
}

TEST_CASE("lognormal spot checks over random drift and variance") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uy(-0.5, 3.0), us(0.05, 6.0);
  const Dist d = Dist::gamma(3.0, 0.4);
  SimConfig sim;
  sim.paths = 50000;
  for (int i = 0; i < 10; ++i) {
    const double y = uy(rng), s = us(rng);
    std::vector<double> var{0.3 * s, 0.7 * s};
    std::vector<double> drift{0.4 * y - 0.5 * var[0], 0.6 * y - 0.5 * var[1]};
    sim.seed = 100 + i;
    const auto e = mc_from_segments(drift, var, d, sim);
    const double exact = lognormal_objective(d, y, s);
    INFO("y=", y, " s=", s, " mc=", e.value, " se=", e.stderr_);
    CHECK(std::abs(e.value - exact) <= 3.0 * e.stderr_);
  }
}

TEST_CASE("parallel and serial estimates are bit-identical") {
  const auto s = solve(Dist::gamma(2.0, 0.5), 0.4, 0.2, 20.0, 400);
  SimConfig sim;
  sim.paths = 20000;
  const auto a = mc_objective(s.curve, s.market, Dist::gamma(2.0, 0.5), 0.0, sim);
  sim.parallel = false;
  const auto b = mc_objective(s.curve, s.market, Dist::gamma(2.0, 0.5), 0.0, sim);
  CHECK(a.value == b.value);
  CHECK(a.stderr_ == b.stderr_);
}

TEST_CASE("monte carlo input validation") {
  const auto s = solve(Dist::point(2.0), 0.4, 0.2, 5.0, 100);
  SimConfig sim;
  sim.paths = 10;
  CHECK_THROWS_AS(mc_objective(s.curve, s.market, Dist::point(2.0), 0.0, sim), DomainError);
  sim.paths = 2000;
  CHECK_THROWS_AS(mc_objective(s.curve, s.market, Dist::point(2.0), 0.013, sim), DomainError);
  CHECK_THROWS_AS(mc_objective(s.curve, s.market, Dist::stable(0.5), 0.0, sim),
                  PreconditionError);
}

TEST_CASE("equilibrium slope is the second-order term in both directions") {
  const Dist d = Dist::discrete({1, 3}, {0.9, 0.1});
  const auto s = solve(d, 0.4, 0.2, 20.0);
  for (std::size_t i : {0u, 700u, 1500u}) {
    for (double kk : {0.01, 0.5, 3.0}) {
      Eigen::VectorXd k = Eigen::VectorXd::Constant(1, kk);
      const double t = s.curve.t[i];
      const auto up = perturbation_slope(s.curve, s.market, d,
                                         PerturbationProbe::standard(t, k, 20.0));
      const auto dn = perturbation_slope(s.curve, s.market, d,
                                         PerturbationProbe::standard(t, -k, 20.0));
      const double expect = -0.5 * up.j0 * d.moment_ratio(0.5 * s.curve.v[i]) *
                            (0.2 * kk) * (0.2 * kk);
      CHECK(up.extrapolated == doctest::Approx(expect).epsilon(1e-5));
      CHECK(dn.extrapolated == doctest::Approx(expect).epsilon(1e-5));
    }
  }
}

TEST_CASE("certificate accepts equilibria") {
  for (const auto& d : {Dist::point(2.0), Dist::discrete({1, 3}, {0.9, 0.1}),
                        Dist::gamma(2.0, 0.5), Dist::poisson(2.0)}) {
    const auto s = solve(d, 0.4, 0.2, 20.0);
    const auto c = equilibrium_certificate(s.curve, s.market, d);
    INFO(d.describe(), " worst=", c.worst_slope);
    CHECK(c.pass);
    CHECK(c.probes.size() == 1000);
  }
  const Dist st = Dist::stable(0.4);
  const auto s = solve(st, 0.4, 0.2, 1.0, 500);
  CHECK(s.curve.v.front() == 0.0);
  CHECK(equilibrium_certificate(s.curve, s.market, st).pass);
}

TEST_CASE("certificate rejects non-equilibria") {
  const Dist d = Dist::discrete({1, 3}, {0.9, 0.1});
  const auto s = solve(d, 0.4, 0.2, 20.0);
  const auto big = scale_exposure(s.curve, s.market, d, 1.05);
  CHECK(big.v.front() == doctest::Approx(1.05 * 1.05 * s.curve.v.front()).epsilon(1e-6));
  const auto c = equilibrium_certificate(big, s.market, d);
  CHECK_FALSE(c.pass);
  CHECK(c.worst_slope > 1e-6);

  const auto zero = zero_strategy(s.market, s.grid);
  CHECK_FALSE(equilibrium_certificate(zero, s.market, d).pass);
}

TEST_CASE("merton curve for the wrong risk aversion admits an improving direction") {
  const Dist d = Dist::discrete({1, 3}, {0.9, 0.1});
  const auto s = solve(Dist::point(3.0), 0.4, 0.2, 20.0);
  double best = -INFINITY;
  for (double kk : {-2.0, -1.0, 1.0, 2.0}) {
    const auto r = perturbation_slope(
        s.curve, s.market, d,
        PerturbationProbe::standard(0.0, Eigen::VectorXd::Constant(1, kk), 20.0));
    best = std::max(best, r.extrapolated);
  }
  CHECK(best > 1e-6);
}

TEST_CASE("richardson ladder converges on a smooth slope") {
  const Dist d = Dist::gamma(2.0, 0.5);
  const auto s = solve(d, 0.4, 0.2, 20.0);
  const auto r = perturbation_slope(s.curve, s.market, d,
                                    PerturbationProbe::standard(
                                        0.0, Eigen::VectorXd::Constant(1, 1.0), 20.0));
  CHECK(r.eps.size() == 13);
  CHECK(r.eps.back() == doctest::Approx(20.0 / 32768.0));
  // First-order ladder error shrinks roughly by half per step.
  const double e1 = std::abs(r.slope[11] - r.extrapolated);
  const double e2 = std::abs(r.slope[12] - r.extrapolated);
  CHECK(e2 < 0.6 * e1);
}

TEST_CASE("zero exposure under infinite mean gives a diverging ladder") {
  const auto m = MarketModel::constant(1.0, 1.0, 1.0);
  const PreferenceKernel k(Dist::stable(0.8));
  const auto c = solve_family_member(k, m, 0.25, TimeGrid::uniform(m, 2000));
  const std::size_t i = 1200;  // t = 0.6, after the member stops investing
  REQUIRE(c.v[i] == 0.0);
  const auto r = perturbation_slope(c, m, k.dist(),
                                    PerturbationProbe::standard(
                                        c.t[i], Eigen::VectorXd::Constant(1, 0.02), 1.0));
  CHECK(r.diverging);
  CHECK(r.extrapolated == -INFINITY);
  CHECK(equilibrium_certificate(c, m, k.dist()).pass);

  // Finite mean: the same probe converges to lambda.k - mean |sigma k|^2 / 2.
  const Dist fin = Dist::discrete({1, 3}, {0.9, 0.1});
  const auto z = zero_strategy(m, TimeGrid::uniform(m, 2000));
  const auto f = perturbation_slope(z, m, fin,
                                    PerturbationProbe::standard(
                                        0.5, Eigen::VectorXd::Constant(1, 0.02), 1.0));
  CHECK_FALSE(f.diverging);
  CHECK(f.extrapolated == doctest::Approx(0.02 - 1.2 * 0.0004 / 2).epsilon(1e-7));
}

TEST_CASE("closed-form and simulated perturbed objectives agree") {
  const Dist d = Dist::discrete({1, 3}, {0.9, 0.1});
  const auto s = solve(d, 0.4, 0.2, 20.0, 200);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, 150);
  std::uniform_int_distribution<std::size_t> width(1, 40);
  std::uniform_real_distribution<double> kd(-3.0, 3.0);
  SimConfig sim;
  sim.paths = 50000;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t i0 = pick(rng), w = width(rng);
    const double eps = s.curve.t[i0 + w] - s.curve.t[i0];
    const double k = kd(rng);
    PerturbationProbe probe{s.curve.t[i0], Eigen::VectorXd::Constant(1, k), {eps}};
    const auto r = perturbation_slope(s.curve, s.market, d, probe);
    const double closed = r.j0 + r.slope[0] * eps;
    // Per-cell log-wealth moments with the exposure shifted by sigma k on
    // [t, t + eps]; the exposure is linear within each cell.
    std::vector<double> drift, var;
    for (std::size_t i = i0; i + 1 < s.curve.size(); ++i) {
      const double shift = i < i0 + w ? 0.2 * k : 0.0;
      const double l = s.curve.a[i](0) + shift, rr = s.curve.a[i + 1](0) + shift;
      const double dt = s.curve.t[i + 1] - s.curve.t[i];
      const double v = dt * (l * l + l * rr + rr * rr) / 3.0;
      var.push_back(v);
      drift.push_back(dt * 0.5 * (l + rr) * 0.4 - 0.5 * v);
    }
    sim.seed = 900 + trial;
    const auto e = mc_from_segments(drift, var, d, sim);
    INFO("t=", probe.t, " eps=", eps, " k=", k, " closed=", closed, " mc=", e.value,
         " se=", e.stderr_);
    CHECK(std::abs(e.value - closed) <= 3.0 * e.stderr_);
  }
}
