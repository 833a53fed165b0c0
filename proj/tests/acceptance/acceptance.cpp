// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "eqport/statics.hpp"
#include "eqport/verify.hpp"

using namespace eqport;
using Dist = RiskAversionDistribution;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double stable_v(double alpha, double lambda, double t0, double t) {
  if (t >= t0) return 0.0;
  return std::pow(std::pow(2.0, 2 * alpha - 2) * (2 * alpha - 1) * lambda * lambda * (t0 - t) /
                      (alpha * alpha),
                  1 / (2 * alpha - 1));
}

const TwoPointLaw kFig1A{1.0, 2.0, 0.9}, kFig1B{1.0, 1.0, 0.9};
constexpr double kFig1Golden = 8.185676157655;

Outcome merton() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = MarketModel::constant(0.3, 0.2, 10.0);
  const PreferenceKernel k(Dist::point(2.0));
  const auto c = solve_unique(k, m, TimeGrid::uniform(m, 2000));
  double err = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    err = std::max({err, std::abs(c.a[i](0) - 0.15), std::abs(c.pi[i](0) - 0.75)});
  const double s = seconds_since(t0);
  return {err <= 1e-12 && s < 1.0, fmt("max error %.2e, %.3f s", err, s)};
}

Outcome closed_form(const Dist& d, const std::function<double(double)>& exact) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = MarketModel::constant(0.4, 0.2, 20.0);
  const auto c = solve_unique(PreferenceKernel(d), m, TimeGrid::uniform(m, 2000));
  double err = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    err = std::max(err, std::abs(c.a[i](0) - exact(m.lambda_accum(c.t[i]))));
  const double s = seconds_since(t0);
  return {err <= 1e-8 && s < 1.0 && c.size() == 2001,
          fmt("max error %.2e over %g points, %.3f s", err, double(c.size()), s)};
}

Outcome stable_family() {
  const auto t0 = std::chrono::steady_clock::now();
  const double alpha = 0.8;
  const auto m = MarketModel::constant(1.0, 1.0, 1.0);
  const PreferenceKernel k(Dist::stable(alpha));
  const auto g = TimeGrid::uniform(m, 2000);
  double err = 0.0;
  bool increasing = true;
  double prev = 0.0;
  for (double T0 : {0.25, 0.5, 1.0}) {
    const auto c = solve_family_member(k, m, T0, g);
    for (std::size_t i = 0; i < c.size(); ++i)
      err = std::max(err, std::abs(c.v[i] - stable_v(alpha, 1.0, T0, c.t[i])));
    increasing = increasing && c.j0[0] > prev;
    prev = c.j0[0];
  }
  const auto o = optimal_equilibrium(k, m, g);
  const bool flags = o.exists && o.t0 == 1.0 && o.optimal && o.uniformly_optimal &&
                     o.uniformly_strictly_optimal;
  const double s = seconds_since(t0);
  return {err <= 1e-8 && increasing && flags && s < 5.0,
          fmt("max v error %.2e, J0 increasing %g, optimal T0 %g with all flags %g", err,
              increasing, o.t0, flags) +
              fmt(", %.3f s", s)};
}

Outcome stable_trivial() {
  const auto m = MarketModel::constant(0.4, 0.2, 1.0);
  const PreferenceKernel k(Dist::stable(0.4));
  const auto rep = classify(k, m);
  const auto z = zero_strategy(m, TimeGrid::uniform(m, 500));
  const auto cert = equilibrium_certificate(z, m, k.dist());
  return {rep.regime == Regime::trivial_only && cert.pass,
          std::string("regime ") + to_string(rep.regime) +
              fmt(", certificate worst slope %.3e", cert.worst_slope)};
}

Outcome figure1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = MarketModel::constant(0.4, 0.2, 20.0);
  const PreferenceKernel k1(kFig1A.dist()), k2(kFig1B.dist());
  const auto cmp = compare_pointwise(k1, k2, m, TimeGrid::uniform(m, 2000));
  const auto cr = find_crossing(kFig1A, kFig1B, m);
  const bool region = !cmp.profile.empty() && cmp.profile.front() > 0;
  const bool ok = cmp.fsd.dominates() && region && cr.found && cr.grid_sign_changes == 1 &&
                  cmp.crossing_cells.size() == 1 && cr.d_prime > 0.0 &&
                  std::abs(cr.t_star - kFig1Golden) <= 1e-6;
  const double s = seconds_since(t0);
  return {ok && s < 5.0, fmt("t* %.10f (golden %.10f), D'(t*) %.4e, %.3f s", cr.t_star,
                             kFig1Golden, cr.d_prime, s)};
}

Outcome rh_sweep() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> r0d(0.3, 3.0), deltad(0.2, 5.0), pd(0.05, 0.95),
      lamd(0.05, 0.6), Td(1.0, 30.0);
  std::size_t violations = 0, points = 0, pairs = 0, dominated = 0;
  while (pairs < 50) {
    const double r0 = r0d(rng), delta = deltad(rng);
    double p1 = pd(rng), p2 = pd(rng);
    if (std::abs(p1 - p2) < 1e-3) continue;
    if (p1 > p2) std::swap(p1, p2);
    const double lam = lamd(rng), T = Td(rng);
    const auto m = MarketModel::constant(lam, 0.2, T);
    const PreferenceKernel k1(TwoPointLaw{r0, delta, p1}.dist());
    const PreferenceKernel k2(TwoPointLaw{r0, delta, p2}.dist());
    // Skip markets where either law has no deterministic equilibrium.
    if (classify(k1, m).regime != Regime::unique_finite ||
        classify(k2, m).regime != Regime::unique_finite)
      continue;
    const auto r = compare_pointwise(k1, k2, m, TimeGrid::uniform(m, 400));
    dominated += r.rh.dominates();
    violations += r.violations;
    points += r.t.size();
    ++pairs;
  }
  return {violations == 0 && dominated == 50,
          fmt("%g pairs, %g rh-ordered, %g violations over %g grid points", double(pairs),
              double(dominated), double(violations), double(points))};
}

Outcome sensitivity() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = MarketModel::constant(0.4, 0.2, 20.0);
  const auto both = crossing_sensitivity(kFig1A, kFig1B, m, SweepParameter::both_p,
                                         {0.80, 0.85, 0.90, 0.95});
  const auto p1 = crossing_sensitivity(kFig1A, kFig1B, m, SweepParameter::p1,
                                       {0.87, 0.89, 0.91, 0.93});
  const auto p2 = crossing_sensitivity(kFig1A, kFig1B, m, SweepParameter::p2,
                                       {0.82, 0.85, 0.88, 0.91});
  const double s = seconds_since(t0);
  std::string d = "t*(p) both:";
  for (double x : both.t_star) d += fmt(" %.4f", x);
  d += "; p1:";
  for (double x : p1.t_star) d += fmt(" %.4f", x);
  d += "; p2:";
  for (double x : p2.t_star) d += fmt(" %.4f", x);
  d += fmt("; %.3f s", s);
  return {both.monotone && p1.monotone && p2.monotone && s < 30.0, d};
}

Outcome figure2() {
  const auto m = MarketModel::constant(0.5, 0.2, 50.0);
  const auto r = convex_combination_compare(
      {Dist::discrete({0.1, 8.0}, {0.2, 0.8}), Dist::point(1.5)}, {0.5, 0.5}, m,
      TimeGrid::uniform(m, 2000));
  double lo = -1, hi = -1;
  for (std::size_t i = 0; i < r.t.size(); ++i)
    if (r.above_all[i]) {
      if (lo < 0) lo = r.t[i];
      hi = r.t[i];
    }
  return {r.above_count > 0,
          fmt("%g grid points with |a_mix| > max(|a1|,|a2|), spanning t in [%.3f, %.3f]",
              double(r.above_count), lo, hi)};
}

Outcome aggregation() {
  const auto m = MarketModel::constant(0.4, 0.2, 20.0);
  const auto tr = sample_mean_aggregation(Dist::discrete({1.0, 3.0}, {0.9, 0.1}),
                                          {1, 2, 4, 8, 16, 64}, m, TimeGrid::uniform(m, 2000));
  return {tr.monotone && tr.limit_rel_deviation <= 0.02,
          fmt("monotone %g, max |a_64| deviation from |lambda|/1.2: %.3f%%", tr.monotone,
              100.0 * tr.limit_rel_deviation)};
}

Outcome monte_carlo() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = MarketModel::constant(0.4, 0.2, 20.0);
  const TimeGrid g = TimeGrid::uniform(m, 2000, {10.0});
  SimConfig sim;
  sim.paths = 200000;
  bool ok = true;
  double worst = 0.0;
  std::string d;
  for (const Dist& dist :
       {Dist::poisson(2.0), Dist::gamma(2.0, 0.5), kFig1A.dist(), kFig1B.dist()}) {
    const PreferenceKernel k(dist);
    const auto c = solve_unique(k, m, g);
    for (std::size_t i : {std::size_t(0), std::size_t(1000)}) {
      const double exact = std::exp(k.script_l(c.v[i]));
      const auto e = mc_objective(c, m, dist, c.t[i], sim);
      const double z = (e.value - exact) / e.stderr_;
      worst = std::max(worst, std::abs(z));
      ok = ok && std::abs(z) <= 3.0;
    }
  }
  const double s = seconds_since(t0);
  return {ok && s < 60.0, fmt("8 estimates, worst |MC - exact| = %.2f stderr, %.2f s", worst, s)};
}

Outcome certificate() {
  const auto m = MarketModel::constant(0.4, 0.2, 20.0);
  const TimeGrid g = TimeGrid::uniform(m, 2000);
  double worst = -INFINITY;
  bool ok = true;
  StrategyCurve poisson_curve;
  for (const Dist& d : {Dist::poisson(2.0), Dist::gamma(2.0, 0.5)}) {
    const auto c = solve_unique(PreferenceKernel(d), m, g);
    if (d == Dist::poisson(2.0)) poisson_curve = c;
    const auto cert = equilibrium_certificate(c, m, d);
    ok = ok && cert.pass;
    worst = std::max(worst, cert.worst_slope);
  }
  const auto ms = MarketModel::constant(1.0, 1.0, 1.0);
  const PreferenceKernel ks(Dist::stable(0.8));
  for (double T0 : {0.25, 0.5, 1.0}) {
    const auto c = solve_family_member(ks, ms, T0, TimeGrid::uniform(ms, 2000));
    const auto cert = equilibrium_certificate(c, ms, ks.dist());
    ok = ok && cert.pass;
    worst = std::max(worst, cert.worst_slope);
  }
  const auto big = scale_exposure(poisson_curve, m, Dist::poisson(2.0), 1.05);
  const auto bad = equilibrium_certificate(big, m, Dist::poisson(2.0));
  return {ok && !bad.pass && bad.worst_slope > 0.0,
          fmt("worst scaled slope over 5 equilibria %.3e; 5%%-inflated curve %.3e at t=%.3f",
              worst, bad.worst_slope, bad.worst.t)};
}

Outcome convergence() {
  const auto m = MarketModel::constant(0.4, 0.2, 5.0);
  const Dist limit = Dist::gamma(2.0, 0.5);
  std::vector<Dist> seq;
  for (int n : {4, 8, 16, 32}) seq.push_back(quantile_discretization(limit, n));
  const auto tr = kernel_sequence_convergence(seq, limit, m, TimeGrid::uniform(m, 2000));
  std::string d = "sup errors:";
  for (double e : tr.sup_error) d += fmt(" %.3e", e);
  return {tr.decreasing && tr.sup_error.back() < 1e-3, d};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"Merton oracle", merton},
      {"Poisson closed form",
       [] {
         return closed_form(Dist::poisson(2.0),
                            [](double L) { return 0.4 / std::sqrt(4.0 - L); });
       }},
      {"Gamma closed form",
       [] {
         return closed_form(Dist::gamma(2.0, 0.5),
                            [](double L) { return 0.4 / (1.0 - L / 4.0); });
       }},
      {"stable family", stable_family},
      {"stable trivial regime", stable_trivial},
      {"two-point crossing figure", figure1},
      {"rh-order monotonicity sweep", rh_sweep},
      {"crossing sensitivity", sensitivity},
      {"mixture reversal figure", figure2},
      {"sample-mean aggregation", aggregation},
      {"Monte Carlo cross-validation", monte_carlo},
      {"equilibrium certificate", certificate},
      {"distributional convergence", convergence},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("criterion %2zu %-30s %s  %s\n", i + 1, criteria[i].first,
                o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
