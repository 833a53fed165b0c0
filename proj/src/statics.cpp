#include "eqport/statics.hpp"

#include <algorithm>
#include <cmath>

#include "eqport/errors.hpp"
#include "parallel.hpp"

namespace eqport {

TwoPointLaw TwoPointLaw::from(const RiskAversionDistribution& d) {
  const auto* f = d.as<FiniteDiscrete>();
  if (!f || f->points.size() != 2)
    throw PreconditionError("a two-point law needs exactly two atoms");
  return {f->points[0], f->points[1] - f->points[0], f->probs[0]};
}

RiskAversionDistribution TwoPointLaw::dist() const {
  return RiskAversionDistribution::discrete({r0, r0 + delta}, {p, 1.0 - p});
}

double TwoPointLaw::q(double x) const {
  const double e = std::exp(-0.5 * delta * x);
  return delta * (1.0 - p) * e / (p + (1.0 - p) * e);
}

ComparisonReport compare_pointwise(const PreferenceKernel& k1,
                                   const PreferenceKernel& k2,
                                   const MarketModel& market,
                                   const TimeGrid& grid) {
  const StrategyCurve c1 = solve_equilibrium(k1, market, grid);
  const StrategyCurve c2 = solve_equilibrium(k2, market, grid);
  ComparisonReport r;
  r.rh = rhr_dominates(k1.dist(), k2.dist());
  r.fsd = fsd_dominates(k1.dist(), k2.dist());
  r.t = grid.t;
  auto at = [](const StrategyCurve& c, double t) {
    const auto it = std::lower_bound(c.t.begin(), c.t.end(), t);
    return c.a[static_cast<std::size_t>(it - c.t.begin())].norm();
  };
  for (double t : grid.t) {
    const double a1 = at(c1, t), a2 = at(c2, t);
    r.abs_a1.push_back(a1);
    r.abs_a2.push_back(a2);
    const double d = a1 - a2;
    r.profile.push_back(d > r.tie_tol ? 1 : d < -r.tie_tol ? -1 : 0);
    if (d > r.tie_tol) ++r.violations;
  }
  int last = 0;
  std::size_t last_i = 0;
  for (std::size_t i = 0; i < r.profile.size(); ++i) {
    if (r.profile[i] == 0) continue;
    if (last != 0 && r.profile[i] != last)
      r.crossing_cells.emplace_back(r.t[last_i], r.t[i]);
    last = r.profile[i];
    last_i = i;
  }
  return r;
}

CrossingReport find_crossing(const TwoPointLaw& l1, const TwoPointLaw& l2,
                             const MarketModel& market, const NumericConfig& cfg,
                             std::size_t scan_points) {
  if (!(l1.r0 > 0.0) || std::abs(l1.r0 - l2.r0) > 1e-12 * l1.r0)
    throw PreconditionError("crossing needs a common essential infimum r0 > 0");
  if (!(l2.delta > 0.0) || !(l1.delta > l2.delta))
    throw PreconditionError("crossing needs delta1 > delta2 > 0");
  if (!(l1.mean() > l2.mean()))
    throw PreconditionError("crossing needs mean1 > mean2");
  for (const auto& s : market.segments())
    if (s.lambda.squaredNorm() == 0.0)
      throw PreconditionError("crossing needs lambda(t) != 0 on [0, T)");

  const PreferenceKernel k1(l1.dist(), cfg), k2(l2.dist(), cfg);
  auto big_d = [&](double t) {
    const double L = market.lambda_accum(t);
    return l1.q(k1.big_h_inverse(L)) - l2.q(k2.big_h_inverse(L));
  };
  const double T = market.horizon();
  CrossingReport r;
  r.d_at_0 = big_d(0.0);
  r.d_at_T = big_d(T);
  int prev = 0;
  for (std::size_t i = 0; i <= scan_points; ++i) {
    const double d = big_d(T * double(i) / double(scan_points));
    const int s = d > 0.0 ? 1 : d < 0.0 ? -1 : 0;
    if (s != 0 && prev != 0 && s != prev) ++r.grid_sign_changes;
    if (s != 0) prev = s;
  }
  if (!(r.d_at_0 < 0.0)) {
    r.note = "no crossing: |a1(0)| <= |a2(0)|, horizon below the reversal horizon";
    return r;
  }
  double lo = 0.0, hi = T;
  while (hi - lo > cfg.crossing_time_tol) {
    const double mid = 0.5 * (lo + hi);
    if (big_d(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  r.found = true;
  r.t_star = 0.5 * (lo + hi);
  const double q = l1.q(k1.big_h_inverse(market.lambda_accum(r.t_star)));
  const double lam2 = market.lambda_sq(r.t_star);
  r.d_prime = lam2 * q * (l1.delta - l2.delta) /
              (2.0 * (l1.r0 + q) * (l1.r0 + q));
  return r;
}

ReversalOutcome reversal_horizon(const PreferenceKernel& k1,
                                 const PreferenceKernel& k2,
                                 const MarketModel& market,
                                 const NumericConfig& cfg) {
  auto diff = [&](double T) {
    const MarketModel m = market.with_horizon(T);
    const double L = m.total_opportunity();
    return k1.h(k1.big_h_inverse(L)) - k2.h(k2.big_h_inverse(L));
  };
  ReversalOutcome o;
  o.t_max = cfg.reversal_t_max;
  // A reversal is a move from |a1(0)| <= |a2(0)| to |a1(0)| > |a2(0)| as T
  // grows; horizons before the first "<=" are not reversals.
  double lo = -1.0;
  double hi = -1.0;
  for (double T = cfg.reversal_t_start; T <= cfg.reversal_t_max; T *= 2.0) {
    if (diff(T) > 0.0) {
      if (lo >= 0.0) {
        hi = T;
        break;
      }
    } else {
      lo = T;
    }
  }
  if (hi < 0.0) return o;
  while (hi - lo > cfg.reversal_rel_width * hi) {
    const double mid = 0.5 * (lo + hi);
    if (diff(mid) > 0.0) hi = mid;
    else lo = mid;
  }
  o.found = true;
  o.lo = lo;
  o.hi = hi;
  return o;
}

const char* to_string(SweepParameter s) {
  switch (s) {
    case SweepParameter::both_p: return "both_p";
    case SweepParameter::p1: return "p1";
    case SweepParameter::p2: return "p2";
  }
  return "?";
}

SensitivityTrace crossing_sensitivity(const TwoPointLaw& l1, const TwoPointLaw& l2,
                                      const MarketModel& market,
                                      SweepParameter which,
                                      const std::vector<double>& grid,
                                      const NumericConfig& cfg, bool parallel) {
  SensitivityTrace tr;
  tr.which = which;
  tr.p = grid;
  tr.expected_increasing = which != SweepParameter::p2;
  tr.t_star.assign(grid.size(), 0.0);
  std::vector<char> found(grid.size(), 0);
  detail::for_each_index(grid.size(), parallel, [&](std::size_t i) {
    TwoPointLaw a = l1, b = l2;
    if (which != SweepParameter::p2) a.p = grid[i];
    if (which != SweepParameter::p1) b.p = grid[i];
    const auto r = find_crossing(a, b, market, cfg);
    found[i] = r.found;
    tr.t_star[i] = r.t_star;
  });
  tr.found.assign(found.begin(), found.end());
  tr.monotone = std::all_of(tr.found.begin(), tr.found.end(), [](bool f) { return f; });
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const bool ok = tr.expected_increasing ? tr.t_star[i] > tr.t_star[i - 1]
                                           : tr.t_star[i] < tr.t_star[i - 1];
    tr.monotone = tr.monotone && ok;
  }
  return tr;
}

CombinationReport convex_combination_compare(
    const std::vector<RiskAversionDistribution>& components,
    const std::vector<double>& weights, const MarketModel& market,
    const TimeGrid& grid, const NumericConfig& cfg) {
  for (const auto& c : components)
    if (!c.mean().is_finite())
      throw PreconditionError("convex combination comparison needs finite means");
  const auto mix = RiskAversionDistribution::combination(weights, components);
  std::vector<StrategyCurve> curves(components.size() + 1);
  detail::for_each_index(curves.size(), true, [&](std::size_t i) {
    const PreferenceKernel k(i == 0 ? mix : components[i - 1], cfg);
    curves[i] = solve_equilibrium(k, market, grid);
  });
  CombinationReport r;
  r.t = grid.t;
  r.abs_components.assign(components.size(), {});
  r.iid_equal_weights = true;
  for (std::size_t i = 1; i < components.size(); ++i)
    r.iid_equal_weights = r.iid_equal_weights && components[i] == components[0] &&
                          weights[i] == weights[0];
  const double tol = 1e-10;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double am = curves[0].a[j].norm();
    r.abs_mix.push_back(am);
    double best = 0.0;
    for (std::size_t i = 0; i < components.size(); ++i) {
      const double ai = curves[i + 1].a[j].norm();
      r.abs_components[i].push_back(ai);
      best = std::max(best, ai);
    }
    const bool above = am > best + tol;
    r.above_all.push_back(above);
    r.above_count += above;
    r.above_first += am > r.abs_components[0].back() + tol;
  }
  return r;
}

AggregationTrace sample_mean_aggregation(const RiskAversionDistribution& base,
                                         const std::vector<int>& ns,
                                         const MarketModel& market,
                                         const TimeGrid& grid,
                                         const NumericConfig& cfg) {
  if (!base.mean().is_finite() || !(base.mean().value > 0.0))
    throw PreconditionError("sample-mean aggregation needs a finite positive mean");
  AggregationTrace tr;
  tr.n = ns;
  tr.t = grid.t;
  tr.exposure.assign(ns.size(), {});
  detail::for_each_index(ns.size(), true, [&](std::size_t k) {
    const PreferenceKernel kn(RiskAversionDistribution::sample_mean(base, ns[k]), cfg);
    const StrategyCurve c = solve_equilibrium(kn, market, grid);
    std::vector<double> e;
    for (const auto& a : c.a) e.push_back(a.norm());
    tr.exposure[k] = std::move(e);
  });
  tr.monotone = true;
  for (std::size_t k = 1; k < ns.size(); ++k)
    for (std::size_t j = 0; j < grid.size(); ++j)
      tr.monotone = tr.monotone &&
                    tr.exposure[k][j] <= tr.exposure[k - 1][j] * (1.0 + 1e-12);
  const double mu = base.mean().value;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double lam = market.lambda(grid.t[j]).norm();
    if (lam == 0.0 || ns.empty()) continue;
    tr.limit_rel_deviation = std::max(
        tr.limit_rel_deviation, std::abs(tr.exposure.back()[j] * mu / lam - 1.0));
  }
  return tr;
}

}  // namespace eqport
