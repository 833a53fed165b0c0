#include "eqport/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eqport/errors.hpp"
#include "parallel.hpp"

namespace eqport {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class VFun>
StrategyCurve fill_curve(const PreferenceKernel& kernel, const MarketModel& market,
                         const std::vector<double>& times, VFun&& vfun,
                         bool parallel) {
  StrategyCurve c;
  const std::size_t n = times.size();
  c.dimension = market.dimension();
  c.t = times;
  c.v.assign(n, 0.0);
  c.y.assign(n, 0.0);
  c.j0.assign(n, 1.0);
  c.a.assign(n, Eigen::VectorXd::Zero(c.dimension));
  c.pi.assign(n, Eigen::VectorXd::Zero(c.dimension));
  detail::for_each_index(n, parallel, [&](std::size_t i) {
    const double t = times[i];
    const double v = vfun(t);
    c.v[i] = v;
    c.a[i] = kernel.h(v) * market.lambda(t);
    c.pi[i] = market.portfolio_from_exposure(t, c.a[i]);
    if (v > 0.0) {
      c.y[i] = kernel.integral_inv_h(v);
      c.j0[i] = std::exp(kernel.script_l(v));
    }
  });
  return c;
}

StrategyCurve unique_impl(const PreferenceKernel& kernel,
                          const MarketModel& market, const TimeGrid& grid,
                          bool parallel) {
  const auto rep = classify(kernel, market);
  if (rep.regime != Regime::unique_finite)
    throw RegimeMismatch(std::string("unique solve needs the unique_finite regime, got ") +
                         to_string(rep.regime));
  return fill_curve(
      kernel, market, grid.t,
      [&](double t) { return kernel.big_h_inverse(market.lambda_accum(t)); },
      parallel);
}

EtaInterval eta_interval(double lambda0, const HInfinity& hinf) {
  EtaInterval e;
  e.hi = lambda0;
  if (hinf.is_infinite()) return e;
  const double cut = lambda0 - hinf.value;
  if (cut >= 0.0) {
    e.lo = cut;
    e.lo_open = true;
  }
  return e;
}

}  // namespace

TimeGrid TimeGrid::uniform(const MarketModel& market, std::size_t intervals,
                           const std::vector<double>& extra) {
  if (intervals < 1) throw DomainError("time grid needs at least one interval");
  const double T = market.horizon();
  std::vector<double> t;
  t.reserve(intervals + 1 + extra.size() + market.segments().size());
  for (std::size_t i = 0; i <= intervals; ++i)
    t.push_back(i == intervals ? T : T * double(i) / double(intervals));
  for (double b : market.breakpoints()) t.push_back(b);
  for (double e : extra) {
    if (!(e >= 0.0 && e <= T)) throw DomainError("extra grid time outside [0, T]");
    t.push_back(e);
  }
  std::sort(t.begin(), t.end());
  // Merge near-duplicates, keeping exact breakpoints and extras when present.
  std::vector<double> out;
  const double eps = 1e-12 * T;
  for (double x : t) {
    if (!out.empty() && x - out.back() <= eps) {
      out.back() = x;  // later entries of a cluster are the exact ones
      continue;
    }
    out.push_back(x);
  }
  out.front() = 0.0;
  out.back() = T;
  return TimeGrid{std::move(out)};
}

double StrategyCurve::fixed_point_residual(const PreferenceKernel& kernel,
                                           const MarketModel& market) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    worst = std::max(worst, (a[i] - kernel.h(v[i]) * market.lambda(t[i])).norm());
  }
  return worst;
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::unique_finite: return "unique_finite";
    case Regime::family_infinite: return "family_infinite";
    case Regime::trivial_only: return "trivial_only";
    case Regime::nonexistent_deterministic: return "nonexistent_deterministic";
    case Regime::undetermined: return "undetermined";
  }
  return "?";
}

EquilibriumReport classify(const PreferenceKernel& kernel,
                           const MarketModel& market) {
  EquilibriumReport r;
  r.h_infinity = kernel.h_infinity();
  r.h_zero = kernel.h_zero();
  r.lambda0 = market.total_opportunity();
  r.mean = kernel.dist().mean();
  const auto& hi = r.h_infinity;

  if (r.mean.is_finite()) {
    if (hi.is_infinite() || (hi.is_finite() && hi.value > r.lambda0) ||
        (hi.is_unresolved() && hi.value > r.lambda0)) {
      r.regime = Regime::unique_finite;
    } else if (hi.is_finite()) {
      r.regime = Regime::nonexistent_deterministic;
      r.reason = "H(inf) <= Lambda(0)";
    } else {
      r.regime = Regime::undetermined;
      r.reason = "H(inf) unresolved; tabulated lower bound " +
                 std::to_string(hi.value) + " does not exceed Lambda(0)";
    }
    return r;
  }
  if (r.mean.is_infinite()) {
    if (r.h_zero.regime == HZero::Regime::nonintegrable_singularity) {
      r.regime = Regime::trivial_only;
      return r;
    }
    if (hi.is_unresolved() && hi.value < r.lambda0) {
      r.regime = Regime::undetermined;
      r.reason = "H(inf) unresolved; the admissible level set depends on it";
      return r;
    }
    r.regime = Regime::family_infinite;
    HInfinity eff = hi;
    if (hi.is_unresolved()) eff = {HInfinity::Kind::infinite, kInf};
    r.eta_set = eta_interval(r.lambda0, eff);
    return r;
  }
  r.regime = Regime::undetermined;
  r.reason = "mean of R is not known";
  return r;
}

StrategyCurve solve_unique(const PreferenceKernel& kernel,
                           const MarketModel& market, const TimeGrid& grid) {
  return unique_impl(kernel, market, grid, true);
}

StrategyCurve solve_unique_serial(const PreferenceKernel& kernel,
                                  const MarketModel& market,
                                  const TimeGrid& grid) {
  return unique_impl(kernel, market, grid, false);
}

void check_membership(const PreferenceKernel& kernel, const MarketModel& market,
                      double t0) {
  const auto rep = classify(kernel, market);
  if (rep.regime != Regime::family_infinite)
    throw RegimeMismatch(std::string("family members need the family_infinite regime, got ") +
                         to_string(rep.regime));
  const double T = market.horizon();
  if (!(t0 >= 0.0 && t0 <= T))
    throw MembershipError("T0 = " + std::to_string(t0) + " is outside [0, T]");
  if (t0 > 0.0) {
    // Lambda(t) > Lambda(T0) on [0, T0) iff lambda is nonzero just before T0.
    const auto& segs = market.segments();
    std::size_t i = 0;
    while (i + 1 < segs.size() && segs[i + 1].t_start < t0) ++i;
    if (segs[i].lambda.squaredNorm() == 0.0)
      throw MembershipError("Lambda(t) > Lambda(T0) fails on [0, T0): lambda "
                            "vanishes just before T0 = " + std::to_string(t0));
  }
  const double need = rep.lambda0 - market.lambda_accum(t0);
  if (rep.h_infinity.is_finite() && !(rep.h_infinity.value > need))
    throw MembershipError("H(inf) > Lambda(0) - Lambda(T0) fails for T0 = " +
                          std::to_string(t0));
}

StrategyCurve solve_family_member(const PreferenceKernel& kernel,
                                  const MarketModel& market, double t0,
                                  const TimeGrid& grid) {
  check_membership(kernel, market, t0);
  std::vector<double> times = grid.t;
  if (!std::binary_search(times.begin(), times.end(), t0)) {
    times.insert(std::upper_bound(times.begin(), times.end(), t0), t0);
  }
  const double base = market.lambda_accum(t0);
  auto c = fill_curve(
      kernel, market, times,
      [&](double t) {
        if (t >= t0) return 0.0;
        return kernel.big_h_inverse(market.lambda_accum(t) - base);
      },
      true);
  c.family_t0 = t0;
  return c;
}

std::vector<FamilyMember> enumerate_family(const PreferenceKernel& kernel,
                                           const MarketModel& market,
                                           const TimeGrid& grid,
                                           std::size_t points) {
  const auto rep = classify(kernel, market);
  if (rep.regime != Regime::family_infinite)
    throw RegimeMismatch(std::string("enumeration needs the family_infinite regime, got ") +
                         to_string(rep.regime));
  if (points < 1) throw DomainError("enumeration needs at least one level");
  const EtaInterval e = *rep.eta_set;
  std::vector<double> etas;
  if (points == 1) {
    etas.push_back(e.hi);
  } else if (e.lo_open) {
    for (std::size_t k = 1; k <= points; ++k)
      etas.push_back(e.lo + (e.hi - e.lo) * double(k) / double(points));
  } else {
    for (std::size_t k = 0; k < points; ++k)
      etas.push_back(e.lo + (e.hi - e.lo) * double(k) / double(points - 1));
  }
  std::vector<FamilyMember> out(etas.size());
  detail::for_each_index(etas.size(), true, [&](std::size_t k) {
    const double t0 = market.phi(etas[k]);
    out[k] = {etas[k], t0, solve_family_member(kernel, market, t0, grid)};
  });
  std::sort(out.begin(), out.end(),
            [](const FamilyMember& x, const FamilyMember& y) { return x.t0 < y.t0; });
  return out;
}

OptimalOutcome optimal_equilibrium(const PreferenceKernel& kernel,
                                   const MarketModel& market,
                                   const TimeGrid& grid) {
  const auto rep = classify(kernel, market);
  if (rep.regime != Regime::family_infinite)
    throw RegimeMismatch(std::string("optimal selection needs the family_infinite regime, got ") +
                         to_string(rep.regime));
  OptimalOutcome o;
  o.eta_set = *rep.eta_set;
  if (!o.eta_set.contains(0.0)) return o;
  o.exists = true;
  o.t0 = market.phi(0.0);
  o.curve = solve_family_member(kernel, market, o.t0, grid);
  o.optimal = true;
  o.uniformly_optimal = true;
  o.uniformly_strictly_optimal = o.t0 == market.horizon();
  return o;
}

StrategyCurve solve_equilibrium(const PreferenceKernel& kernel,
                                const MarketModel& market, const TimeGrid& grid) {
  const auto rep = classify(kernel, market);
  switch (rep.regime) {
    case Regime::unique_finite: return solve_unique(kernel, market, grid);
    case Regime::family_infinite: {
      auto o = optimal_equilibrium(kernel, market, grid);
      if (!o.exists)
        throw RegimeMismatch("no optimal member: 0 is not an admissible level");
      return o.curve;
    }
    case Regime::trivial_only:
      return fill_curve(kernel, market, grid.t, [](double) { return 0.0; }, false);
    default:
      throw RegimeMismatch(std::string("no deterministic equilibrium to solve: ") +
                           to_string(rep.regime) +
                           (rep.reason.empty() ? "" : " (" + rep.reason + ")"));
  }
}

ObjectiveValue objective_at(const PreferenceKernel& kernel, double v,
                            double tol) {
  if (v < 0.0) throw DomainError("objective needs v >= 0");
  if (v == 0.0) return {1.0, 1.0};
  const ObjectiveValue o{std::exp(kernel.script_l(v)),
                         std::exp(-kernel.dist().log_laplace(0.5 * v))};
  if (std::abs(o.value - o.check) > tol * o.check)
    throw NumericError("objective cross-check failed: " + std::to_string(o.value) +
                       " vs " + std::to_string(o.check));
  return o;
}

ObjectiveValue objective_at(const PreferenceKernel& kernel,
                            const StrategyCurve& curve, std::size_t index,
                            double tol) {
  if (index >= curve.size()) throw DomainError("objective index out of range");
  return objective_at(kernel, curve.v[index], tol);
}

AsymptoticsReport exposure_asymptotics(const PreferenceKernel& kernel,
                                       const Eigen::VectorXd& lambda0,
                                       const std::vector<double>& levels) {
  if (levels.size() < 2) throw DomainError("asymptotics need at least two levels");
  AsymptoticsReport r;
  r.levels = levels;
  r.increasing_levels = levels.back() > levels.front();
  for (std::size_t i = 1; i < levels.size(); ++i) {
    const bool up = levels[i] > levels[i - 1];
    if (up != r.increasing_levels || levels[i] == levels[i - 1])
      throw PreconditionError("level sequence must be strictly monotone");
  }
  for (double L : levels)
    r.exposure.push_back(kernel.h(kernel.big_h_inverse(L)) * lambda0.norm());
  r.monotone = true;
  for (std::size_t i = 1; i < r.exposure.size(); ++i) {
    const bool ok = r.increasing_levels ? r.exposure[i] >= r.exposure[i - 1]
                                        : r.exposure[i] <= r.exposure[i - 1];
    r.monotone = r.monotone && ok;
  }
  const auto& d = kernel.dist();
  if (r.increasing_levels) {
    r.predicted_limit = d.essinf() > 0.0 ? lambda0.norm() / d.essinf() : kInf;
  } else {
    r.predicted_limit = d.mean().is_finite() ? lambda0.norm() / d.mean().value : 0.0;
  }
  return r;
}

ConvergenceTrace kernel_sequence_convergence(
    const std::vector<RiskAversionDistribution>& sequence,
    const RiskAversionDistribution& limit, const MarketModel& market,
    const TimeGrid& grid, const NumericConfig& cfg) {
  const PreferenceKernel lk(limit, cfg);
  const StrategyCurve target = solve_equilibrium(lk, market, grid);
  ConvergenceTrace tr;
  tr.sup_error.assign(sequence.size(), 0.0);
  detail::for_each_index(sequence.size(), true, [&](std::size_t n) {
    const PreferenceKernel k(sequence[n], cfg);
    const StrategyCurve c = solve_equilibrium(k, market, grid);
    double sup = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
      // Family members carry an extra node at T0; match by time.
      const auto it = std::lower_bound(c.t.begin(), c.t.end(), target.t[i]);
      const std::size_t j = static_cast<std::size_t>(it - c.t.begin());
      sup = std::max(sup, (c.a[j] - target.a[i]).norm());
    }
    tr.sup_error[n] = sup;
  });
  tr.decreasing = true;
  for (std::size_t i = 1; i < tr.sup_error.size(); ++i)
    tr.decreasing = tr.decreasing && tr.sup_error[i] < tr.sup_error[i - 1];
  return tr;
}

}  // namespace eqport
