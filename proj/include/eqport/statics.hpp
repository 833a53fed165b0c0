#pragma once

#include <string>
#include <utility>
#include <vector>

#include "eqport/equilibrium.hpp"

namespace eqport {

/// Mass p at r0 and 1 - p at r0 + delta.
struct TwoPointLaw {
  double r0;
  double delta;
  double p;

  static TwoPointLaw from(const RiskAversionDistribution& d);
  RiskAversionDistribution dist() const;
  double mean() const { return r0 + delta * (1.0 - p); }
  /// 1/h(x) - r0 for this law.
  double q(double x) const;
};

struct ComparisonReport {
  std::vector<double> t;
  std::vector<double> abs_a1;
  std::vector<double> abs_a2;
  OrderVerdict rh;
  OrderVerdict fsd;
  // Sign of |a1| - |a2| per grid point (0 within `tie_tol`).
  std::vector<int> profile;
  // Grid cells [t_i, t_i+1] across which the sign of |a1| - |a2| flips.
  std::vector<std::pair<double, double>> crossing_cells;
  // Points with |a1| > |a2| + tie_tol.
  std::size_t violations = 0;
  double tie_tol = 1e-10;
};

/// Both laws are solved on the same grid (unique curve, or optimal member
/// under infinite mean).
ComparisonReport compare_pointwise(const PreferenceKernel& k1,
                                   const PreferenceKernel& k2,
                                   const MarketModel& market,
                                   const TimeGrid& grid);

struct CrossingReport {
  bool found = false;
  double t_star = 0.0;
  double d_at_0 = 0.0;  // Q1(v1(0)) - Q2(v2(0))
  double d_at_T = 0.0;
  double d_prime = 0.0;  // closed-form slope of D at t*
  int grid_sign_changes = 0;
  std::string note;
};

/// Bisects the sign change of D(t) = Q1(v1(t)) - Q2(v2(t)). Throws
/// PreconditionError when the two-point conditions fail; reports
/// found = false when |a1(0)| <= |a2(0)|.
CrossingReport find_crossing(const TwoPointLaw& l1, const TwoPointLaw& l2,
                             const MarketModel& market,
                             const NumericConfig& cfg = default_config(),
                             std::size_t scan_points = 2000);

struct ReversalOutcome {
  bool found = false;
  double lo = 0.0;  // |a1(0)| <= |a2(0)| at horizon lo
  double hi = 0.0;  // |a1(0)| > |a2(0)| at horizon hi
  double t_max = 0.0;
};

/// Smallest horizon with |a1(0,T)| > |a2(0,T)|, bracketed to
/// reversal_rel_width * T. The market is extended or truncated by
/// MarketModel::with_horizon.
ReversalOutcome reversal_horizon(const PreferenceKernel& k1,
                                 const PreferenceKernel& k2,
                                 const MarketModel& market,
                                 const NumericConfig& cfg = default_config());

enum class SweepParameter { both_p, p1, p2 };
const char* to_string(SweepParameter s);

struct SensitivityTrace {
  SweepParameter which;
  std::vector<double> p;
  std::vector<double> t_star;
  std::vector<bool> found;
  bool expected_increasing = true;
  bool monotone = false;
};

/// t*(p) over the grid; p1/p2 stay at the base values unless swept. Grid
/// values run in parallel unless `parallel` is false.
SensitivityTrace crossing_sensitivity(const TwoPointLaw& l1, const TwoPointLaw& l2,
                                      const MarketModel& market,
                                      SweepParameter which,
                                      const std::vector<double>& grid,
                                      const NumericConfig& cfg = default_config(),
                                      bool parallel = true);

struct CombinationReport {
  std::vector<double> t;
  std::vector<double> abs_mix;
  std::vector<std::vector<double>> abs_components;
  // Points where |a_mix| > max_i |a_i| (beyond tie tolerance).
  std::vector<bool> above_all;
  std::size_t above_count = 0;
  // Points where |a_mix| > |a_1| (beyond tie tolerance).
  std::size_t above_first = 0;
  bool iid_equal_weights = false;
};

CombinationReport convex_combination_compare(
    const std::vector<RiskAversionDistribution>& components,
    const std::vector<double>& weights, const MarketModel& market,
    const TimeGrid& grid, const NumericConfig& cfg = default_config());

struct AggregationTrace {
  std::vector<int> n;
  std::vector<double> t;
  std::vector<std::vector<double>> exposure;  // [n index][grid index]
  bool monotone = false;                      // nonincreasing in n everywhere
  double limit_rel_deviation = 0.0;  // max_t | |a_nmax| mu / |lambda| - 1 |
};

AggregationTrace sample_mean_aggregation(const RiskAversionDistribution& base,
                                         const std::vector<int>& ns,
                                         const MarketModel& market,
                                         const TimeGrid& grid,
                                         const NumericConfig& cfg = default_config());

}  // namespace eqport
