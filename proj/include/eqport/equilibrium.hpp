#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eqport/kernel.hpp"
#include "eqport/market.hpp"

namespace eqport {

/// Sorted reporting times on [0, T].
struct TimeGrid {
  std::vector<double> t;

  /// N uniform intervals merged with the market breakpoints and `extra`.
  static TimeGrid uniform(const MarketModel& market, std::size_t intervals,
                          const std::vector<double>& extra = {});
  std::size_t size() const { return t.size(); }
};

struct StrategyCurve {
  int dimension = 1;
  std::vector<double> t;
  std::vector<double> v;   // int_t^T |a|^2
  std::vector<double> y;   // int_t^T a.lambda
  std::vector<double> j0;  // objective J0(t)
  std::vector<Eigen::VectorXd> a;
  std::vector<Eigen::VectorXd> pi;
  // Family index when the curve is a member of the infinite-mean family.
  std::optional<double> family_t0;

  std::size_t size() const { return t.size(); }
  double exposure_norm(std::size_t i) const { return a[i].norm(); }
  /// max_i |a_i - h(v_i) lambda(t_i)|
  double fixed_point_residual(const PreferenceKernel& kernel,
                              const MarketModel& market) const;
};

enum class Regime {
  unique_finite,
  family_infinite,
  trivial_only,
  nonexistent_deterministic,
  undetermined
};
const char* to_string(Regime r);

/// Level set generating the family: [0, Lambda(0)] intersected with
/// (Lambda(0) - H(inf), Lambda(0)].
struct EtaInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = false;

  bool contains(double eta) const {
    return eta <= hi && (lo_open ? eta > lo : eta >= lo);
  }
};

struct EquilibriumReport {
  Regime regime = Regime::undetermined;
  HInfinity h_infinity;
  HZero h_zero;
  double lambda0 = 0.0;
  MeanInfo mean;
  std::optional<EtaInterval> eta_set;  // family regime only
  std::string reason;
};

EquilibriumReport classify(const PreferenceKernel& kernel,
                           const MarketModel& market);

/// v = H^-1(Lambda(t)) on the grid. Grid fill runs in parallel.
StrategyCurve solve_unique(const PreferenceKernel& kernel,
                           const MarketModel& market, const TimeGrid& grid);
/// Single-threaded reference for solve_unique; identical output.
StrategyCurve solve_unique_serial(const PreferenceKernel& kernel,
                                  const MarketModel& market,
                                  const TimeGrid& grid);

/// Checks T0 against the family index set; throws MembershipError on failure.
void check_membership(const PreferenceKernel& kernel, const MarketModel& market,
                      double t0);
/// v = H^-1(Lambda(t) - Lambda(T0)) before T0 and 0 after. T0 is added to the
/// grid.
StrategyCurve solve_family_member(const PreferenceKernel& kernel,
                                  const MarketModel& market, double t0,
                                  const TimeGrid& grid);

struct FamilyMember {
  double eta;
  double t0;
  StrategyCurve curve;
};
/// Members for `points` levels spread over the admissible interval, sorted by
/// T0. Members are built in parallel.
std::vector<FamilyMember> enumerate_family(const PreferenceKernel& kernel,
                                           const MarketModel& market,
                                           const TimeGrid& grid,
                                           std::size_t points);

struct OptimalOutcome {
  bool exists = false;
  double t0 = 0.0;
  StrategyCurve curve;
  bool optimal = false;
  bool uniformly_optimal = false;
  bool uniformly_strictly_optimal = false;
  EtaInterval eta_set;
};
OptimalOutcome optimal_equilibrium(const PreferenceKernel& kernel,
                                   const MarketModel& market,
                                   const TimeGrid& grid);

/// Curve for any solvable regime: the unique curve, the optimal family member,
/// or the zero strategy. Throws RegimeMismatch otherwise.
StrategyCurve solve_equilibrium(const PreferenceKernel& kernel,
                                const MarketModel& market, const TimeGrid& grid);

struct ObjectiveValue {
  double value;   // exp(script_L(v))
  double check;   // 1 / l(v/2)
};
/// Throws NumericError when the two evaluations differ by more than `tol`
/// relative.
ObjectiveValue objective_at(const PreferenceKernel& kernel, double v,
                            double tol = 1e-8);
ObjectiveValue objective_at(const PreferenceKernel& kernel,
                            const StrategyCurve& curve, std::size_t index,
                            double tol = 1e-8);

struct AsymptoticsReport {
  std::vector<double> levels;
  std::vector<double> exposure;  // |a_n(0)|
  bool increasing_levels = false;
  bool monotone = false;
  double predicted_limit = 0.0;  // may be +infinity
};
/// a_n(0) = h(H^-1(Lambda_n)) lambda0 for a monotone level sequence.
AsymptoticsReport exposure_asymptotics(const PreferenceKernel& kernel,
                                       const Eigen::VectorXd& lambda0,
                                       const std::vector<double>& levels);

struct ConvergenceTrace {
  std::vector<double> sup_error;
  bool decreasing = false;
};
ConvergenceTrace kernel_sequence_convergence(
    const std::vector<RiskAversionDistribution>& sequence,
    const RiskAversionDistribution& limit, const MarketModel& market,
    const TimeGrid& grid, const NumericConfig& cfg = default_config());

}  // namespace eqport
