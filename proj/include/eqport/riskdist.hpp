#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace eqport {

class RiskAversionDistribution;

struct PointMass {
  double gamma;
};

struct FiniteDiscrete {
  std::vector<double> points;  // sorted ascending on construction
  std::vector<double> probs;
};

struct GammaLaw {
  double shape;
  double scale;
};

struct PoissonLaw {
  double rate;
};

// Positive alpha-stable law with Laplace transform exp(-y^alpha).
struct PositiveStable {
  double index;
};

// R = sum_i w_i R_i with independent components.
struct IndependentCombination {
  std::vector<double> weights;
  std::vector<RiskAversionDistribution> components;
};

// R = (R_1 + ... + R_n) / n with i.i.d. copies of `base`.
struct SampleMean {
  std::shared_ptr<const RiskAversionDistribution> base;
  int n;
};

/// Finite value, +infinity, or not known in closed form.
struct MeanInfo {
  enum class Kind { finite, infinite, unknown };
  Kind kind = Kind::unknown;
  double value = 0.0;  // meaningful only when kind == finite

  bool is_finite() const { return kind == Kind::finite; }
  bool is_infinite() const { return kind == Kind::infinite; }
};

/// Law of the random risk aversion R >= 0. Immutable after construction.
class RiskAversionDistribution {
 public:
  using Kind = std::variant<PointMass, FiniteDiscrete, GammaLaw, PoissonLaw,
                            PositiveStable, IndependentCombination, SampleMean>;

  static RiskAversionDistribution point(double gamma);
  static RiskAversionDistribution discrete(std::vector<double> points,
                                           std::vector<double> probs);
  static RiskAversionDistribution gamma(double shape, double scale);
  static RiskAversionDistribution poisson(double rate);
  static RiskAversionDistribution stable(double index);
  static RiskAversionDistribution combination(
      std::vector<double> weights,
      std::vector<RiskAversionDistribution> components);
  static RiskAversionDistribution sample_mean(RiskAversionDistribution base,
                                              int n);

  const Kind& kind() const { return kind_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&kind_);
  }

  const MeanInfo& mean() const { return mean_; }
  /// Essential infimum r0.
  double essinf() const { return essinf_; }
  /// P(R = r0).
  double mass_at_essinf() const { return mass_at_essinf_; }
  /// First support gap above r0; only stored for FiniteDiscrete with at least
  /// two atoms. Continuous laws report 0.
  std::optional<double> support_gap() const { return support_gap_; }

  /// l(y) = E[exp(-R y)].
  double laplace(double y) const;
  double log_laplace(double y) const;
  /// E[R exp(-R y)] = -l'(y). +infinity at y = 0 when the mean is infinite.
  double weighted_moment(double y) const;
  /// E[R exp(-R y)] / E[exp(-R y)], evaluated without forming either factor
  /// when they would underflow. Equals 1 / h(2y).
  double moment_ratio(double y) const;
  /// moment_ratio(y) - r0, computed without cancellation for atomic laws.
  double excess_ratio(double y) const;

  /// CDF; only PointMass, FiniteDiscrete, GammaLaw and PoissonLaw have one.
  bool has_cdf() const;
  double cdf(double x) const;
  /// Quantile for the laws with a CDF.
  double quantile(double q) const;
  /// Atoms (value, probability) for laws that are purely atomic and finitely
  /// representable; Poisson is truncated where its tail drops below 1e-17.
  bool is_atomic() const;
  std::vector<std::pair<double, double>> atoms() const;

  std::string describe() const;

  friend bool operator==(const RiskAversionDistribution& a,
                         const RiskAversionDistribution& b);

 private:
  explicit RiskAversionDistribution(Kind kind);
  void cache_metadata();

  Kind kind_;
  MeanInfo mean_;
  double essinf_ = 0.0;
  double mass_at_essinf_ = 0.0;
  std::optional<double> support_gap_;
};

/// Verdict of a stochastic-order check.
struct OrderVerdict {
  enum class Status { dominates, fails, inapplicable };
  Status status = Status::inapplicable;
  double fails_at = 0.0;  // first violation point when status == fails
  std::string note;

  bool dominates() const { return status == Status::dominates; }
};

/// d1 >=_rh d2: F2/F1 is decreasing on the union of supports where F1 > 0.
/// Exact at atoms for atomic laws; dense quantile grid for continuous laws.
OrderVerdict rhr_dominates(const RiskAversionDistribution& d1,
                           const RiskAversionDistribution& d2);

/// d1 >=_1 d2: F1 <= F2 pointwise.
OrderVerdict fsd_dominates(const RiskAversionDistribution& d1,
                           const RiskAversionDistribution& d2);

/// n equiprobable bins of a law with a quantile; each atom is the conditional
/// mean within its bin, so the mean is matched exactly. Gamma only.
RiskAversionDistribution quantile_discretization(
    const RiskAversionDistribution& dist, int n);

}  // namespace eqport
