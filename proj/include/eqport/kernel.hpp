#pragma once

#include <memory>
#include <optional>
#include <string>

#include "eqport/config.hpp"
#include "eqport/quadrature.hpp"
#include "eqport/riskdist.hpp"

namespace eqport {

struct HInfinity {
  enum class Kind { finite, infinite, unresolved };
  Kind kind = Kind::unresolved;
  // Finite limit, or the lower bound accumulated up to y_max when unresolved.
  double value = 0.0;

  bool is_finite() const { return kind == Kind::finite; }
  bool is_infinite() const { return kind == Kind::infinite; }
  bool is_unresolved() const { return kind == Kind::unresolved; }
};

struct HZero {
  enum class Regime { regular, integrable_singularity, nonintegrable_singularity };
  Regime regime = Regime::regular;
  // Local exponent p of h(x) ~ c x^p near 0, when fitted.
  double exponent = 0.0;
  double fit_residual = 0.0;
  // True when the regime came from the exponent fit rather than a closed rule.
  bool approximate = false;
};

const char* to_string(HInfinity::Kind k);
const char* to_string(HZero::Regime r);

/// h(x) = l(x/2) / E[R exp(-R x/2)] and the quantities built from it.
class PreferenceKernel {
 public:
  enum class Form { closed, transform };

  explicit PreferenceKernel(RiskAversionDistribution dist,
                            const NumericConfig& cfg = default_config());

  const RiskAversionDistribution& dist() const { return *dist_; }
  const NumericConfig& config() const { return cfg_; }
  Form form() const { return form_; }

  double h(double x) const;
  /// Literal ratio laplace(x/2) / weighted_moment(x/2) for every family.
  double h_transform(double x) const;
  /// int_0^y h^-2; +infinity for y > 0 under a non-integrable singularity.
  double big_h(double y) const;
  /// Throws NoSolution when z >= H(inf).
  double big_h_inverse(double z) const;
  /// int_0^z 1/h.
  double integral_inv_h(double z) const;
  /// int_0^z 1/h + log l(z/2).
  double script_l(double z) const;

  const HInfinity& h_infinity() const { return h_inf_; }
  const HZero& h_zero() const { return h_zero_; }

 private:
  enum class Closed { none, point, poisson, gamma, stable, sample_mean };

  void build_tables();
  double table_eval(const quad::CumulativeIntegral& t, double y) const;
  double table_inverse(const quad::CumulativeIntegral& t, double z) const;

  std::shared_ptr<const RiskAversionDistribution> dist_;
  NumericConfig cfg_;
  Form form_ = Form::transform;
  Closed closed_ = Closed::none;
  std::shared_ptr<const PreferenceKernel> base_;  // sample mean
  int n_ = 1;
  std::shared_ptr<const quad::CumulativeIntegral> h_table_;
  std::shared_ptr<const quad::CumulativeIntegral> inv_h_table_;
  HInfinity h_inf_;
  HZero h_zero_;
};

}  // namespace eqport
