#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace eqport::quad {

struct Estimate {
  double value;
  double error;
};

/// Single 15-point Kronrod rule with embedded 7-point Gauss error estimate.
Estimate gauss_kronrod15(const std::function<double(double)>& f, double a,
                         double b);

/// Adaptive bisection on [a, b] until each panel meets
/// err <= max(rel_tol * |I_panel|, abs_floor).
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, double abs_floor);

/// Running integral F(y) = int_0^y f over an adaptive knot set on [0, upper].
///
/// Knots are placed so that every panel meets the local error target; the
/// cumulative value is stored at each knot and F between knots is completed by
/// a local Kronrod evaluation, so F is accurate to quadrature tolerance
/// everywhere (not only at knots) and is monotone whenever f >= 0.
///
/// When f behaves like c * x^(-s) near 0 with 0 < s < 1, pass s as
/// `singular_exponent`; the first panel is then integrated in u with
/// x = u^(1/(1-s)), which makes the transformed integrand bounded.
class CumulativeIntegral {
 public:
  CumulativeIntegral() = default;
  CumulativeIntegral(std::function<double(double)> f, double upper,
                     double rel_tol, double abs_floor,
                     double singular_exponent = 0.0);

  double operator()(double y) const;
  /// Smallest y with F(y) = z, for 0 <= z <= total(). Requires f > 0 on the
  /// bracketing panel. Safeguarded Newton with f as the derivative.
  double inverse(double z, double abs_tol) const;

  double upper() const { return knots_.empty() ? 0.0 : knots_.back(); }
  double total() const { return cum_.empty() ? 0.0 : cum_.back(); }
  std::size_t knot_count() const { return knots_.size(); }
  const std::vector<double>& knots() const { return knots_; }
  double integrand(double x) const { return f_(x); }

 private:
  double panel_partial(std::size_t i, double y) const;
  void refine(double a, double b, int depth);

  std::function<double(double)> f_;
  double rel_tol_ = 1e-10;
  double abs_floor_ = 1e-14;
  double singular_ = 0.0;
  std::vector<double> knots_;
  std::vector<double> cum_;
};

/// Gauss rule for the gamma density with the given shape and scale:
/// sum_i w_i g(x_i) ~ E[g(X)], X ~ Gamma(shape, scale). Weights sum to 1.
std::vector<std::pair<double, double>> gauss_gamma_rule(double shape,
                                                        double scale,
                                                        int nodes);

}  // namespace eqport::quad
