#pragma once

#include <vector>

#include <Eigen/Dense>

namespace eqport {

/// Deterministic market with piecewise-constant market price of risk lambda(t)
/// and volatility sigma(t) on [0, T]; zero interest rate.
class MarketModel {
 public:
  struct Segment {
    double t_start;
    Eigen::VectorXd lambda;
    Eigen::MatrixXd sigma;
  };

  /// lambda_i = lambda and sigma = sigma * I in every coordinate.
  static MarketModel constant(double lambda, double sigma, double horizon,
                              int dimension = 1);

  /// Segments must start at 0 and be strictly increasing in t_start, all
  /// before `horizon`. Each segment holds until the next one starts.
  MarketModel(std::vector<Segment> segments, double horizon);

  int dimension() const { return dim_; }
  double horizon() const { return horizon_; }
  const std::vector<Segment>& segments() const { return segs_; }
  /// Segment starts followed by the horizon.
  std::vector<double> breakpoints() const;
  std::size_t segment_index(double t) const;

  const Eigen::VectorXd& lambda(double t) const;
  const Eigen::MatrixXd& sigma(double t) const;
  double lambda_sq(double t) const;
  double condition_number(std::size_t segment) const { return cond_[segment]; }

  /// Lambda(t) = int_t^T |lambda|^2.
  double lambda_accum(double t) const;
  double total_opportunity() const { return acc_.front(); }
  /// min { t in [0,T] : Lambda(t) = eta }.
  double phi(double eta) const;

  /// Solves sigma(t)^T pi = a.
  Eigen::VectorXd portfolio_from_exposure(double t,
                                          const Eigen::VectorXd& a) const;

  /// Same coefficients on [0, horizon]; the last segment is extended when the
  /// new horizon is longer.
  MarketModel with_horizon(double horizon) const;

 private:
  void check_time(double t) const;

  int dim_ = 1;
  double horizon_ = 0.0;
  std::vector<Segment> segs_;
  std::vector<double> acc_;  // Lambda at each segment start, then 0 at T
  std::vector<double> cond_;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
};

}  // namespace eqport
