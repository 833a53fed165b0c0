#include "eqport/market.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eqport/errors.hpp"

namespace eqport {

namespace {
constexpr double kMaxCondition = 1e12;
}

MarketModel MarketModel::constant(double lambda, double sigma, double horizon,
                                  int dimension) {
  if (dimension < 1) throw DomainError("market dimension must be >= 1");
  Segment s{0.0, Eigen::VectorXd::Constant(dimension, lambda),
            sigma * Eigen::MatrixXd::Identity(dimension, dimension)};
  return MarketModel({s}, horizon);
}

MarketModel::MarketModel(std::vector<Segment> segments, double horizon)
    : horizon_(horizon), segs_(std::move(segments)) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_))
    throw DomainError("market horizon must be positive and finite");
  if (segs_.empty()) throw DomainError("market needs at least one segment");
  if (segs_.front().t_start != 0.0)
    throw DomainError("first market segment must start at t = 0");
  dim_ = static_cast<int>(segs_.front().lambda.size());
  if (dim_ < 1) throw DomainError("market dimension must be >= 1");
  for (std::size_t i = 0; i < segs_.size(); ++i) {
    const auto& s = segs_[i];
    if (i > 0 && !(s.t_start > segs_[i - 1].t_start))
      throw DomainError("market segment starts must be strictly increasing");
    if (!(s.t_start < horizon_))
      throw DomainError("market segment starts beyond the horizon");
    if (s.lambda.size() != dim_ || s.sigma.rows() != dim_ ||
        s.sigma.cols() != dim_)
      throw DomainError("market segment has inconsistent dimension");
    if (!s.lambda.allFinite() || !s.sigma.allFinite())
      throw DomainError("market coefficients must be finite");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(s.sigma);
    const auto& sv = svd.singularValues();
    const double c = sv(sv.size() - 1) > 0.0
                         ? sv(0) / sv(sv.size() - 1)
                         : std::numeric_limits<double>::infinity();
    if (!(c <= kMaxCondition))
      throw PreconditionError("sigma on segment " + std::to_string(i) +
                              " is singular or ill-conditioned (cond=" +
                              std::to_string(c) + ")");
    cond_.push_back(c);
    lu_.emplace_back(s.sigma.transpose());
  }
  acc_.assign(segs_.size() + 1, 0.0);
  for (std::size_t i = segs_.size(); i-- > 0;) {
    const double end = i + 1 < segs_.size() ? segs_[i + 1].t_start : horizon_;
    acc_[i] = acc_[i + 1] + segs_[i].lambda.squaredNorm() * (end - segs_[i].t_start);
  }
  if (!(acc_.front() > 0.0)) throw ZeroOpportunity();
  if (!std::isfinite(acc_.front()))
    throw DomainError("total market opportunity is not finite");
}

std::vector<double> MarketModel::breakpoints() const {
  std::vector<double> b;
  for (const auto& s : segs_) b.push_back(s.t_start);
  b.push_back(horizon_);
  return b;
}

void MarketModel::check_time(double t) const {
  if (!(t >= 0.0 && t <= horizon_))
    throw DomainError("time " + std::to_string(t) + " outside [0, T]");
}

std::size_t MarketModel::segment_index(double t) const {
  check_time(t);
  auto it = std::upper_bound(segs_.begin(), segs_.end(), t,
                             [](double x, const Segment& s) { return x < s.t_start; });
  return static_cast<std::size_t>(it - segs_.begin()) - 1;
}

const Eigen::VectorXd& MarketModel::lambda(double t) const {
  return segs_[segment_index(t)].lambda;
}

const Eigen::MatrixXd& MarketModel::sigma(double t) const {
  return segs_[segment_index(t)].sigma;
}

double MarketModel::lambda_sq(double t) const {
  return lambda(t).squaredNorm();
}

double MarketModel::lambda_accum(double t) const {
  const std::size_t i = segment_index(t);
  if (t == horizon_) return 0.0;
  const double end = i + 1 < segs_.size() ? segs_[i + 1].t_start : horizon_;
  return acc_[i + 1] + segs_[i].lambda.squaredNorm() * (end - t);
}

double MarketModel::phi(double eta) const {
  if (!(eta >= 0.0 && eta <= acc_.front()))
    throw DomainError("phi requires eta in [0, Lambda(0)]");
  for (std::size_t i = 0; i < segs_.size(); ++i) {
    if (acc_[i] == eta) return segs_[i].t_start;
    if (acc_[i + 1] <= eta) {
      const double t = segs_[i].t_start +
                       (acc_[i] - eta) / segs_[i].lambda.squaredNorm();
      const double end = i + 1 < segs_.size() ? segs_[i + 1].t_start : horizon_;
      return std::min(t, end);
    }
  }
  return horizon_;
}

Eigen::VectorXd MarketModel::portfolio_from_exposure(
    double t, const Eigen::VectorXd& a) const {
  if (a.size() != dim_) throw DomainError("exposure has wrong dimension");
  const std::size_t i = segment_index(t);
  Eigen::VectorXd pi = lu_[i].solve(a);
  const double res = (segs_[i].sigma.transpose() * pi - a).norm();
  if (res > 1e-10 * std::max(1.0, a.norm()))
    throw NumericError("portfolio solve residual " + std::to_string(res));
  return pi;
}

MarketModel MarketModel::with_horizon(double horizon) const {
  std::vector<Segment> keep;
  for (const auto& s : segs_)
    if (s.t_start < horizon) keep.push_back(s);
  return MarketModel(std::move(keep), horizon);
}

}  // namespace eqport
