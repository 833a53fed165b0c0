#include <doctest.h>

#include <cmath>
#include <random>

#include "eqport/errors.hpp"
#include "eqport/market.hpp"

using eqport::MarketModel;

namespace {

MarketModel scalar_steps(std::vector<std::pair<double, double>> starts_lambda,
                         double T) {
  std::vector<MarketModel::Segment> segs;
  for (auto [t, l] : starts_lambda)
    segs.push_back({t, Eigen::VectorXd::Constant(1, l),
                    Eigen::MatrixXd::Constant(1, 1, 0.2)});
  return MarketModel(segs, T);
}

}  // namespace

TEST_CASE("accumulated opportunity") {
  const auto m = MarketModel::constant(0.4, 0.2, 20);
  CHECK(m.lambda_accum(0) == doctest::Approx(3.2).epsilon(1e-15));
  CHECK(m.lambda_accum(20) == 0.0);
  const auto s = scalar_steps({{0, 1}, {1, 0}, {2, 1}}, 3);
  CHECK(s.lambda_accum(0) == 2.0);
  CHECK(s.lambda_accum(1.5) == 1.0);
  CHECK_THROWS_AS(m.lambda_accum(21), eqport::DomainError);
}

TEST_CASE("phi is the earliest time attaining a level") {
  CHECK(MarketModel::constant(0.4, 0.2, 20).phi(0) == 20.0);
  const auto s = scalar_steps({{0, 1}, {1, 0}}, 2);
  CHECK(s.phi(0) == 1.0);
  CHECK(s.phi(s.total_opportunity()) == 0.0);
  const auto w = scalar_steps({{0, 0.5}, {1, 0}, {2, 1.5}, {2.5, 0}, {3, 1}}, 4);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, w.total_opportunity());
  for (int i = 0; i < 200; ++i) {
    const double eta = u(rng);
    const double t = w.phi(eta);
    CHECK(w.lambda_accum(t) == doctest::Approx(eta).epsilon(1e-14));
    if (t > 1e-9) CHECK(w.lambda_accum(t - 1e-9) > eta);
  }
  double prev = w.total_opportunity();
  for (int i = 0; i <= 400; ++i) {
    const double v = w.lambda_accum(0.01 * i);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("portfolio from exposure") {
  const auto m = MarketModel::constant(0.3, 0.2, 10);
  CHECK(m.portfolio_from_exposure(0, Eigen::VectorXd::Constant(1, 0.5))(0) ==
        doctest::Approx(2.5).epsilon(1e-15));
  Eigen::Vector3d a(0.3, -0.1, 0.7);
  const auto id = MarketModel::constant(0.1, 1.0, 1, 3);
  CHECK((id.portfolio_from_exposure(0.5, a) - a).norm() == 0.0);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  Eigen::Matrix3d sigma = Eigen::Matrix3d::Identity();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) sigma(i, j) += 0.3 * n01(rng);
  MarketModel r({{0.0, Eigen::Vector3d(0.1, 0.2, 0.3), sigma}}, 2);
  const Eigen::VectorXd pi = r.portfolio_from_exposure(1.0, a);
  CHECK((sigma.transpose() * pi - a).norm() <= 1e-10 * a.norm());
}

TEST_CASE("invalid markets") {
  CHECK_THROWS_AS(scalar_steps({{0, 0}}, 2), eqport::ZeroOpportunity);
  MarketModel::Segment bad{0, Eigen::VectorXd::Constant(2, 0.1),
                           Eigen::MatrixXd::Ones(2, 2)};
  CHECK_THROWS_AS(MarketModel({bad}, 1), eqport::PreconditionError);
  CHECK_THROWS_AS(MarketModel::constant(0.4, 0.2, 0), eqport::DomainError);
}

TEST_CASE("horizon change keeps the coefficients") {
  const auto s = scalar_steps({{0, 1}, {1, 0.5}}, 2);
  const auto longer = s.with_horizon(5);
  CHECK(longer.lambda_accum(1) == doctest::Approx(1.0));
  const auto shorter = s.with_horizon(0.5);
  CHECK(shorter.segments().size() == 1);
  CHECK(shorter.total_opportunity() == 0.5);
}
