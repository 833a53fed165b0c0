#include <doctest.h>

#include <cmath>
#include <random>

#include "eqport/errors.hpp"
#include "eqport/riskdist.hpp"

using eqport::RiskAversionDistribution;
using Dist = eqport::RiskAversionDistribution;

namespace {

std::vector<Dist> corpus() {
  return {Dist::point(1.5),
          Dist::discrete({1, 3}, {0.9, 0.1}),
          Dist::discrete({0.1, 8}, {0.2, 0.8}),
          Dist::gamma(2, 0.5),
          Dist::poisson(2),
          Dist::stable(0.8),
          Dist::combination({0.5, 0.5}, {Dist::discrete({0.1, 8}, {0.2, 0.8}),
                                         Dist::point(1.5)}),
          Dist::sample_mean(Dist::discrete({1, 3}, {0.9, 0.1}), 8)};
}

}  // namespace

TEST_CASE("laplace closed forms") {
  CHECK(Dist::gamma(2, 0.5).laplace(2) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(Dist::poisson(2).laplace(1) ==
        doctest::Approx(std::exp(2 * (std::exp(-1.0) - 1))).epsilon(1e-14));
  for (const auto& d : corpus()) CHECK(d.laplace(0) == 1.0);
  CHECK_THROWS_AS(Dist::gamma(2, 0.5).laplace(-1), eqport::DomainError);
}

TEST_CASE("weighted moment at zero") {
  CHECK(Dist::point(3).weighted_moment(0) == 3.0);
  CHECK(Dist::gamma(2, 0.5).weighted_moment(0) == doctest::Approx(1.0));
  CHECK(Dist::discrete({1, 3}, {0.9, 0.1}).weighted_moment(0) ==
        doctest::Approx(1.2).epsilon(1e-14));
  CHECK(std::isinf(Dist::stable(0.8).weighted_moment(0)));
  CHECK(Dist::stable(0.8).mean().is_infinite());
}

TEST_CASE("laplace decreasing and moment is minus its derivative") {
  for (const auto& d : corpus()) {
    double prev = 1.0;
    for (int k = -6; k <= 6; ++k) {
      const double y = std::pow(2.0, k);
      const double l = d.laplace(y);
      CHECK(l < prev);
      prev = l;
      const double e = 1e-5 * y;
      const double fd = -(d.laplace(y + e) - d.laplace(y - e)) / (2 * e);
      CHECK(d.weighted_moment(y) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("sample mean and equal-weight combination identities") {
  const auto b = Dist::discrete({1, 3}, {0.9, 0.1});
  const auto m = Dist::sample_mean(b, 4);
  const auto c = Dist::combination({0.25, 0.25, 0.25, 0.25}, {b, b, b, b});
  for (double y : {0.0, 0.3, 1.0, 7.0, 40.0}) {
    CHECK(m.laplace(y) == std::pow(b.laplace(y / 4), 4));
    CHECK(c.laplace(y) == doctest::Approx(m.laplace(y)).epsilon(1e-12));
    CHECK(c.moment_ratio(y) == doctest::Approx(m.moment_ratio(y)).epsilon(1e-12));
  }
}

TEST_CASE("metadata") {
  const auto d = Dist::discrete({3, 1}, {0.1, 0.9});
  CHECK(d.essinf() == 1.0);
  CHECK(d.mass_at_essinf() == doctest::Approx(0.9));
  REQUIRE(d.support_gap().has_value());
  CHECK(*d.support_gap() == doctest::Approx(2.0));
  CHECK(Dist::gamma(2, 0.5).essinf() == 0.0);
  CHECK_THROWS(Dist::discrete({1, 2}, {0.5, 0.6}));
  CHECK_THROWS(Dist::discrete({0}, {1.0}));
  CHECK_THROWS(Dist::stable(1.2));
}

TEST_CASE("stochastic orders on the examples") {
  using S = eqport::OrderVerdict::Status;
  CHECK(eqport::rhr_dominates(Dist::discrete({2}, {1}), Dist::discrete({1}, {1}))
            .status == S::dominates);
  const auto r1 = Dist::discrete({1, 3}, {0.9, 0.1});
  const auto r2 = Dist::discrete({1, 2}, {0.9, 0.1});
  CHECK(eqport::fsd_dominates(r1, r2).dominates());
  CHECK(eqport::fsd_dominates(r1, r1).dominates());
  CHECK(eqport::rhr_dominates(r1, r1).dominates());
  CHECK(eqport::fsd_dominates(Dist::discrete({1}, {1}), Dist::discrete({2}, {1}))
            .status == S::fails);
  // F2/F1 at 1, 2, 3: 1, 1/0.9, 1 -> rises then falls.
  const auto v = eqport::rhr_dominates(r1, r2);
  CHECK(v.status == S::fails);
  CHECK(v.fails_at == doctest::Approx(2.0));
  CHECK(eqport::rhr_dominates(Dist::stable(0.5), r1).status == S::inapplicable);
}

TEST_CASE("rh order implies fsd on random discrete pairs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::uniform_int_distribution<int> pt(1, 6);
  int rh_count = 0;
  for (int i = 0; i < 500; ++i) {
    auto draw = [&] {
      double a = pt(rng), b = pt(rng);
      if (a == b) b += 1;
      const double p = u(rng);
      return Dist::discrete({a, b}, {p, 1 - p});
    };
    const auto d1 = draw();
    const auto d2 = draw();
    if (eqport::rhr_dominates(d1, d2).dominates()) {
      ++rh_count;
      CHECK(eqport::fsd_dominates(d1, d2).dominates());
    }
  }
  CHECK(rh_count > 20);
}
