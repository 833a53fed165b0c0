#include "eqport/kernel.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "eqport/errors.hpp"

namespace eqport {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Least-squares slope of log g against log x on a log-spaced window.
struct PowerFit {
  double slope;
  double residual;
};

template <class G>
PowerFit fit_power(G&& g, double lo, double hi, int points = 17) {
  std::vector<double> lx, ly;
  for (int i = 0; i < points; ++i) {
    const double x = lo * std::pow(hi / lo, double(i) / (points - 1));
    const double v = g(x);
    if (v > 0.0 && std::isfinite(v)) {
      lx.push_back(std::log(x));
      ly.push_back(std::log(v));
    }
  }
  if (lx.size() < 3) return {std::numeric_limits<double>::quiet_NaN(), kInf};
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= lx.size();
  my /= lx.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const double slope = sxy / sxx;
  double res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i)
    res = std::max(res, std::abs(ly[i] - my - slope * (lx[i] - mx)));
  return {slope, res};
}

}  // namespace

const char* to_string(HInfinity::Kind k) {
  switch (k) {
    case HInfinity::Kind::finite: return "finite";
    case HInfinity::Kind::infinite: return "infinite";
    case HInfinity::Kind::unresolved: return "unresolved";
  }
  return "?";
}

const char* to_string(HZero::Regime r) {
  switch (r) {
    case HZero::Regime::regular: return "regular";
    case HZero::Regime::integrable_singularity: return "integrable_singularity";
    case HZero::Regime::nonintegrable_singularity:
      return "nonintegrable_singularity";
  }
  return "?";
}

PreferenceKernel::PreferenceKernel(RiskAversionDistribution dist,
                                   const NumericConfig& cfg)
    : dist_(std::make_shared<const RiskAversionDistribution>(std::move(dist))),
      cfg_(cfg) {
  const auto& d = *dist_;
  if (auto p = d.as<PointMass>()) {
    closed_ = Closed::point;
    h_inf_ = {HInfinity::Kind::infinite, kInf};
    (void)p;
  } else if (auto p = d.as<PoissonLaw>()) {
    closed_ = Closed::poisson;
    h_inf_ = {HInfinity::Kind::finite, p->rate * p->rate};
  } else if (auto g = d.as<GammaLaw>()) {
    closed_ = Closed::gamma;
    h_inf_ = {HInfinity::Kind::finite, 2.0 * g->shape * g->shape * g->scale};
  } else if (auto s = d.as<PositiveStable>()) {
    closed_ = Closed::stable;
    h_inf_ = {HInfinity::Kind::infinite, kInf};
    h_zero_.exponent = 1.0 - s->index;
    h_zero_.regime = s->index > 0.5 ? HZero::Regime::integrable_singularity
                                    : HZero::Regime::nonintegrable_singularity;
  } else if (auto m = d.as<SampleMean>()) {
    closed_ = Closed::sample_mean;
    base_ = std::make_shared<const PreferenceKernel>(*m->base, cfg_);
    n_ = m->n;
    h_inf_ = base_->h_infinity();
    if (h_inf_.kind != HInfinity::Kind::infinite) h_inf_.value *= n_;
    h_zero_ = base_->h_zero();
  }
  if (closed_ != Closed::none) {
    form_ = base_ ? base_->form() : Form::closed;
    return;
  }
  form_ = Form::transform;
  if (!d.mean().is_finite()) {
    const PowerFit fit = fit_power([&](double x) { return h(x); },
                                   cfg_.zero_fit_lo, cfg_.zero_fit_hi);
    h_zero_.exponent = fit.slope;
    h_zero_.fit_residual = fit.residual;
    h_zero_.approximate = true;
    h_zero_.regime = fit.slope < 0.5
                         ? HZero::Regime::integrable_singularity
                         : HZero::Regime::nonintegrable_singularity;
  }
  build_tables();
}

void PreferenceKernel::build_tables() {
  auto dist = dist_;
  const double p = std::max(0.0, h_zero_.exponent);
  if (h_zero_.regime != HZero::Regime::nonintegrable_singularity) {
    h_table_ = std::make_shared<const quad::CumulativeIntegral>(
        [dist](double x) {
          const double r = dist->moment_ratio(0.5 * x);
          return r * r;
        },
        cfg_.y_max, cfg_.quad_rel_tol, cfg_.quad_abs_floor,
        std::min(2.0 * p, 0.95));
  }
  inv_h_table_ = std::make_shared<const quad::CumulativeIntegral>(
      [dist](double x) { return dist->moment_ratio(0.5 * x); }, cfg_.y_max,
      cfg_.quad_rel_tol, cfg_.quad_abs_floor, std::min(p, 0.95));

  if (h_zero_.regime == HZero::Regime::nonintegrable_singularity) {
    h_inf_ = {HInfinity::Kind::infinite, kInf};
    return;
  }
  if (dist_->essinf() > 0.0) {
    h_inf_ = {HInfinity::Kind::infinite, kInf};
    return;
  }
  const double ym = cfg_.y_max;
  const double total = h_table_->total();
  const double f_end = h_table_->integrand(ym);
  if (f_end == 0.0) {
    h_inf_ = {HInfinity::Kind::finite, total};
    return;
  }
  const PowerFit tail =
      fit_power([&](double x) { return h_table_->integrand(x); }, 0.5 * ym, ym);
  if (std::isfinite(tail.slope) && tail.slope < -1.05) {
    h_inf_ = {HInfinity::Kind::finite, total + f_end * ym / (-tail.slope - 1.0)};
  } else if (std::isfinite(tail.slope) && tail.slope > -0.95) {
    h_inf_ = {HInfinity::Kind::infinite, kInf};
  } else {
    h_inf_ = {HInfinity::Kind::unresolved, total};
  }
}

double PreferenceKernel::h(double x) const {
  if (x < 0.0) throw DomainError("h requires x >= 0");
  const auto& d = *dist_;
  switch (closed_) {
    case Closed::point: return 1.0 / d.as<PointMass>()->gamma;
    case Closed::poisson: return std::exp(0.5 * x) / d.as<PoissonLaw>()->rate;
    case Closed::gamma: {
      const auto* g = d.as<GammaLaw>();
      return (1.0 + 0.5 * g->scale * x) / (g->shape * g->scale);
    }
    case Closed::stable: {
      const double a = d.as<PositiveStable>()->index;
      return std::pow(0.5 * x, 1.0 - a) / a;
    }
    case Closed::sample_mean: return base_->h(x / n_);
    case Closed::none: break;
  }
  const double r = d.moment_ratio(0.5 * x);
  return std::isinf(r) ? 0.0 : 1.0 / r;
}

double PreferenceKernel::h_transform(double x) const {
  if (x < 0.0) throw DomainError("h requires x >= 0");
  const double m = dist_->weighted_moment(0.5 * x);
  if (std::isinf(m)) return 0.0;
  return dist_->laplace(0.5 * x) / m;
}

double PreferenceKernel::table_eval(const quad::CumulativeIntegral& t,
                                    double y) const {
  if (y <= t.upper()) return t(y);
  return t.total() + quad::integrate([&](double x) { return t.integrand(x); },
                                     t.upper(), y, cfg_.quad_rel_tol,
                                     cfg_.quad_abs_floor);
}

double PreferenceKernel::table_inverse(const quad::CumulativeIntegral& t,
                                       double z) const {
  const double tol = cfg_.inverse_rel_tol * std::max(1.0, z);
  if (z <= t.total()) return t.inverse(z, tol);
  // Beyond the table: bracket by doubling, then safeguarded Newton.
  double lo = t.upper(), hi = 2.0 * lo;
  while (table_eval(t, hi) < z) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericError("H inverse bracket overflow");
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 200; ++i) {
    const double r = table_eval(t, x) - z;
    if (std::abs(r) <= tol) return x;
    if (r > 0.0) hi = x;
    else lo = x;
    const double d = t.integrand(x);
    double next = d > 0.0 ? x - r / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  throw NumericError("H inverse did not converge beyond tabulated range");
}

double PreferenceKernel::big_h(double y) const {
  if (y < 0.0) throw DomainError("H requires y >= 0");
  if (y == 0.0) return 0.0;
  const auto& d = *dist_;
  switch (closed_) {
    case Closed::point: {
      const double g = d.as<PointMass>()->gamma;
      return g * g * y;
    }
    case Closed::poisson: {
      const double th = d.as<PoissonLaw>()->rate;
      return -th * th * std::expm1(-y);
    }
    case Closed::gamma: {
      const auto* g = d.as<GammaLaw>();
      const double u = 0.5 * g->scale * y;
      return 2.0 * g->shape * g->shape * g->scale * u / (1.0 + u);
    }
    case Closed::stable: {
      const double a = d.as<PositiveStable>()->index;
      if (a <= 0.5) return kInf;
      return a * a * std::pow(2.0, 2.0 - 2.0 * a) * std::pow(y, 2.0 * a - 1.0) /
             (2.0 * a - 1.0);
    }
    case Closed::sample_mean: return n_ * base_->big_h(y / n_);
    case Closed::none: break;
  }
  if (!h_table_) return kInf;
  return table_eval(*h_table_, y);
}

double PreferenceKernel::big_h_inverse(double z) const {
  if (z < 0.0) throw DomainError("H inverse requires z >= 0");
  if (z == 0.0) return 0.0;
  if (h_inf_.is_finite() && z >= h_inf_.value) throw NoSolution(z, h_inf_.value);
  const auto& d = *dist_;
  switch (closed_) {
    case Closed::point: {
      const double g = d.as<PointMass>()->gamma;
      return z / (g * g);
    }
    case Closed::poisson: {
      const double th = d.as<PoissonLaw>()->rate;
      return -std::log1p(-z / (th * th));
    }
    case Closed::gamma: {
      const auto* g = d.as<GammaLaw>();
      const double c = 2.0 * g->shape * g->shape * g->scale;
      return 2.0 * z / (g->scale * (c - z));
    }
    case Closed::stable: {
      const double a = d.as<PositiveStable>()->index;
      if (a <= 0.5) throw NoSolution(z, 0.0);
      const double k =
          a * a * std::pow(2.0, 2.0 - 2.0 * a) / (2.0 * a - 1.0);
      return std::pow(z / k, 1.0 / (2.0 * a - 1.0));
    }
    case Closed::sample_mean: return n_ * base_->big_h_inverse(z / n_);
    case Closed::none: break;
  }
  if (!h_table_) throw NoSolution(z, 0.0);
  if (h_inf_.is_unresolved() && z > h_table_->total())
    throw NumericError("H(inf) unresolved and z exceeds the tabulated bound");
  return table_inverse(*h_table_, z);
}

double PreferenceKernel::integral_inv_h(double z) const {
  if (z < 0.0) throw DomainError("integral of 1/h requires z >= 0");
  if (z == 0.0) return 0.0;
  const auto& d = *dist_;
  switch (closed_) {
    case Closed::point: return d.as<PointMass>()->gamma * z;
    case Closed::poisson:
      return -2.0 * d.as<PoissonLaw>()->rate * std::expm1(-0.5 * z);
    case Closed::gamma: {
      const auto* g = d.as<GammaLaw>();
      return 2.0 * g->shape * std::log1p(0.5 * g->scale * z);
    }
    case Closed::stable: {
      const double a = d.as<PositiveStable>()->index;
      return 2.0 * std::pow(0.5 * z, a);
    }
    case Closed::sample_mean: return n_ * base_->integral_inv_h(z / n_);
    case Closed::none: break;
  }
  return table_eval(*inv_h_table_, z);
}

double PreferenceKernel::script_l(double z) const {
  if (z < 0.0) throw DomainError("script L requires z >= 0");
  if (z == 0.0) return 0.0;
  return integral_inv_h(z) + dist_->log_laplace(0.5 * z);
}

}  // namespace eqport
