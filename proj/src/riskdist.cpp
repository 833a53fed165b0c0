#include "eqport/riskdist.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "eqport/config.hpp"
#include "eqport/errors.hpp"

namespace eqport {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

void require_nonneg(double y) {
  if (!(y >= 0.0)) throw DomainError("argument must be >= 0");
}

// Sort atoms by value and merge those closer than a relative 1e-12.
std::vector<std::pair<double, double>> merge_atoms(
    std::vector<std::pair<double, double>> atoms) {
  std::sort(atoms.begin(), atoms.end());
  std::vector<std::pair<double, double>> out;
  for (const auto& [x, p] : atoms) {
    if (p <= 0.0) continue;
    if (!out.empty() &&
        std::abs(out.back().first - x) <= 1e-12 * std::max(1.0, std::abs(x))) {
      out.back().second += p;
    } else {
      out.emplace_back(x, p);
    }
  }
  return out;
}

constexpr std::size_t kMaxAtoms = 200000;

std::vector<std::pair<double, double>> convolve(
    const std::vector<std::pair<double, double>>& a,
    const std::vector<std::pair<double, double>>& b) {
  if (a.size() * b.size() > 50 * kMaxAtoms)
    throw DomainError("atomic convolution too large");
  std::vector<std::pair<double, double>> out;
  out.reserve(a.size() * b.size());
  for (const auto& [x, p] : a)
    for (const auto& [y, q] : b) out.emplace_back(x + y, p * q);
  auto merged = merge_atoms(std::move(out));
  if (merged.size() > kMaxAtoms) throw DomainError("too many atoms");
  return merged;
}

std::vector<std::pair<double, double>> scale_atoms(
    std::vector<std::pair<double, double>> atoms, double w) {
  for (auto& a : atoms) a.first *= w;
  return atoms;
}

// Shortest text that reads back to the same double.
std::string fmt_num(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

}  // namespace

RiskAversionDistribution::RiskAversionDistribution(Kind kind)
    : kind_(std::move(kind)) {
  cache_metadata();
}

RiskAversionDistribution RiskAversionDistribution::point(double gamma) {
  require(std::isfinite(gamma) && gamma > 0.0,
          "point mass requires gamma > 0");
  return RiskAversionDistribution(PointMass{gamma});
}

RiskAversionDistribution RiskAversionDistribution::discrete(
    std::vector<double> points, std::vector<double> probs) {
  require(!points.empty() && points.size() == probs.size(),
          "discrete law needs matching, non-empty point and probability lists");
  std::vector<std::pair<double, double>> atoms;
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    require(std::isfinite(points[i]) && points[i] >= 0.0,
            "support points must be finite and >= 0");
    require(std::isfinite(probs[i]) && probs[i] >= 0.0,
            "probabilities must be >= 0");
    total += probs[i];
    atoms.emplace_back(points[i], probs[i]);
  }
  require(std::abs(total - 1.0) <= 1e-12, "probabilities must sum to 1");
  atoms = merge_atoms(std::move(atoms));
  FiniteDiscrete fd;
  for (const auto& [x, p] : atoms) {
    fd.points.push_back(x);
    fd.probs.push_back(p);
  }
  require(fd.points.back() > 0.0, "P(R > 0) must be positive");
  return RiskAversionDistribution(std::move(fd));
}

RiskAversionDistribution RiskAversionDistribution::gamma(double shape,
                                                         double scale) {
  require(std::isfinite(shape) && shape > 0.0 && std::isfinite(scale) &&
              scale > 0.0,
          "gamma law requires shape > 0 and scale > 0");
  return RiskAversionDistribution(GammaLaw{shape, scale});
}

RiskAversionDistribution RiskAversionDistribution::poisson(double rate) {
  require(std::isfinite(rate) && rate > 0.0, "poisson law requires rate > 0");
  return RiskAversionDistribution(PoissonLaw{rate});
}

RiskAversionDistribution RiskAversionDistribution::stable(double index) {
  require(index > 0.0 && index < 1.0, "stable law requires index in (0,1)");
  return RiskAversionDistribution(PositiveStable{index});
}

RiskAversionDistribution RiskAversionDistribution::combination(
    std::vector<double> weights,
    std::vector<RiskAversionDistribution> components) {
  require(!weights.empty() && weights.size() == components.size(),
          "combination needs matching, non-empty weight and component lists");
  double total = 0.0;
  for (double w : weights) {
    require(w > 0.0 && w <= 1.0, "combination weights must lie in (0,1]");
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-12, "combination weights must sum to 1");
  return RiskAversionDistribution(
      IndependentCombination{std::move(weights), std::move(components)});
}

RiskAversionDistribution RiskAversionDistribution::sample_mean(
    RiskAversionDistribution base, int n) {
  require(n >= 1, "sample mean requires n >= 1");
  return RiskAversionDistribution(SampleMean{
      std::make_shared<const RiskAversionDistribution>(std::move(base)), n});
}

void RiskAversionDistribution::cache_metadata() {
  std::visit(
      overloaded{
          [&](const PointMass& d) {
            mean_ = {MeanInfo::Kind::finite, d.gamma};
            essinf_ = d.gamma;
            mass_at_essinf_ = 1.0;
          },
          [&](const FiniteDiscrete& d) {
            double m = 0.0;
            for (std::size_t i = 0; i < d.points.size(); ++i)
              m += d.points[i] * d.probs[i];
            mean_ = {MeanInfo::Kind::finite, m};
            essinf_ = d.points.front();
            mass_at_essinf_ = d.probs.front();
            if (d.points.size() >= 2) support_gap_ = d.points[1] - d.points[0];
          },
          [&](const GammaLaw& d) {
            mean_ = {MeanInfo::Kind::finite, d.shape * d.scale};
            essinf_ = 0.0;
            mass_at_essinf_ = 0.0;
            support_gap_ = 0.0;
          },
          [&](const PoissonLaw& d) {
            mean_ = {MeanInfo::Kind::finite, d.rate};
            essinf_ = 0.0;
            mass_at_essinf_ = std::exp(-d.rate);
          },
          [&](const PositiveStable&) {
            mean_ = {MeanInfo::Kind::infinite, kInf};
            essinf_ = 0.0;
            mass_at_essinf_ = 0.0;
            support_gap_ = 0.0;
          },
          [&](const IndependentCombination& d) {
            double m = 0.0, r0 = 0.0, mass = 1.0;
            MeanInfo::Kind k = MeanInfo::Kind::finite;
            for (std::size_t i = 0; i < d.weights.size(); ++i) {
              const auto& c = d.components[i];
              if (c.mean().is_infinite()) k = MeanInfo::Kind::infinite;
              else if (!c.mean().is_finite() && k == MeanInfo::Kind::finite)
                k = MeanInfo::Kind::unknown;
              else m += d.weights[i] * c.mean().value;
              r0 += d.weights[i] * c.essinf();
              mass *= c.mass_at_essinf();
            }
            mean_ = {k, k == MeanInfo::Kind::finite ? m
                        : k == MeanInfo::Kind::infinite ? kInf
                                                        : 0.0};
            essinf_ = r0;
            mass_at_essinf_ = mass;
          },
          [&](const SampleMean& d) {
            mean_ = d.base->mean();
            essinf_ = d.base->essinf();
            mass_at_essinf_ = std::pow(d.base->mass_at_essinf(), d.n);
          },
      },
      kind_);
}

double RiskAversionDistribution::laplace(double y) const {
  require_nonneg(y);
  if (y == 0.0) return 1.0;
  return std::visit(
      overloaded{
          [&](const PointMass& d) { return std::exp(-d.gamma * y); },
          [&](const FiniteDiscrete& d) {
            double s = 0.0;
            for (std::size_t i = 0; i < d.points.size(); ++i)
              s += d.probs[i] * std::exp(-d.points[i] * y);
            return s;
          },
          [&](const GammaLaw& d) {
            return std::pow(1.0 + d.scale * y, -d.shape);
          },
          [&](const PoissonLaw& d) {
            return std::exp(d.rate * std::expm1(-y));
          },
          [&](const PositiveStable& d) {
            return std::exp(-std::pow(y, d.index));
          },
          [&](const IndependentCombination& d) {
            double p = 1.0;
            for (std::size_t i = 0; i < d.weights.size(); ++i)
              p *= d.components[i].laplace(d.weights[i] * y);
            return p;
          },
          [&](const SampleMean& d) {
            return std::pow(d.base->laplace(y / d.n), d.n);
          },
      },
      kind_);
}

double RiskAversionDistribution::log_laplace(double y) const {
  require_nonneg(y);
  if (y == 0.0) return 0.0;
  return std::visit(
      overloaded{
          [&](const PointMass& d) { return -d.gamma * y; },
          [&](const FiniteDiscrete& d) {
            const double r0 = d.points.front();
            double s = 0.0;
            for (std::size_t i = 0; i < d.points.size(); ++i)
              s += d.probs[i] * std::exp(-(d.points[i] - r0) * y);
            return -r0 * y + std::log(s);
          },
          [&](const GammaLaw& d) {
            return -d.shape * std::log1p(d.scale * y);
          },
          [&](const PoissonLaw& d) { return d.rate * std::expm1(-y); },
          [&](const PositiveStable& d) { return -std::pow(y, d.index); },
          [&](const IndependentCombination& d) {
            double s = 0.0;
            for (std::size_t i = 0; i < d.weights.size(); ++i)
              s += d.components[i].log_laplace(d.weights[i] * y);
            return s;
          },
          [&](const SampleMean& d) {
            return d.n * d.base->log_laplace(y / d.n);
          },
      },
      kind_);
}

double RiskAversionDistribution::weighted_moment(double y) const {
  require_nonneg(y);
  return std::visit(
      overloaded{
          [&](const PointMass& d) { return d.gamma * std::exp(-d.gamma * y); },
          [&](const FiniteDiscrete& d) {
            double s = 0.0;
            for (std::size_t i = 0; i < d.points.size(); ++i)
              s += d.probs[i] * d.points[i] * std::exp(-d.points[i] * y);
            return s;
          },
          [&](const GammaLaw& d) {
            return d.shape * d.scale * std::pow(1.0 + d.scale * y, -d.shape - 1);
          },
          [&](const PoissonLaw& d) {
            return d.rate * std::exp(-y) * laplace(y);
          },
          [&](const PositiveStable& d) {
            if (y == 0.0) return kInf;
            return d.index * std::pow(y, d.index - 1.0) *
                   std::exp(-std::pow(y, d.index));
          },
          [&](const IndependentCombination&) {
            const double r = moment_ratio(y);
            return std::isinf(r) ? kInf : r * laplace(y);
          },
          [&](const SampleMean&) {
            const double r = moment_ratio(y);
            return std::isinf(r) ? kInf : r * laplace(y);
          },
      },
      kind_);
}

double RiskAversionDistribution::moment_ratio(double y) const {
  require_nonneg(y);
  return std::visit(
      overloaded{
          [&](const PointMass& d) { return d.gamma; },
          [&](const FiniteDiscrete& d) { return d.points.front() + excess_ratio(y); },
          [&](const GammaLaw& d) {
            return d.shape * d.scale / (1.0 + d.scale * y);
          },
          [&](const PoissonLaw& d) { return d.rate * std::exp(-y); },
          [&](const PositiveStable& d) {
            if (y == 0.0) return kInf;
            return d.index * std::pow(y, d.index - 1.0);
          },
          [&](const IndependentCombination& d) {
            double s = 0.0;
            for (std::size_t i = 0; i < d.weights.size(); ++i)
              s += d.weights[i] * d.components[i].moment_ratio(d.weights[i] * y);
            return s;
          },
          [&](const SampleMean& d) { return d.base->moment_ratio(y / d.n); },
      },
      kind_);
}

double RiskAversionDistribution::excess_ratio(double y) const {
  require_nonneg(y);
  return std::visit(
      overloaded{
          [&](const FiniteDiscrete& d) {
            const double r0 = d.points.front();
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < d.points.size(); ++i) {
              const double x = d.points[i] - r0;
              const double e = d.probs[i] * std::exp(-x * y);
              num += x * e;
              den += e;
            }
            return num / den;
          },
          [&](const IndependentCombination& d) {
            double s = 0.0;
            for (std::size_t i = 0; i < d.weights.size(); ++i)
              s += d.weights[i] * d.components[i].excess_ratio(d.weights[i] * y);
            return s;
          },
          [&](const SampleMean& d) { return d.base->excess_ratio(y / d.n); },
          [&](const auto&) { return moment_ratio(y) - essinf_; },
      },
      kind_);
}

bool RiskAversionDistribution::has_cdf() const {
  return std::holds_alternative<PointMass>(kind_) ||
         std::holds_alternative<FiniteDiscrete>(kind_) ||
         std::holds_alternative<GammaLaw>(kind_) ||
         std::holds_alternative<PoissonLaw>(kind_);
}

double RiskAversionDistribution::cdf(double x) const {
  return std::visit(
      overloaded{
          [&](const PointMass& d) { return x >= d.gamma ? 1.0 : 0.0; },
          [&](const FiniteDiscrete& d) {
            double s = 0.0;
            for (std::size_t i = 0; i < d.points.size() && d.points[i] <= x; ++i)
              s += d.probs[i];
            return std::min(s, 1.0);
          },
          [&](const GammaLaw& d) {
            if (x <= 0.0) return 0.0;
            if (std::isinf(x)) return 1.0;
            return boost::math::gamma_p(d.shape, x / d.scale);
          },
          [&](const PoissonLaw& d) {
            if (x < 0.0) return 0.0;
            if (std::isinf(x)) return 1.0;
            return boost::math::gamma_q(std::floor(x) + 1.0, d.rate);
          },
          [&](const auto&) -> double {
            throw DomainError("CDF not available for " + describe());
          },
      },
      kind_);
}

double RiskAversionDistribution::quantile(double q) const {
  require(q >= 0.0 && q <= 1.0, "quantile level must lie in [0,1]");
  return std::visit(
      overloaded{
          [&](const PointMass& d) { return d.gamma; },
          [&](const FiniteDiscrete& d) {
            double s = 0.0;
            for (std::size_t i = 0; i < d.points.size(); ++i) {
              s += d.probs[i];
              if (s >= q - 1e-15) return d.points[i];
            }
            return d.points.back();
          },
          [&](const GammaLaw& d) {
            if (q >= 1.0) return kInf;
            return d.scale * boost::math::gamma_p_inv(d.shape, q);
          },
          [&](const PoissonLaw&) {
            if (q >= 1.0) return kInf;
            double k = 0.0;
            while (cdf(k) < q) k += 1.0;
            return k;
          },
          [&](const auto&) -> double {
            throw DomainError("quantile not available for " + describe());
          },
      },
      kind_);
}

bool RiskAversionDistribution::is_atomic() const {
  return std::visit(
      overloaded{
          [](const PointMass&) { return true; },
          [](const FiniteDiscrete&) { return true; },
          [](const PoissonLaw&) { return true; },
          [](const GammaLaw&) { return false; },
          [](const PositiveStable&) { return false; },
          [](const IndependentCombination& d) {
            return std::all_of(d.components.begin(), d.components.end(),
                               [](const auto& c) { return c.is_atomic(); });
          },
          [](const SampleMean& d) { return d.base->is_atomic(); },
      },
      kind_);
}

std::vector<std::pair<double, double>> RiskAversionDistribution::atoms() const {
  return std::visit(
      overloaded{
          [](const PointMass& d) {
            return std::vector<std::pair<double, double>>{{d.gamma, 1.0}};
          },
          [](const FiniteDiscrete& d) {
            std::vector<std::pair<double, double>> out;
            for (std::size_t i = 0; i < d.points.size(); ++i)
              out.emplace_back(d.points[i], d.probs[i]);
            return out;
          },
          [](const PoissonLaw& d) {
            std::vector<std::pair<double, double>> out;
            // Recurrence p_k = p_{k-1} * rate / k, stopped once past the mode
            // and the remaining tail is negligible.
            double p = std::exp(-d.rate), cum = 0.0;
            for (int k = 0;; ++k) {
              if (k > 0) p *= d.rate / k;
              out.emplace_back(static_cast<double>(k), p);
              cum += p;
              if (k > d.rate && 1.0 - cum < 1e-17) break;
              if (k > d.rate && p < 1e-300) break;
            }
            return out;
          },
          [this](const GammaLaw&) -> std::vector<std::pair<double, double>> {
            throw DomainError("no atomic representation for " + describe());
          },
          [this](const PositiveStable&) -> std::vector<std::pair<double, double>> {
            throw DomainError("no atomic representation for " + describe());
          },
          [](const IndependentCombination& d) {
            std::vector<std::pair<double, double>> acc{{0.0, 1.0}};
            for (std::size_t i = 0; i < d.weights.size(); ++i)
              acc = convolve(acc,
                             scale_atoms(d.components[i].atoms(), d.weights[i]));
            return acc;
          },
          [](const SampleMean& d) {
            const auto base = scale_atoms(d.base->atoms(), 1.0 / d.n);
            std::vector<std::pair<double, double>> acc{{0.0, 1.0}};
            for (int i = 0; i < d.n; ++i) acc = convolve(acc, base);
            return acc;
          },
      },
      kind_);
}

std::string RiskAversionDistribution::describe() const {
  return std::visit(
      overloaded{
          [](const PointMass& d) { return "point:" + fmt_num(d.gamma); },
          [](const FiniteDiscrete& d) {
            std::string s = "discrete:";
            for (std::size_t i = 0; i < d.points.size(); ++i) {
              if (i) s += ",";
              s += fmt_num(d.points[i]) + "=" + fmt_num(d.probs[i]);
            }
            return s;
          },
          [](const GammaLaw& d) {
            return "gamma:alpha=" + fmt_num(d.shape) + ",beta=" + fmt_num(d.scale);
          },
          [](const PoissonLaw& d) { return "poisson:theta=" + fmt_num(d.rate); },
          [](const PositiveStable& d) { return "stable:alpha=" + fmt_num(d.index); },
          [](const IndependentCombination& d) {
            std::string s = "mix:";
            for (std::size_t i = 0; i < d.weights.size(); ++i) {
              if (i) s += ",";
              const bool nested = d.components[i].as<IndependentCombination>() != nullptr;
              const std::string c = d.components[i].describe();
              s += fmt_num(d.weights[i]) + "*" + (nested ? "(" + c + ")" : c);
            }
            return s;
          },
          [](const SampleMean& d) {
            return "mean:n=" + std::to_string(d.n) + ",base=" + d.base->describe();
          },
      },
      kind_);
}

bool operator==(const RiskAversionDistribution& a,
                const RiskAversionDistribution& b) {
  if (a.kind_.index() != b.kind_.index()) return false;
  return std::visit(
      overloaded{
          [&](const PointMass& x) { return x.gamma == b.as<PointMass>()->gamma; },
          [&](const FiniteDiscrete& x) {
            const auto* y = b.as<FiniteDiscrete>();
            return x.points == y->points && x.probs == y->probs;
          },
          [&](const GammaLaw& x) {
            const auto* y = b.as<GammaLaw>();
            return x.shape == y->shape && x.scale == y->scale;
          },
          [&](const PoissonLaw& x) { return x.rate == b.as<PoissonLaw>()->rate; },
          [&](const PositiveStable& x) {
            return x.index == b.as<PositiveStable>()->index;
          },
          [&](const IndependentCombination& x) {
            const auto* y = b.as<IndependentCombination>();
            return x.weights == y->weights && x.components == y->components;
          },
          [&](const SampleMean& x) {
            const auto* y = b.as<SampleMean>();
            return x.n == y->n && *x.base == *y->base;
          },
      },
      a.kind_);
}

namespace {

// Points where the two CDFs are compared: atoms for atomic laws, a dense
// quantile grid for continuous ones.
std::vector<double> evaluation_points(const RiskAversionDistribution& d1,
                                      const RiskAversionDistribution& d2) {
  const auto& cfg = default_config();
  std::vector<double> pts;
  for (const auto* d : {&d1, &d2}) {
    if (d->is_atomic()) {
      for (const auto& [x, p] : d->atoms()) pts.push_back(x);
    } else {
      const double lo = d->quantile(cfg.rh_quantile_lo);
      const double hi = d->quantile(1.0 - cfg.rh_quantile_lo);
      const std::size_t n = cfg.rh_grid_points;
      for (std::size_t i = 0; i < n; ++i)
        pts.push_back(lo + (hi - lo) * static_cast<double>(i) /
                               static_cast<double>(n - 1));
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

bool both_have_cdf(const RiskAversionDistribution& d1,
                   const RiskAversionDistribution& d2) {
  return d1.has_cdf() && d2.has_cdf();
}

OrderVerdict inapplicable(const std::string& why) {
  OrderVerdict v;
  v.status = OrderVerdict::Status::inapplicable;
  v.note = why;
  return v;
}

}  // namespace

OrderVerdict rhr_dominates(const RiskAversionDistribution& d1,
                           const RiskAversionDistribution& d2) {
  if (!both_have_cdf(d1, d2))
    return inapplicable("reverse hazard order needs closed-form CDFs");
  const bool exact = d1.is_atomic() && d2.is_atomic();
  OrderVerdict v;
  v.status = OrderVerdict::Status::dominates;
  v.note = exact ? "exact atom-wise ratio check"
                 : "approximate: monotone-ratio check on a quantile grid";
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (double x : evaluation_points(d1, d2)) {
    const double f1 = d1.cdf(x);
    if (f1 <= 0.0) continue;
    const double ratio = d2.cdf(x) / f1;
    if (!std::isnan(prev) && ratio > prev + 1e-12 * std::max(1.0, prev)) {
      v.status = OrderVerdict::Status::fails;
      v.fails_at = x;
      return v;
    }
    prev = ratio;
  }
  return v;
}

OrderVerdict fsd_dominates(const RiskAversionDistribution& d1,
                           const RiskAversionDistribution& d2) {
  if (!both_have_cdf(d1, d2))
    return inapplicable("first-order dominance needs closed-form CDFs");
  OrderVerdict v;
  v.status = OrderVerdict::Status::dominates;
  v.note = d1.is_atomic() && d2.is_atomic() ? "exact atom-wise check"
                                            : "approximate: quantile grid";
  for (double x : evaluation_points(d1, d2)) {
    if (d1.cdf(x) > d2.cdf(x) + 1e-12) {
      v.status = OrderVerdict::Status::fails;
      v.fails_at = x;
      return v;
    }
  }
  return v;
}

RiskAversionDistribution quantile_discretization(
    const RiskAversionDistribution& dist, int n) {
  const auto* g = dist.as<GammaLaw>();
  if (g == nullptr)
    throw DomainError("quantile discretization is implemented for gamma laws");
  if (n < 1) throw DomainError("discretization needs n >= 1");
  // Conditional mean on [q_i, q_{i+1}] is n * shape * scale * (P(shape+1, .)
  // increment), which telescopes to the exact mean.
  std::vector<double> points, probs;
  double lower = 0.0;
  for (int i = 0; i < n; ++i) {
    const double upper =
        i + 1 == n ? 1.0
                   : boost::math::gamma_p(
                         g->shape + 1.0,
                         boost::math::gamma_p_inv(g->shape, double(i + 1) / n));
    points.push_back(n * g->shape * g->scale * (upper - lower));
    probs.push_back(1.0 / n);
    lower = upper;
  }
  double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& p : probs) p /= total;
  return RiskAversionDistribution::discrete(std::move(points), std::move(probs));
}

}  // namespace eqport
