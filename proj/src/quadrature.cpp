#include "eqport/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "eqport/errors.hpp"

namespace eqport::quad {

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr int kMaxDepth = 60;

}  // namespace

Estimate gauss_kronrod15(const std::function<double(double)>& f, double a,
                         double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    kronrod += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  return {kronrod * h, std::abs((kronrod - gauss) * h)};
}

namespace {

double adapt(const std::function<double(double)>& f, double a, double b,
             double rel_tol, double abs_floor, int depth) {
  const Estimate e = gauss_kronrod15(f, a, b);
  if (e.error <= std::max(rel_tol * std::abs(e.value), abs_floor) ||
      depth >= kMaxDepth || b - a <= 1e-15 * std::max(1.0, std::abs(a))) {
    return e.value;
  }
  const double m = 0.5 * (a + b);
  return adapt(f, a, m, rel_tol, abs_floor, depth + 1) +
         adapt(f, m, b, rel_tol, abs_floor, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, double abs_floor) {
  if (b <= a) return 0.0;
  return adapt(f, a, b, rel_tol, abs_floor, 0);
}

CumulativeIntegral::CumulativeIntegral(std::function<double(double)> f,
                                       double upper, double rel_tol,
                                       double abs_floor,
                                       double singular_exponent)
    : f_(std::move(f)),
      rel_tol_(rel_tol),
      abs_floor_(abs_floor),
      singular_(singular_exponent) {
  if (!(upper > 0.0)) throw DomainError("cumulative integral needs upper > 0");
  if (singular_ < 0.0 || singular_ >= 1.0)
    throw DomainError("singular exponent must lie in [0,1)");
  // Geometric seed panels keep early refinement cheap on long ranges.
  std::vector<double> seeds{0.0};
  for (double x = std::ldexp(1.0, -10); x < upper; x *= 2.0) seeds.push_back(x);
  seeds.push_back(upper);
  knots_.push_back(0.0);
  cum_.push_back(0.0);
  for (std::size_t i = 0; i + 1 < seeds.size(); ++i)
    refine(seeds[i], seeds[i + 1], 0);
}

double CumulativeIntegral::panel_partial(std::size_t i, double y) const {
  const double a = knots_[i];
  if (y <= a) return 0.0;
  if (i == 0 && singular_ > 0.0) {
    const double k = 1.0 / (1.0 - singular_);
    auto g = [&](double u) {
      if (u <= 0.0) return 0.0;
      return f_(std::pow(u, k)) * k * std::pow(u, k - 1.0);
    };
    return integrate(g, 0.0, std::pow(y, 1.0 / k), rel_tol_, abs_floor_);
  }
  return integrate(f_, a, y, rel_tol_, abs_floor_);
}

void CumulativeIntegral::refine(double a, double b, int depth) {
  const bool singular_panel = singular_ > 0.0 && a == 0.0;
  Estimate e{};
  if (singular_panel) {
    const double k = 1.0 / (1.0 - singular_);
    auto g = [&](double u) {
      if (u <= 0.0) return 0.0;
      return f_(std::pow(u, k)) * k * std::pow(u, k - 1.0);
    };
    e = gauss_kronrod15(g, 0.0, std::pow(b, 1.0 / k));
  } else {
    e = gauss_kronrod15(f_, a, b);
  }
  const bool ok = e.error <= std::max(rel_tol_ * std::abs(e.value), abs_floor_);
  if (ok || depth >= kMaxDepth) {
    knots_.push_back(b);
    cum_.push_back(cum_.back() + e.value);
    return;
  }
  // The singular panel is split in u-space so both halves stay smooth.
  double m = 0.5 * (a + b);
  if (singular_panel) {
    const double k = 1.0 / (1.0 - singular_);
    m = std::pow(0.5 * std::pow(b, 1.0 / k), k);
    // Only the left half remains singular; its left end is 0 again.
    refine(0.0, m, depth + 1);
    refine(m, b, depth + 1);
    return;
  }
  refine(a, m, depth + 1);
  refine(m, b, depth + 1);
}

double CumulativeIntegral::operator()(double y) const {
  if (y <= 0.0) return 0.0;
  if (y >= knots_.back()) {
    if (y == knots_.back()) return cum_.back();
    throw DomainError("cumulative integral evaluated beyond its tabulated range");
  }
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), y);
  const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  return cum_[i] + panel_partial(i, y);
}

double CumulativeIntegral::inverse(double z, double abs_tol) const {
  if (z <= 0.0) return 0.0;
  if (z > cum_.back())
    throw DomainError("cumulative integral inverse beyond tabulated range");
  // First knot whose cumulative value reaches z.
  const auto it = std::lower_bound(cum_.begin(), cum_.end(), z);
  const std::size_t hi = static_cast<std::size_t>(it - cum_.begin());
  if (cum_[hi] == z) {
    // Leftmost knot attaining z.
    std::size_t j = hi;
    while (j > 0 && cum_[j - 1] == z) --j;
    return knots_[j];
  }
  const std::size_t i = hi - 1;
  double lo = knots_[i], up = knots_[hi];
  const double base = cum_[i];
  double x = lo + (up - lo) * (z - base) / (cum_[hi] - base);
  for (int iter = 0; iter < 200; ++iter) {
    const double r = base + panel_partial(i, x) - z;
    if (std::abs(r) <= abs_tol) return x;
    if (r > 0.0) up = x;
    else lo = x;
    const double d = f_(x);
    double next = (d > 0.0 && std::isfinite(d)) ? x - r / d : 0.5 * (lo + up);
    if (!(next > lo && next < up)) next = 0.5 * (lo + up);
    if (up - lo <= 4.0 * std::numeric_limits<double>::epsilon() * up) return next;
    x = next;
  }
  throw NumericError("cumulative integral inverse did not converge");
}

std::vector<std::pair<double, double>> gauss_gamma_rule(double shape,
                                                        double scale,
                                                        int nodes) {
  if (nodes < 1) throw DomainError("gauss rule needs at least one node");
  // Golub-Welsch on the Jacobi matrix of generalized Laguerre polynomials
  // with parameter shape - 1.
  const double a = shape - 1.0;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(nodes, nodes);
  for (int k = 0; k < nodes; ++k) {
    jac(k, k) = 2.0 * k + a + 1.0;
    if (k + 1 < nodes) {
      const double off = std::sqrt((k + 1.0) * (k + 1.0 + a));
      jac(k, k + 1) = off;
      jac(k + 1, k) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  if (es.info() != Eigen::Success)
    throw NumericError("eigen decomposition failed for gauss rule");
  std::vector<std::pair<double, double>> rule;
  double total = 0.0;
  for (int k = 0; k < nodes; ++k) {
    const double v0 = es.eigenvectors()(0, k);
    rule.emplace_back(es.eigenvalues()(k) * scale, v0 * v0);
    total += v0 * v0;
  }
  for (auto& r : rule) r.second /= total;
  return rule;
}

}  // namespace eqport::quad
