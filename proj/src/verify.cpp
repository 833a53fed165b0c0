#include "eqport/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <omp.h>

#include "eqport/errors.hpp"
#include "eqport/quadrature.hpp"
#include "parallel.hpp"

namespace eqport {

namespace {

constexpr std::size_t kBlock = 4096;

std::uint32_t mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi) {
  const std::uint64_t p = std::uint64_t(a) * std::uint64_t(b);
  hi = static_cast<std::uint32_t>(p >> 32);
  return static_cast<std::uint32_t>(p);
}

double to_unit(std::uint32_t hi, std::uint32_t lo) {
  // 53 random bits mapped into (0, 1).
  const std::uint64_t bits = ((std::uint64_t(hi) << 32) | lo) >> 11;
  return (double(bits) + 0.5) * 0x1.0p-53;
}

// Linear exposure on one grid cell. A cell ending where the market
// coefficients change keeps its left value throughout.
struct Cell {
  double t0, t1;
  Eigen::VectorXd al, ar;
  std::size_t seg;
};

Cell cell_at(const StrategyCurve& c, const MarketModel& m, std::size_t i) {
  Cell cell{c.t[i], c.t[i + 1], c.a[i], c.a[i + 1], m.segment_index(c.t[i])};
  if (c.t[i + 1] < m.horizon() && m.segment_index(c.t[i + 1]) != cell.seg)
    cell.ar = cell.al;
  return cell;
}

// int |a|^2 and int a.lambda over [s0, s1] inside a cell.
void cell_moments(const Cell& cell, const MarketModel& m, double s0, double s1,
                  double& var, double& gain) {
  const double w = cell.t1 - cell.t0;
  auto at = [&](double s) -> Eigen::VectorXd {
    const double u = w > 0.0 ? (s - cell.t0) / w : 0.0;
    return (1.0 - u) * cell.al + u * cell.ar;
  };
  const Eigen::VectorXd l = at(s0), r = at(s1);
  const double ds = s1 - s0;
  const Eigen::VectorXd& lam = m.segments()[cell.seg].lambda;
  var = ds * (l.squaredNorm() + l.dot(r) + r.squaredNorm()) / 3.0;
  gain = ds * 0.5 * (l + r).dot(lam);
}

std::size_t grid_index(const StrategyCurve& c, double t, double horizon) {
  const auto it = std::lower_bound(c.t.begin(), c.t.end(), t - 1e-12 * horizon);
  if (it == c.t.end() || std::abs(*it - t) > 1e-12 * horizon)
    throw DomainError("time " + std::to_string(t) + " is not a grid point of the curve");
  return static_cast<std::size_t>(it - c.t.begin());
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, hi1;
    const std::uint32_t lo0 = mulhilo(M0, ctr[0], hi0);
    const std::uint32_t lo1 = mulhilo(M1, ctr[2], hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += W0;
    key[1] += W1;
  }
  return ctr;
}

std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t path,
                                      std::uint32_t index) {
  const auto r = Philox4x32::block(
      {index, static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32), 0u},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  const double u1 = to_unit(r[0], r[1]);
  const double u2 = to_unit(r[2], r[3]);
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

std::vector<std::pair<double, double>> quadrature_over_law(
    const RiskAversionDistribution& dist, int gauss_nodes) {
  if (const auto* g = dist.as<GammaLaw>())
    return quad::gauss_gamma_rule(g->shape, g->scale, gauss_nodes);
  if (dist.is_atomic()) return dist.atoms();
  throw PreconditionError("Monte Carlo needs an atomic or gamma law, got " +
                          dist.describe());
}

McEstimate mc_from_segments(const std::vector<double>& drift,
                            const std::vector<double>& variance,
                            const RiskAversionDistribution& dist,
                            const SimConfig& sim) {
  if (drift.size() != variance.size())
    throw DomainError("segment drift and variance differ in length");
  if (sim.paths < 1000) throw DomainError("at least 1000 paths are required");
  if (sim.mixture_components < 1) throw DomainError("mixture needs a component");

  const auto nodes = quadrature_over_law(dist, sim.gauss_nodes);
  double m = 0.0, S = 0.0;
  std::vector<double> sd(variance.size());
  for (std::size_t k = 0; k < variance.size(); ++k) {
    if (variance[k] < 0.0) throw DomainError("negative segment variance");
    m += drift[k];
    S += variance[k];
    sd[k] = std::sqrt(variance[k]);
  }

  McEstimate est;
  est.paths = sim.paths;
  est.seed = sim.seed;
  est.threads = sim.parallel ? omp_get_max_threads() : 1;
  if (S == 0.0) {
    est.value = std::exp(m);
    est.stderr_ = 0.0;
    return est;
  }

  // Tilts: an untilted component plus contribution-weighted quantiles of
  // c = 1 - gamma.
  const std::size_t K = sim.mixture_components;
  std::vector<std::pair<double, double>> contrib;
  double total = 0.0;
  double wmax = -INFINITY;
  for (const auto& [g, w] : nodes)
    if (w > 0.0) wmax = std::max(wmax, std::log(w) - 0.5 * g * S);
  for (const auto& [g, w] : nodes) {
    if (!(w > 0.0)) continue;
    const double c = std::exp(std::log(w) - 0.5 * g * S - wmax);
    contrib.emplace_back(1.0 - g, c);
    total += c;
  }
  std::sort(contrib.begin(), contrib.end());
  std::vector<double> tilt{0.0};
  for (std::size_t j = 1; j < K; ++j) {
    const double q = (double(j) - 0.5) / double(K - 1) * total;
    double cum = 0.0;
    double pick = contrib.back().first;
    for (const auto& [c, w] : contrib) {
      cum += w;
      if (cum >= q) {
        pick = c;
        break;
      }
    }
    tilt.push_back(pick);
  }
  est.tilts = tilt;

  const std::size_t P = sim.paths;
  const std::size_t steps = sd.size();
  std::vector<double> A(P), logL(P);
  const std::size_t blocks = (P + kBlock - 1) / kBlock;

  detail::for_each_index(blocks, sim.parallel, [&](std::size_t b) {
    const std::size_t end = std::min(P, (b + 1) * kBlock);
    for (std::size_t p = b * kBlock; p < end; ++p) {
      const double c = tilt[p % K];
      double a = 0.0;
      for (std::size_t k = 0; k < steps; k += 2) {
        const auto z = normal_pair(sim.seed, p, static_cast<std::uint32_t>(k / 2));
        a += sd[k] * (z.first + c * sd[k]);
        if (k + 1 < steps) a += sd[k + 1] * (z.second + c * sd[k + 1]);
      }
      A[p] = a;
      // Balance heuristic: L = 1 / mean_j exp(c_j A - c_j^2 S / 2).
      double top = -INFINITY;
      for (double cj : tilt) top = std::max(top, cj * a - 0.5 * cj * cj * S);
      double s = 0.0;
      for (double cj : tilt) s += std::exp(cj * a - 0.5 * cj * cj * S - top);
      logL[p] = -(top + std::log(s / double(K)));
    }
  });

  // Per node the integrand is kept in logs: log of X^c L scaled by E[X^c]
  // under the curve's lognormal law. The gamma = 1 node averages log X.
  const std::size_t n = nodes.size();
  auto log_value = [&](double c, std::size_t p) {
    return c * A[p] - 0.5 * c * c * S + logL[p];
  };
  std::vector<double> pmax(blocks * n, -INFINITY), psum(blocks * n, 0.0);
  detail::for_each_index(blocks, sim.parallel, [&](std::size_t b) {
    const std::size_t begin = b * kBlock, end = std::min(P, (b + 1) * kBlock);
    for (std::size_t i = 0; i < n; ++i) {
      const double c = 1.0 - nodes[i].first;
      double s = 0.0;
      if (c == 0.0) {
        for (std::size_t p = begin; p < end; ++p) s += (m + A[p]) * std::exp(logL[p]);
        psum[b * n + i] = s;
        continue;
      }
      double top = -INFINITY;
      for (std::size_t p = begin; p < end; ++p) top = std::max(top, log_value(c, p));
      for (std::size_t p = begin; p < end; ++p) s += std::exp(log_value(c, p) - top);
      pmax[b * n + i] = top;
      psum[b * n + i] = s;
    }
  });
  // Self-normalized by the mean likelihood ratio, so the error of each
  // log-moment scales with c and near-log nodes stay accurate.
  std::vector<double> lsum_block(blocks, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t end = std::min(P, (b + 1) * kBlock);
    for (std::size_t p = b * kBlock; p < end; ++p) lsum_block[b] += std::exp(logL[p]);
  }
  double lbar = 0.0;
  for (double x : lsum_block) lbar += x;
  lbar /= double(P);

  std::vector<double> log_mean(n), ratio(n, 0.0), coef(n, 0.0);
  double J = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = nodes[i].second;
    const double c = 1.0 - nodes[i].first;
    if (c == 0.0) {
      double s = 0.0;
      for (std::size_t b = 0; b < blocks; ++b) s += psum[b * n + i];
      ratio[i] = s / double(P) / lbar;
      const double ce = std::exp(ratio[i]);
      coef[i] = w * ce;
      J += w * ce;
      continue;
    }
    double top = -INFINITY;
    for (std::size_t b = 0; b < blocks; ++b) top = std::max(top, pmax[b * n + i]);
    double s = 0.0;
    for (std::size_t b = 0; b < blocks; ++b)
      s += psum[b * n + i] * std::exp(pmax[b * n + i] - top);
    if (!(s > 0.0) || !std::isfinite(top)) throw NumericError("moment estimate underflow");
    log_mean[i] = top + std::log(s / double(P));
    const double ce = std::exp(m + 0.5 * c * S + (log_mean[i] - std::log(lbar)) / c);
    coef[i] = w * ce / c;
    J += w * ce;
  }

  // Delta-method variance with stratified components.
  std::vector<double> G(P);
  detail::for_each_index(blocks, sim.parallel, [&](std::size_t b) {
    const std::size_t end = std::min(P, (b + 1) * kBlock);
    for (std::size_t p = b * kBlock; p < end; ++p) {
      const double lp = std::exp(logL[p]);
      double g = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (coef[i] == 0.0) continue;
        const double c = 1.0 - nodes[i].first;
        if (c == 0.0) g += coef[i] * (m + A[p] - ratio[i]) * lp / lbar;
        else g += coef[i] * (std::exp(log_value(c, p) - log_mean[i]) - lp / lbar);
      }
      G[p] = g;
    }
  });
  std::vector<double> gsum(K, 0.0), gcount(K, 0.0), gss(K, 0.0);
  for (std::size_t p = 0; p < P; ++p) {
    gsum[p % K] += G[p];
    gcount[p % K] += 1.0;
  }
  for (std::size_t p = 0; p < P; ++p) {
    const double d = G[p] - gsum[p % K] / gcount[p % K];
    gss[p % K] += d * d;
  }
  double var = 0.0;
  for (std::size_t j = 0; j < K; ++j)
    if (gcount[j] > 1.0) var += gss[j] / (gcount[j] - 1.0) * gcount[j];
  est.value = J;
  est.stderr_ = std::sqrt(var) / double(P);
  return est;
}

McEstimate mc_objective(const StrategyCurve& curve, const MarketModel& market,
                        const RiskAversionDistribution& dist, double t,
                        const SimConfig& sim) {
  const std::size_t i0 = grid_index(curve, t, market.horizon());
  const std::size_t cells = curve.size() - 1 - i0;
  const std::size_t steps = std::max<std::size_t>(1, std::min(sim.time_steps, cells));
  std::vector<double> drift(steps, 0.0), var(steps, 0.0);
  for (std::size_t j = 0; j < cells; ++j) {
    const Cell cell = cell_at(curve, market, i0 + j);
    double v, g;
    cell_moments(cell, market, cell.t0, cell.t1, v, g);
    const std::size_t k = j * steps / cells;
    var[k] += v;
    drift[k] += g - 0.5 * v;
  }
  return mc_from_segments(drift, var, dist, sim);
}

StrategyCurve zero_strategy(const MarketModel& market, const TimeGrid& grid) {
  StrategyCurve c;
  c.dimension = market.dimension();
  c.t = grid.t;
  const std::size_t n = grid.size();
  c.v.assign(n, 0.0);
  c.y.assign(n, 0.0);
  c.j0.assign(n, 1.0);
  c.a.assign(n, Eigen::VectorXd::Zero(c.dimension));
  c.pi.assign(n, Eigen::VectorXd::Zero(c.dimension));
  return c;
}

StrategyCurve scale_exposure(const StrategyCurve& curve, const MarketModel& market,
                             const RiskAversionDistribution& dist, double factor) {
  StrategyCurve c = curve;
  c.family_t0.reset();
  for (auto& a : c.a) a *= factor;
  for (auto& p : c.pi) p *= factor;
  const std::size_t n = c.size();
  c.v[n - 1] = 0.0;
  c.y[n - 1] = 0.0;
  for (std::size_t i = n - 1; i-- > 0;) {
    const Cell cell = cell_at(c, market, i);
    double v, g;
    cell_moments(cell, market, cell.t0, cell.t1, v, g);
    c.v[i] = c.v[i + 1] + v;
    c.y[i] = c.y[i + 1] + g;
  }
  for (std::size_t i = 0; i < n; ++i)
    c.j0[i] = std::exp(c.y[i] + dist.log_laplace(0.5 * c.v[i]));
  return c;
}

PerturbationProbe PerturbationProbe::standard(double t, Eigen::VectorXd k,
                                              double horizon) {
  PerturbationProbe p{t, std::move(k), {}};
  for (int j = 3; j <= 15; ++j) p.eps.push_back(std::ldexp(horizon - t, -j));
  return p;
}

SlopeReport perturbation_slope(const StrategyCurve& curve, const MarketModel& market,
                               const RiskAversionDistribution& dist,
                               const PerturbationProbe& probe) {
  const double T = market.horizon();
  const std::size_t i0 = grid_index(curve, probe.t, T);
  if (i0 + 1 >= curve.size()) throw DomainError("perturbation needs t < T");
  if (probe.k.size() != market.dimension())
    throw DomainError("perturbation direction has the wrong dimension");
  const double v = curve.v[i0], y = curve.y[i0];
  const double log_j = y + dist.log_laplace(0.5 * v);
  SlopeReport r;
  r.j0 = std::exp(log_j);
  for (double eps : probe.eps) {
    if (!(eps > 0.0) || probe.t + eps > T * (1.0 + 1e-14))
      throw DomainError("perturbation width must lie in (0, T - t]");
    const double end = std::min(T, probe.t + eps);
    double dv = 0.0, dy = 0.0;
    for (std::size_t i = i0; i + 1 < curve.size() && curve.t[i] < end; ++i) {
      const Cell cell = cell_at(curve, market, i);
      const double s1 = std::min(end, cell.t1);
      const double ds = s1 - cell.t0;
      const Eigen::MatrixXd& sig = market.segments()[cell.seg].sigma;
      const Eigen::VectorXd& lam = market.segments()[cell.seg].lambda;
      const Eigen::VectorXd sk = sig.transpose() * probe.k;
      const double u = cell.t1 > cell.t0 ? ds / (cell.t1 - cell.t0) : 0.0;
      const Eigen::VectorXd amid = cell.al + 0.5 * u * (cell.ar - cell.al);
      dv += ds * (2.0 * amid.dot(sk) + sk.squaredNorm());
      dy += ds * sk.dot(lam);
    }
    const double log_new = y + dy + dist.log_laplace(0.5 * (v + dv));
    r.eps.push_back(eps);
    r.slope.push_back(r.j0 * std::expm1(log_new - log_j) / eps);
  }
  const std::size_t n = r.slope.size();
  // A convergent ladder has differences shrinking about twofold per halving.
  // Same-sign differences that do not shrink, well above rounding, mean the
  // slope diverges.
  if (n >= 4) {
    const double noise = 1e-8 * std::max(1.0, r.j0);
    const double d1 = r.slope[n - 3] - r.slope[n - 4];
    const double d2 = r.slope[n - 2] - r.slope[n - 3];
    const double d3 = r.slope[n - 1] - r.slope[n - 2];
    const bool same_sign = (d1 < 0 && d2 < 0 && d3 < 0) || (d1 > 0 && d2 > 0 && d3 > 0);
    if (same_sign && std::abs(d1) > noise && std::abs(d2) >= std::abs(d1) &&
        std::abs(d3) >= std::abs(d2)) {
      r.diverging = true;
      r.extrapolated = d3 < 0 ? -INFINITY : INFINITY;
      return r;
    }
  }
  // Richardson in halving steps on the three smallest widths.
  if (n >= 3 && std::abs(r.eps[n - 2] - 2.0 * r.eps[n - 1]) < 1e-12 * r.eps[n - 2] &&
      std::abs(r.eps[n - 3] - 4.0 * r.eps[n - 1]) < 1e-12 * r.eps[n - 3]) {
    const double r1 = 2.0 * r.slope[n - 1] - r.slope[n - 2];
    const double r2 = 2.0 * r.slope[n - 2] - r.slope[n - 3];
    r.extrapolated = (4.0 * r1 - r2) / 3.0;
  } else {
    r.extrapolated = r.slope.back();
  }
  return r;
}

CertificateReport equilibrium_certificate(const StrategyCurve& curve,
                                          const MarketModel& market,
                                          const RiskAversionDistribution& dist,
                                          std::size_t directions, std::size_t times,
                                          std::uint64_t seed, double tol) {
  if (curve.size() < 2) throw DomainError("certificate needs at least two grid points");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, curve.size() - 2);
  std::uniform_real_distribution<double> mag(-3.0, 1.0);
  std::normal_distribution<double> normal;
  const int d = market.dimension();
  CertificateReport rep;
  rep.seed = seed;
  rep.tol = tol;
  rep.worst_slope = -INFINITY;
  for (std::size_t ti = 0; ti < times; ++ti) {
    const double t = curve.t[pick(rng)];
    for (std::size_t di = 0; di < directions; ++di) {
      Eigen::VectorXd k(d);
      for (int c = 0; c < d; ++c) k[c] = normal(rng);
      while (k.norm() == 0.0)
        for (int c = 0; c < d; ++c) k[c] = normal(rng);
      k *= std::pow(10.0, mag(rng)) / k.norm();
      const auto s = perturbation_slope(curve, market, dist,
                                        PerturbationProbe::standard(t, k, market.horizon()));
      ProbeResult pr{t, k, s.extrapolated, s.j0};
      const double scaled = s.extrapolated / std::max(1.0, s.j0);
      if (scaled > rep.worst_slope) {
        rep.worst_slope = scaled;
        rep.worst = pr;
      }
      rep.probes.push_back(std::move(pr));
    }
  }
  rep.pass = rep.worst_slope <= tol;
  return rep;
}

}  // namespace eqport
