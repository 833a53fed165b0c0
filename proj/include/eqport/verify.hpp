#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "eqport/equilibrium.hpp"

namespace eqport {

/// Philox4x32-10 counter-based generator.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Counter block(Counter ctr, Key key);
};

/// Two standard normals for (seed, path, index) via Box-Muller.
std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t path,
                                      std::uint32_t index);

struct SimConfig {
  std::size_t paths = 200000;
  std::uint64_t seed = 20240601;
  // Log-wealth is simulated exactly over this many aggregated segments.
  std::size_t time_steps = 64;
  // Gauss nodes for continuous laws of R.
  int gauss_nodes = 64;
  // Importance-sampling mixture size, including the untilted component.
  std::size_t mixture_components = 8;
  bool parallel = true;
};

/// Nodes (gamma, weight) of a quadrature rule over the law of R.
std::vector<std::pair<double, double>> quadrature_over_law(
    const RiskAversionDistribution& dist, int gauss_nodes);

struct McEstimate {
  double value = 1.0;
  double stderr_ = 0.0;
  std::size_t paths = 0;
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<double> tilts;
};

/// Weighted certainty equivalent of terminal wealth from time t (a grid
/// point of the curve), initial wealth 1.
McEstimate mc_objective(const StrategyCurve& curve, const MarketModel& market,
                        const RiskAversionDistribution& dist, double t,
                        const SimConfig& sim = {});

/// Same estimator from per-segment log-wealth drift and variance.
McEstimate mc_from_segments(const std::vector<double>& drift,
                            const std::vector<double>& variance,
                            const RiskAversionDistribution& dist,
                            const SimConfig& sim = {});

/// Zero exposure on the grid: J0 = 1 everywhere.
StrategyCurve zero_strategy(const MarketModel& market, const TimeGrid& grid);

/// Exposure multiplied by `factor`; v, y and J0 are recomputed from the new
/// exposure by integration in t.
StrategyCurve scale_exposure(const StrategyCurve& curve, const MarketModel& market,
                             const RiskAversionDistribution& dist, double factor);

struct PerturbationProbe {
  double t;
  Eigen::VectorXd k;
  std::vector<double> eps;

  /// Ladder 2^-3 ... 2^-15 times (T - t).
  static PerturbationProbe standard(double t, Eigen::VectorXd k, double horizon);
};

struct SlopeReport {
  std::vector<double> eps;
  std::vector<double> slope;
  double extrapolated = 0.0;  // +-infinity when the ladder diverges
  bool diverging = false;
  double j0 = 1.0;
};

/// (J(perturbed) - J) / eps in closed form for a constant direction k on
/// [t, t + eps]; order-2 Richardson on the three smallest eps. A ladder whose
/// last differences keep one sign without shrinking is reported as diverging.
SlopeReport perturbation_slope(const StrategyCurve& curve, const MarketModel& market,
                               const RiskAversionDistribution& dist,
                               const PerturbationProbe& probe);

struct ProbeResult {
  double t;
  Eigen::VectorXd k;
  double slope;
  double j0;
};

struct CertificateReport {
  bool pass = false;
  double worst_slope = 0.0;  // largest slope / max(1, J0)
  ProbeResult worst;
  std::vector<ProbeResult> probes;
  std::uint64_t seed = 0;
  double tol = 0.0;
};

/// Necessary-condition check: random constant directions (uniform angle,
/// log-uniform magnitude in [1e-3, 10]) at random grid times.
CertificateReport equilibrium_certificate(const StrategyCurve& curve,
                                          const MarketModel& market,
                                          const RiskAversionDistribution& dist,
                                          std::size_t directions = 100,
                                          std::size_t times = 10,
                                          std::uint64_t seed = 20240601,
                                          double tol = 1e-6);

}  // namespace eqport
