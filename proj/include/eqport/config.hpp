#pragma once

#include <cstddef>

namespace eqport {

// Every numerical tolerance and default used by the engine lives here so a
// single config file (see spec_parse.hpp) can override them.
struct NumericConfig {
  // Quadrature of 1/h^2 and 1/h.
  double quad_rel_tol = 1e-10;
  double quad_abs_floor = 1e-14;
  // Upper end of the tabulated range of H and of the H(inf) tail fit.
  double y_max = 1e6;
  // |H(v) - z| <= inverse_rel_tol * max(1, z)
  double inverse_rel_tol = 1e-12;
  // Exponent fit window for h near zero (infinite-mean laws).
  double zero_fit_lo = 1e-8;
  double zero_fit_hi = 1e-4;

  // Default number of uniform intervals in a time grid.
  std::size_t grid_intervals = 2000;
  // Default number of eta samples when enumerating an equilibrium family.
  std::size_t eta_points = 11;

  // Reverse hazard check for continuous laws.
  std::size_t rh_grid_points = 2001;
  double rh_quantile_lo = 1e-6;

  double crossing_time_tol = 1e-9;
  double reversal_t_start = 1.0;
  double reversal_t_max = 16384.0;
  double reversal_rel_width = 1e-6;

  // Fixed-point residual allowed in solver output.
  double fixed_point_tol = 1e-8;
  // Certificate threshold: slope <= certificate_tol * max(1, J0).
  double certificate_tol = 1e-6;
};

inline const NumericConfig& default_config() {
  static const NumericConfig cfg{};
  return cfg;
}

}  // namespace eqport
