#pragma once

#include <iosfwd>
#include <vector>

#include "ptspec/grid.hpp"

namespace ptspec {

/// Associated Legendre function P_l^m(s), Condon-Shortley phase, |s| <= 1.
double assoc_legendre(int l, int m, double s);

/// Normalized eigenfunction psi_m of H_nu with eigenvalue -m^2.
struct BoundState {
  int m = 0;
  double energy = 0.0;
  GridFunction samples;
  /// psi_m(x) = norm_constant * P_nu^m(tanh x); the sign fixes the orientation.
  double norm_constant = 0.0;
  int nu = 0;

  /// Evaluate off-grid with the same normalization as `samples`.
  double operator()(double x) const;
};

struct SpectralData {
  int nu = 0;
  std::vector<double> point_spectrum;
  /// The continuous spectrum is always [0, inf); recorded as its left endpoint.
  double continuous_spectrum_start = 0.0;
};

SpectralData spectral_data(int nu);

/// The nu bound states, m = 1..nu, normalized by grid quadrature. Each is
/// oriented so that its first nonvanishing derivative at 0 is positive.
std::vector<BoundState> bound_states(int nu, const Grid& grid);

/// W(k) = -2(-1)^nu ik prod_{l=1}^nu (l + ik)/(l - ik).
cplx wronskian_eval(int nu, double k);

/// ||(-D^2 + V + m^2) psi_m||_2 on the grid interior (central differences).
double eigen_residual(const BoundState& state, int nu, const Grid& grid);

/// CSV: a "# nu=..,L=..,n_points=.." line, then x,psi_1,...,psi_nu.
void write_bound_states_csv(std::ostream& os, int nu, const Grid& grid,
                            const std::vector<BoundState>& states);

}  // namespace ptspec
