#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ptspec/grid.hpp"
#include "ptspec/polyrec.hpp"
#include "ptspec/spectrum.hpp"

namespace ptspec {

/// Nodes and weights of a composite Gauss-Legendre rule in the frequency k.
struct KQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
  double k_max = 0.0;

  std::size_t size() const { return nodes.size(); }

  /// n_nodes / points_per_panel equal panels on [-k_max, k_max].
  static KQuadrature uniform(double k_max, std::size_t n_nodes, int points_per_panel = 2);

  /// Panels on +-[k_lo, k_hi] only (a spectral band); panel width <= max_width.
  static KQuadrature band(double k_lo, double k_hi, double max_width, int points_per_panel = 4);

  /// Symmetric rule on [-k_max, k_max] whose panels shrink geometrically towards
  /// k = 0 (width <= rel * |k|) down to k_floor, and are at most max_width wide.
  static KQuadrature graded(double k_floor, double k_max, double max_width, double rel = 0.25,
                            int points_per_panel = 4);

  /// Largest gap between consecutive nodes.
  double max_node_gap() const;
};

/// Panel width that resolves e^{ikx} across [-L, L].
double resolving_panel_width(const Grid& grid);

struct SpectralCoefficients {
  std::vector<cplx> values;
  int nu = 0;
  /// Set when the input does not decay at the box edge.
  std::optional<std::string> warning;
  double tail_bound = 0.0;
};

/// Precomputed evaluator of the distorted Fourier transform of H_nu on a grid.
///
/// Forward: (Ff)(k) = int conj(e(x,k)) f(x) dx by trapezoid quadrature.
/// Adjoint: (F*c)(x) = (1/2pi) sum_q w_q e(x,k_q) c_q.
/// A node at k = 0 uses the one-sided limit of e, whose outer product equals
/// the analytic kernel density there.
class SpectralBasis {
 public:
  SpectralBasis(int nu, const Grid& grid);

  int nu() const { return family_.nu(); }
  const Grid& grid() const { return grid_; }
  const WaveFamily& family() const { return family_; }

  std::vector<cplx> forward(std::span<const cplx> f, const KQuadrature& quad) const;
  std::vector<cplx> forward(std::span<const double> f, const KQuadrature& quad) const;
  ComplexGridFunction adjoint(std::span<const cplx> coeffs, const KQuadrature& quad) const;

  /// F* diag(g) F f, i.e. g applied on the absolutely continuous part.
  ComplexGridFunction apply(std::span<const cplx> f, std::span<const cplx> g,
                            const KQuadrature& quad) const;

 private:
  Grid grid_;
  WaveFamily family_;
  std::vector<double> alpha_;  // alpha_b(tanh x_i) at [i * (nu+1) + b]
};

SpectralCoefficients forward(int nu, std::span<const double> f, const KQuadrature& quad,
                             const Grid& grid);
ComplexGridFunction adjoint_apply(int nu, const SpectralCoefficients& coeffs,
                                  const KQuadrature& quad, const Grid& grid);

/// Projection of f onto the bound states, sum_m <f, psi_m> psi_m.
GridFunction bound_projection(std::span<const double> f, const std::vector<BoundState>& states,
                              const Grid& grid);

/// ||F*Ff + sum_m <f,psi_m> psi_m - f||_2 / ||f||_2.
double completeness_defect(int nu, std::span<const double> f, const Grid& grid,
                           const KQuadrature& quad);

void write_coefficients_csv(std::ostream& os, const SpectralCoefficients& c, const KQuadrature& quad);

}  // namespace ptspec
