#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ptspec/grid.hpp"
#include "ptspec/partition.hpp"
#include "ptspec/transform.hpp"

namespace ptspec {

struct SquareFunctionResult {
  GridFunction values;
  /// ||phi_j(H) f||_2 for j = j_min .. j_max.
  std::vector<double> per_band_norms;
  int j_min = 0;
  int j_max = 0;
  /// ||sum_m <f,psi_m> psi_m||_2, the part removed before banding.
  double bound_state_norm = 0.0;
};

struct SquareFunctionOptions {
  /// Remove the bound-state components before applying the bands.
  bool project_bound_states = true;
};

/// Applies one spectral band of H to f: F* g F f on the band's own quadrature.
class BandOperator {
 public:
  BandOperator(int nu, const Grid& grid);

  const SpectralBasis& basis() const { return basis_; }

  /// phi_j(H) f (a.c. part).
  ComplexGridFunction phi(const DyadicPartition& p, int j, std::span<const cplx> f) const;
  /// Phi_j(H) f (a.c. part), the low-pass block.
  ComplexGridFunction low(const DyadicPartition& p, int j, std::span<const cplx> f) const;

 private:
  Grid grid_;
  SpectralBasis basis_;
};

/// Sf = (sum_j |phi_j(H) f|^2)^{1/2} over the partition range.
SquareFunctionResult square_function(int nu, std::span<const double> f,
                                     const DyadicPartition& partition, const Grid& grid,
                                     const SquareFunctionOptions& options = {});

/// ||Sf||_p / ||f_ac||_p with f_ac the a.c. projection of f; p in [1.25, 4].
double lp_ratio(int nu, std::span<const double> f, double p, const DyadicPartition& partition,
                const Grid& grid);
/// Same ratio from a precomputed square function.
double lp_ratio(const SquareFunctionResult& sf, std::span<const double> f_ac, double p,
                const Grid& grid);

/// Fraction of the a.c. spectral energy (1/2pi) int |F f_ac|^2 dk with k^2 outside the
/// covered annulus [2^{j_min}, 2^{j_max}], relative to ||f_ac||_2^2. The high tail is
/// integrated up to min(pi/h, 4 * 2^{j_max/2}).
double spectral_tail_fraction(int nu, std::span<const double> f_ac, const DyadicPartition& partition,
                              const Grid& grid);

/// Q f = {Phi_{j_min-1}(H) f, phi_j(H) f : j in range}, each member held as its
/// spectral coefficients on the band's quadrature.
struct BandFamily {
  int j_min = 0;
  std::vector<KQuadrature> rules;       // [0] is the low-pass block
  std::vector<std::vector<cplx>> coeffs;
};

BandFamily q_operator(const SpectralBasis& basis, std::span<const double> f,
                      const DyadicPartition& partition);
/// R {f_j} = Phi_{j_min}(H) f_low + sum_j psi_j(H) f_j.
ComplexGridFunction r_operator(const SpectralBasis& basis, const BandFamily& family,
                               const DyadicPartition& partition);

/// ||R Q f - f_ac||_2 / ||f_ac||_2 with f_ac the a.c. projection of f.
/// Returns 0 for f_ac = 0 (nothing to reconstruct).
double q_r_roundtrip(int nu, std::span<const double> f, const DyadicPartition& partition,
                     const Grid& grid);

nlohmann::json lp_report_json(int nu, double p, const std::string& function_id, double ratio,
                              const SquareFunctionResult& sf);

}  // namespace ptspec
