#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ptspec/grid.hpp"
#include "ptspec/partition.hpp"
#include "ptspec/spectrum.hpp"
#include "ptspec/transform.hpp"

namespace ptspec {

/// Scalar function of the energy lambda.
using EnergyFunction = std::function<cplx(double)>;
/// Scalar function of the frequency k (energy k^2).
using FrequencySymbol = std::function<cplx(double)>;

struct MultiplierSpec {
  std::string id;
  EnergyFunction m;
  /// Cutoff supported off 0 used by the C^alpha norm; defaults to phi.
  std::function<double(double)> chi;
  double chi_lo = 0.5;
  double chi_hi = 2.0;
  double alpha = 1.0;
  bool real_valued = true;
};

namespace multipliers {

MultiplierSpec identity();
/// lambda / (1 + lambda), a Mihlin symbol.
MultiplierSpec mihlin();
/// |lambda|^{i beta}.
MultiplierSpec imaginary_power(double beta);
/// m(lambda) = lambda; unbounded, only for band-limited tests.
MultiplierSpec energy();
/// Heat semigroup e^{-t lambda}.
MultiplierSpec heat(double t);
/// Lookup by id: "one", "mihlin", "ipow:<beta>", "energy", "heat:<t>".
MultiplierSpec by_name(const std::string& id);

}  // namespace multipliers

/// Dense kernel K(x_i, y_l), row-major, on a square grid.
struct KernelMatrix {
  std::vector<cplx> entries;
  std::size_t n = 0;
  int j = 0;
  std::string multiplier_id;
  int nu = 0;

  cplx at(std::size_t i, std::size_t l) const { return entries[i * n + l]; }
  double max_hermitian_defect() const;
  double max_abs_diff(const KernelMatrix& other) const;
};

/// Nodes needed to resolve band j on a box of half-width L:
/// max(64, ceil(16 * 2^{j/2} * L / pi)).
std::size_t required_band_nodes(int j, double half_width);

/// Quadrature on |k| in [2^{(j-1)/2}, 2^{(j+1)/2}] meeting required_band_nodes.
KQuadrature band_quadrature(int j, const Grid& grid);
/// Quadrature on |k| <= 2^{(j+1)/2} (support of Phi_j(k^2)).
KQuadrature lowpass_quadrature(int j, const Grid& grid);

/// k -> m(k^2) phi_j(k^2). Holds references to spec and partition.
FrequencySymbol band_symbol(const MultiplierSpec& spec, const DyadicPartition& partition, int j);

/// Integral kernel of an a.c. multiplier with frequency symbol g on a grid:
///   K(x, y) = (1/2pi) int g(k) e(x,k) conj(e(y,k)) dk.
/// The wave product is a polynomial in k times e^{ik(x-y)}, so K is assembled
/// from the lag profiles G_n(r) = (1/2pi) int g(k) k^n prod_j(j^2+k^2)^{-1} e^{ikr} dk.
class LagKernel {
 public:
  LagKernel(int nu, const Grid& grid, const FrequencySymbol& symbol, const KQuadrature& quad);

  int nu() const { return nu_; }
  const Grid& grid() const { return grid_; }

  cplx operator()(std::size_t i, std::size_t l) const;
  ComplexGridFunction column(std::size_t l) const;
  /// G_n at lag r = offset * h.
  cplx profile(int n, long offset) const;

 private:
  int nu_;
  Grid grid_;
  std::size_t n_;
  std::vector<cplx> profiles_;  // [(n) * (2N-1) + offset + N - 1]
  std::vector<double> alpha_;   // alpha_b(tanh x_i)
};

/// K_j for (m phi_j)(H) E_ac. Without an explicit quadrature the band rule is
/// used; an explicit one with too few nodes raises ResolutionError.
KernelMatrix multiplier_kernel(int nu, const MultiplierSpec& spec, const DyadicPartition& partition,
                               int j, const Grid& grid,
                               const std::optional<KQuadrature>& quad = std::nullopt);

/// Free (nu = 0) band profile (1/2pi) int m(k^2) phi_j(k^2) e^{ikr} dk by
/// piecewise Gauss-Kronrod quadrature of the cosine form.
class FreeProfile {
 public:
  FreeProfile(const MultiplierSpec& spec, const DyadicPartition& partition, int j, double max_r);
  cplx operator()(double r) const;

 private:
  std::vector<double> nodes_;
  std::vector<cplx> weighted_;
};

KernelMatrix free_kernel_oracle(const MultiplierSpec& spec, const DyadicPartition& partition, int j,
                                const Grid& grid);

struct ApplyOptions {
  bool include_bound_states = false;
  /// When set, m is truncated to m * sum_j phi_j and applied band by band.
  const DyadicPartition* partition = nullptr;
};

/// m(H) f: optional bound-state sum plus F* m(k^2) F f.
ComplexGridFunction apply_multiplier(int nu, const MultiplierSpec& spec, std::span<const double> f,
                                     const ApplyOptions& options, const Grid& grid,
                                     const KQuadrature& quad);

struct NormSampling {
  int l_min = -20;
  int l_max = 20;
  int samples = 4096;
};

/// C(m) = ||m||_inf + max_l [ sup |chi m(2^l .)| + sup |(chi m(2^l .))'| ].
double multiplier_norm(const MultiplierSpec& spec, const NormSampling& sampling = {});
/// The bracketed per-scale term for a single lambda.
double scaled_c1_norm(const MultiplierSpec& spec, double lambda, int samples = 4096);

}  // namespace ptspec
