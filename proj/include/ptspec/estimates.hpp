#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ptspec/calculus.hpp"
#include "ptspec/grid.hpp"
#include "ptspec/partition.hpp"

namespace ptspec {

/// rho_j(x) = 2^{j/2} (1 + 2^{j/2}|x|)^{-1-eps} (dimension 1).
struct DecayProfile {
  double epsilon = 0.5;
  int j = 0;

  double operator()(double x) const;
  /// int rho_j over R = 2/eps, independent of j.
  double mass() const { return 2.0 / epsilon; }
};

/// mu = atom_weight * delta + <u>^m e^{-c|u|} du.
struct KernelMeasure {
  double atom_weight = 1.0;
  int density_power = 0;
  double density_rate = 1.0;
  bool has_density = true;

  static KernelMeasure delta();
  static KernelMeasure with_density(int m, double c, double atom_weight = 1.0);

  double density(double u) const;
  double total_mass() const;
  std::string label() const;
};

/// (rho_j * mu)(r) tabulated at lags r = d h, d = 0 .. n-1.
class SmoothedDecay {
 public:
  SmoothedDecay(const DecayProfile& profile, const KernelMeasure& measure, double h, std::size_t n);

  double at_lag(std::size_t d) const { return table_[d]; }
  double at(long offset) const { return table_[static_cast<std::size_t>(offset < 0 ? -offset : offset)]; }
  const std::vector<double>& table() const { return table_; }
  /// Largest relative increase between consecutive lags (0 for a decreasing table).
  double monotonicity_defect() const;

 private:
  std::vector<double> table_;
};

struct EstimateReport {
  std::string estimate_id;
  int nu = 0;
  std::string multiplier_id;
  std::map<std::string, double> params;
  std::map<std::string, double> constants;
  std::map<std::string, double> fitted_slopes;
  std::map<std::string, double> residuals;
  /// Per-j traces: label -> [(j, value)].
  std::map<std::string, std::vector<std::pair<int, double>>> traces;
  bool pass = false;
  std::string config_digest;
};

nlohmann::json to_json(const EstimateReport& r);
/// CSV rows "estimate_id,j,value" with the trace label appended to the id as id:label.
void write_trace_csv(std::ostream& os, const EstimateReport& r, bool header = true);

/// Sets config_digest from the id, nu, multiplier and params; a report with a
/// non-finite constant or slope is marked failing.
void finalize(EstimateReport& r);

/// 16 hex digits of FNV-1a over the canonical dump of the JSON value.
std::string config_digest(const nlohmann::json& value);

/// Phi_j(H)(x_i, y_l) assembled from lag profiles, optionally with the bound-state sum.
class LowpassKernel {
 public:
  LowpassKernel(int nu, const DyadicPartition& partition, int j, const Grid& grid,
                bool include_bound_states = true);
  cplx operator()(std::size_t i, std::size_t l) const;

 private:
  LagKernel ac_;
  std::vector<std::vector<double>> states_;
  std::vector<double> weights_;
};

struct DecayOptions {
  /// The kernel bounded is Phi_j(H) E_ac unless set.
  bool include_bound_states = false;
  /// Column stride for the y grid in the sup over pairs.
  std::size_t y_stride = 1;
  double slope_tolerance = 0.1;
};

/// c(j) = sup_{x,y} |Phi_j(H)(x,y)| / (rho_j * mu)(x - y). Passes when the slope of
/// ln c(j) against j is within the tolerance; the control flag `growing` records
/// whether c(j) increases across the range (slope > 0, last/first >= 1.5).
EstimateReport verify_integral_decay(int nu, const DyadicPartition& partition,
                                     const std::vector<int>& j_list, const KernelMeasure& measure,
                                     const DecayProfile& profile, const Grid& grid,
                                     const DecayOptions& options = {});

/// Smallest (m, c) in {0,1,2} x {0.5,1,2} (ordered by m, then c descending in
/// tail weight) for which verify_integral_decay passes; InsufficientDataError if none.
KernelMeasure fit_measure(int nu, const DyadicPartition& partition, const std::vector<int>& j_list,
                          const DecayProfile& profile, const Grid& grid);

/// Smallest C with max_{y in I}|Phi_j(H)(x,y)| <= C |I|^{-1} int_I (rho_j * mu)(x - z) dz
/// over all grid x and cubes I of length 2^{-j/2} centered at `centers`.
EstimateReport verify_cube_maxmin(int nu, const DyadicPartition& partition, int j,
                                  const KernelMeasure& measure, const DecayProfile& profile,
                                  const std::vector<double>& centers, const Grid& grid,
                                  bool include_bound_states = false);

struct KernelColumnOptions {
  std::vector<double> y_samples = {0.0};
};

/// W(j) = sup_y ||<2^{j/2}(x-y)>^alpha K_j(x,y)||_{L^2_x}, reported as W(j) / (2^{j/4} C(m));
/// passes when the slope of ln(W(j) / 2^{j/4}) against j is within 0.1.
EstimateReport verify_weighted_l2(int nu, const MultiplierSpec& spec,
                                  const DyadicPartition& partition, const std::vector<int>& j_list,
                                  double alpha, const Grid& grid,
                                  const KernelColumnOptions& options = {
                                      {-4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0}});

/// ||<2^{j/2} r>^alpha k_j||_2 for the free kernel k_j = (1/2pi) int g e^{ikr} dk with
/// g = m(k^2) phi_j(k^2), by Plancherel (alpha in {0, 1}).
double free_weighted_l2(const MultiplierSpec& spec, const DyadicPartition& partition, int j,
                        double alpha);

struct ScalingOptions {
  std::vector<double> y_samples = {0.0, 1.0};
  double slope_tolerance = 0.05;
  double min_r2 = 0.95;
  /// Bands for the derivative check; empty skips it.
  std::vector<int> derivative_j_list = {};
  std::vector<double> derivative_y = {0.0, 3.0};
};

/// Slopes of log2 of ||K_j(.,y)||_2, ||K_j(.,y)||_inf and ||(x-y)K_j(.,y)||_2 against j.
/// With derivative bands, fits D(j,y) = A 2^{j/4} + B 2^{-j/4} at the two derivative_y
/// points and requires B(y1)/B(y0) <= sech^2(y1)/sech^2(y0) and D(j,y0) > D(j,y1) for j <= -2.
EstimateReport kernel_norm_scaling(int nu, const MultiplierSpec& spec,
                                   const DyadicPartition& partition, const std::vector<int>& j_list,
                                   const Grid& grid, const ScalingOptions& options = {});

/// D(j, y) = ||(x-y) d/dy K_j(x, y)||_{L^2_x} on a box wide enough for band j.
double derivative_weighted_norm(int nu, const MultiplierSpec& spec,
                                const DyadicPartition& partition, int j, double y);

struct TailOptions {
  std::vector<double> y_samples = {-1.0, 0.0, 0.5, 2.0};
  /// Cube scales t = 2^{-l/2}, l = 0 .. t_levels-1.
  int t_levels = 7;
  double exponent_tolerance = 0.15;
  double uniformity_factor = 2.0;
};

/// T(j, t) = max_y int_{|x-y| >= 2t} |K(x, y)| dx, K the kernel of
/// (m phi_j)(H)(1 - Phi_{j_I}(H)) E_ac.
double tail_integral(int nu, const MultiplierSpec& spec, const DyadicPartition& partition, int j,
                     int j_ref, double t, const Grid& grid, const std::vector<double>& y_samples);

EstimateReport hormander_tail(int nu, const MultiplierSpec& spec, const DyadicPartition& partition,
                              int j_ref, double s, const Grid& grid, const TailOptions& options = {});

struct WeakOptions {
  double decades = 4.0;
  int levels_per_decade = 8;
  std::size_t min_cells = 50;
  double slope_tolerance = 0.1;
};

/// Envelope E(lambda) = sup_f sup_{lambda' >= lambda} lambda' |{|m(H)f| > lambda'}| / ||f||_1
/// on levels spanning `decades` below the highest level holding min_cells cells for
/// some member. R = sup E; the pass test is the slope of log E against log lambda.
/// m(H) is applied band by band with the bound states.
EstimateReport weak11_profile(int nu, const MultiplierSpec& spec,
                              const std::vector<GridFunction>& family,
                              const DyadicPartition& partition, const Grid& grid,
                              const WeakOptions& options = {});

/// Level-set profile of one output: pairs (lambda, lambda * |{|g| > lambda}|).
std::vector<std::pair<double, double>> level_profile(std::span<const cplx> g, const Grid& grid,
                                                     const WeakOptions& options);

/// L^1-normalized bump of width w centered at c (smooth_seed profile).
GridFunction normalized_bump(const Grid& grid, double center, double width);

}  // namespace ptspec
