#include "ptspec/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ptspec/error.hpp"
#include "ptspec/numerics.hpp"
#include "ptspec/spectrum.hpp"

namespace ptspec {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

double japanese(double z) { return std::sqrt(1.0 + z * z); }

struct Fit {
  double slope = 0.0;
  double r2 = 0.0;
  double rms = 0.0;
};

Fit log2_fit(const std::vector<double>& x, const std::vector<double>& v) {
  std::vector<double> y(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) y[i] = std::log2(v[i]);
  const auto f = fit_line(x, y, 4);
  return {f.slope, f.r2, f.residual_rms};
}

// Trend of ln v against x.
Fit ln_fit(const std::vector<double>& x, const std::vector<double>& v) {
  std::vector<double> y(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) y[i] = std::log(v[i]);
  const auto f = fit_line(x, y, 4);
  return {f.slope, f.r2, f.residual_rms};
}

std::vector<double> as_double(const std::vector<int>& js) { return {js.begin(), js.end()}; }

bool all_finite(const std::map<std::string, double>& m) {
  return std::all_of(m.begin(), m.end(), [](const auto& kv) { return std::isfinite(kv.second); });
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

double DecayProfile::operator()(double x) const {
  const double s = std::exp2(0.5 * j);
  return s * std::pow(1.0 + s * std::abs(x), -1.0 - epsilon);
}

KernelMeasure KernelMeasure::delta() {
  KernelMeasure m;
  m.has_density = false;
  return m;
}

KernelMeasure KernelMeasure::with_density(int m, double c, double atom_weight) {
  if (m < 0 || !(c > 0.0) || !(atom_weight >= 0.0))
    throw ArgumentError("KernelMeasure: need m >= 0, c > 0, atom weight >= 0");
  KernelMeasure k;
  k.atom_weight = atom_weight;
  k.density_power = m;
  k.density_rate = c;
  k.has_density = true;
  return k;
}

double KernelMeasure::density(double u) const {
  if (!has_density) return 0.0;
  return std::pow(japanese(u), density_power) * std::exp(-density_rate * std::abs(u));
}

double KernelMeasure::total_mass() const {
  if (!has_density) return atom_weight;
  auto f = [this](double u) { return density(u); };
  return atom_weight + 2.0 * GK::integrate(f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-13);
}

std::string KernelMeasure::label() const {
  if (!has_density) return fmt(atom_weight) + "*delta";
  return fmt(atom_weight) + "*delta+<u>^" + std::to_string(density_power) + "*exp(-" +
         fmt(density_rate) + "|u|)";
}

SmoothedDecay::SmoothedDecay(const DecayProfile& profile, const KernelMeasure& measure, double h,
                             std::size_t n)
    : table_(n) {
  const double s = std::exp2(-0.5 * profile.j);
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t d = 0; d < n; ++d) {
    const double r = static_cast<double>(d) * h;
    double v = measure.atom_weight * profile(r);
    if (measure.has_density) {
      auto f = [&](double u) { return profile(r - u) * measure.density(u); };
      std::vector<double> br = {0.0, r};
      for (double m : {1.0, 8.0, 64.0}) {
        br.push_back(r - m * s);
        br.push_back(r + m * s);
      }
      std::sort(br.begin(), br.end());
      br.erase(std::unique(br.begin(), br.end()), br.end());
      double sum = 0.0, err_total = 0.0, err = 0.0;
      sum += GK::integrate(f, -inf, br.front(), 15, 1e-12, &err);
      err_total += err;
      for (std::size_t t = 0; t + 1 < br.size(); ++t) {
        sum += GK::integrate(f, br[t], br[t + 1], 15, 1e-12, &err);
        err_total += err;
      }
      sum += GK::integrate(f, br.back(), inf, 15, 1e-12, &err);
      err_total += err;
      if (!(err_total <= 1e-8 * std::abs(sum) + 1e-300))
        throw ResolutionError("SmoothedDecay: convolution under-resolved at lag " + fmt(r) +
                              " (error estimate " + fmt(err_total) + ")");
      v += sum;
    }
    table_[d] = v;
  }
}

double SmoothedDecay::monotonicity_defect() const {
  double worst = 0.0;
  for (std::size_t d = 1; d < table_.size(); ++d)
    worst = std::max(worst, (table_[d] - table_[d - 1]) / table_[d - 1]);
  return worst;
}

nlohmann::json to_json(const EstimateReport& r) {
  auto finite_map = [](const std::map<std::string, double>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : m) j[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
    return j;
  };
  return {{"estimate_id", r.estimate_id},
          {"nu", r.nu},
          {"multiplier_id", r.multiplier_id},
          {"params", finite_map(r.params)},
          {"constants", finite_map(r.constants)},
          {"fitted_slopes", finite_map(r.fitted_slopes)},
          {"residuals", finite_map(r.residuals)},
          {"pass", r.pass},
          {"config_digest", r.config_digest}};
}

void write_trace_csv(std::ostream& os, const EstimateReport& r, bool header) {
  if (header) os << "estimate_id,j,value\n";
  os << std::setprecision(17);
  for (const auto& [label, rows] : r.traces)
    for (const auto& [j, v] : rows) os << r.estimate_id << ':' << label << ',' << j << ',' << v << '\n';
}

std::string config_digest(const nlohmann::json& value) {
  const std::string s = value.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

namespace {

void finish(EstimateReport& r) {
  nlohmann::json p = nlohmann::json::object();
  for (const auto& [k, v] : r.params) p[k] = v;
  r.config_digest =
      config_digest({{"estimate_id", r.estimate_id}, {"nu", r.nu}, {"multiplier_id", r.multiplier_id}, {"params", p}});
  if (!all_finite(r.constants) || !all_finite(r.fitted_slopes)) r.pass = false;
}

}  // namespace

void finalize(EstimateReport& r) { finish(r); }

namespace {

void grid_params(EstimateReport& r, const Grid& grid) {
  r.params["L"] = grid.half_width();
  r.params["n_points"] = static_cast<double>(grid.size());
}

}  // namespace

LowpassKernel::LowpassKernel(int nu, const DyadicPartition& partition, int j, const Grid& grid,
                             bool include_bound_states)
    : ac_(nu, grid,
          [&partition, j](double k) { return cplx(partition.Phi_j(j, k * k)); },
          lowpass_quadrature(j, grid)) {
  if (!include_bound_states) return;
  for (const auto& st : bound_states(nu, grid)) {
    const double w = partition.Phi_j(j, st.energy);
    if (w == 0.0) continue;
    states_.push_back(st.samples);
    weights_.push_back(w);
  }
}

cplx LowpassKernel::operator()(std::size_t i, std::size_t l) const {
  cplx v = ac_(i, l);
  for (std::size_t m = 0; m < states_.size(); ++m) v += weights_[m] * states_[m][i] * states_[m][l];
  return v;
}

namespace {

double decay_constant(const LowpassKernel& K, const SmoothedDecay& T, std::size_t n,
                      std::size_t y_stride) {
  double worst = 0.0;
  for (std::size_t l = 0; l < n; l += y_stride)
    for (std::size_t i = 0; i < n; ++i) {
      const long off = static_cast<long>(i) - static_cast<long>(l);
      worst = std::max(worst, std::abs(K(i, l)) / T.at(off));
    }
  return worst;
}

}  // namespace

EstimateReport verify_integral_decay(int nu, const DyadicPartition& partition,
                                     const std::vector<int>& j_list, const KernelMeasure& measure,
                                     const DecayProfile& profile, const Grid& grid,
                                     const DecayOptions& options) {
  EstimateReport r;
  r.estimate_id = "integral_decay";
  r.nu = nu;
  r.multiplier_id = "Phi";
  grid_params(r, grid);
  r.params["epsilon"] = profile.epsilon;
  r.params["atom_weight"] = measure.atom_weight;
  r.params["density_power"] = measure.has_density ? measure.density_power : -1;
  r.params["density_rate"] = measure.has_density ? measure.density_rate : 0.0;
  r.params["j_first"] = j_list.front();
  r.params["j_last"] = j_list.back();

  std::vector<double> cs;
  double sup = 0.0, mono = 0.0;
  for (int j : j_list) {
    DecayProfile pj = profile;
    pj.j = j;
    const SmoothedDecay T(pj, measure, grid.spacing(), grid.size());
    mono = std::max(mono, T.monotonicity_defect());
    const LowpassKernel K(nu, partition, j, grid, options.include_bound_states);
    const double c = decay_constant(K, T, grid.size(), std::max<std::size_t>(1, options.y_stride));
    cs.push_back(c);
    sup = std::max(sup, c);
    r.traces["c"].push_back({j, c});
  }
  const auto fit = ln_fit(as_double(j_list), cs);
  r.constants["sup_c"] = sup;
  r.constants["measure_mass"] = measure.total_mass();
  r.constants["decay_monotonicity_defect"] = mono;
  r.constants["growth_last_over_first"] = cs.back() / cs.front();
  r.constants["growing"] = (fit.slope > 0.0 && cs.back() / cs.front() >= 1.5) ? 1.0 : 0.0;
  r.fitted_slopes["ln_c_vs_j"] = fit.slope;
  r.fitted_slopes["log2_c_vs_j"] = fit.slope / std::log(2.0);
  r.residuals["ln_c_vs_j_rms"] = fit.rms;
  r.residuals["ln_c_vs_j_r2"] = fit.r2;
  r.params["include_bound_states"] = options.include_bound_states ? 1.0 : 0.0;
  r.pass = std::isfinite(sup) && std::abs(fit.slope) <= options.slope_tolerance;
  finish(r);
  return r;
}

KernelMeasure fit_measure(int nu, const DyadicPartition& partition, const std::vector<int>& j_list,
                          const DecayProfile& profile, const Grid& grid) {
  for (int m : {0, 1, 2})
    for (double c : {2.0, 1.0, 0.5}) {
      const auto mu = KernelMeasure::with_density(m, c);
      if (verify_integral_decay(nu, partition, j_list, mu, profile, grid).pass) return mu;
    }
  throw InsufficientDataError("fit_measure: no candidate measure passes");
}

EstimateReport verify_cube_maxmin(int nu, const DyadicPartition& partition, int j,
                                  const KernelMeasure& measure, const DecayProfile& profile,
                                  const std::vector<double>& centers, const Grid& grid,
                                  bool include_bound_states) {
  EstimateReport r;
  r.estimate_id = "cube_maxmin";
  r.nu = nu;
  r.multiplier_id = "Phi";
  grid_params(r, grid);
  r.params["j"] = j;
  r.params["epsilon"] = profile.epsilon;
  r.params["atom_weight"] = measure.atom_weight;
  r.params["density_power"] = measure.has_density ? measure.density_power : -1;
  r.params["density_rate"] = measure.has_density ? measure.density_rate : 0.0;

  DecayProfile pj = profile;
  pj.j = j;
  const std::size_t n = grid.size();
  const SmoothedDecay T(pj, measure, grid.spacing(), n);
  const LowpassKernel K(nu, partition, j, grid, include_bound_states);
  r.params["include_bound_states"] = include_bound_states ? 1.0 : 0.0;
  const double len = std::exp2(-0.5 * j);
  const auto xs = grid.points();
  double cmax = 0.0, cmin = std::numeric_limits<double>::infinity(), point = 0.0;
  for (std::size_t ci = 0; ci < centers.size(); ++ci) {
    const double a = centers[ci] - 0.5 * len, b = centers[ci] + 0.5 * len;
    const auto first = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), a) - xs.begin());
    const auto last = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), b) - xs.begin());
    if (last <= first) throw ResolutionError("verify_cube_maxmin: cube holds no grid points");
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double kmax = 0.0, tsum = 0.0;
      for (std::size_t l = first; l < last; ++l) {
        const long off = static_cast<long>(i) - static_cast<long>(l);
        const double kv = std::abs(K(i, l));
        kmax = std::max(kmax, kv);
        tsum += T.at(off);
        point = std::max(point, kv / T.at(off));
      }
      c = std::max(c, kmax / (tsum / static_cast<double>(last - first)));
    }
    r.constants["C_center_" + std::to_string(ci)] = c;
    r.params["center_" + std::to_string(ci)] = centers[ci];
    cmax = std::max(cmax, c);
    cmin = std::min(cmin, c);
  }
  r.constants["C"] = cmax;
  r.constants["C_spread"] = cmax / cmin;
  r.constants["pointwise_constant"] = point;
  r.constants["C_over_pointwise"] = cmax / point;
  r.pass = std::isfinite(cmax);
  finish(r);
  return r;
}

EstimateReport verify_weighted_l2(int nu, const MultiplierSpec& spec,
                                  const DyadicPartition& partition, const std::vector<int>& j_list,
                                  double alpha, const Grid& grid, const KernelColumnOptions& options) {
  EstimateReport r;
  r.estimate_id = "weighted_l2";
  r.nu = nu;
  r.multiplier_id = spec.id;
  grid_params(r, grid);
  r.params["alpha"] = alpha;
  r.params["j_first"] = j_list.front();
  r.params["j_last"] = j_list.back();
  const double cm = multiplier_norm(spec);
  std::vector<double> ratio;
  double sup = 0.0;
  for (int j : j_list) {
    const LagKernel lk(nu, grid, band_symbol(spec, partition, j), band_quadrature(j, grid));
    const double scale = std::exp2(0.5 * j);
    double w = 0.0;
    for (double y : options.y_samples) {
      const std::size_t l = grid.nearest(y);
      const auto col = lk.column(l);
      ComplexGridFunction weighted(col.size());
      for (std::size_t i = 0; i < col.size(); ++i)
        weighted[i] = std::pow(japanese(scale * (grid.x(i) - grid.x(l))), alpha) * col[i];
      w = std::max(w, l2_norm(grid, weighted));
    }
    const double normalized = w / std::exp2(0.25 * j);
    r.traces["W"].push_back({j, w});
    r.traces["W_over_2^{j/4}"].push_back({j, normalized});
    ratio.push_back(normalized);
    sup = std::max(sup, normalized / cm);
  }
  const auto fit = ln_fit(as_double(j_list), ratio);
  r.constants["C_m"] = cm;
  r.constants["sup_W_over_2^{j/4}C_m"] = sup;
  r.fitted_slopes["ln_W_over_2^{j/4}_vs_j"] = fit.slope;
  r.residuals["ln_W_over_2^{j/4}_rms"] = fit.rms;
  r.pass = std::isfinite(sup) && std::abs(fit.slope) <= 0.1;
  finish(r);
  return r;
}

double free_weighted_l2(const MultiplierSpec& spec, const DyadicPartition& partition, int j,
                        double alpha) {
  if (alpha != 0.0 && alpha != 1.0)
    throw ArgumentError("free_weighted_l2: closed form available for alpha in {0, 1}");
  const double lo = std::exp2(0.5 * (j - 1)), hi = std::exp2(0.5 * (j + 1));
  auto g = [&](double k) { return spec.m(k * k) * partition.phi_j(j, k * k); };
  const double d = 1e-4 * (hi - lo);
  auto dg = [&](double k) {
    // Richardson-extrapolated central difference.
    const cplx d1 = (g(k + d) - g(k - d)) / (2.0 * d);
    const cplx d2 = (g(k + 0.5 * d) - g(k - 0.5 * d)) / d;
    return (4.0 * d2 - d1) / 3.0;
  };
  double a0 = 0.0, a1 = 0.0;
  constexpr int pieces = 16;
  for (int p = 0; p < pieces; ++p) {
    const double a = lo + (hi - lo) * p / pieces, b = lo + (hi - lo) * (p + 1) / pieces;
    a0 += GK::integrate([&](double k) { return std::norm(g(k)); }, a, b, 15, 1e-14);
    if (alpha == 1.0) a1 += GK::integrate([&](double k) { return std::norm(dg(k)); }, a, b, 15, 1e-14);
  }
  // Both signs of k contribute equally.
  const double k2 = 2.0 * a0 / (2.0 * kPi);
  const double rk2 = 2.0 * a1 / (2.0 * kPi);
  return std::sqrt(k2 + std::exp2(j) * rk2);
}

EstimateReport kernel_norm_scaling(int nu, const MultiplierSpec& spec,
                                   const DyadicPartition& partition, const std::vector<int>& j_list,
                                   const Grid& grid, const ScalingOptions& options) {
  if (j_list.size() < 4) throw InsufficientDataError("kernel_norm_scaling: need at least 4 bands");
  EstimateReport r;
  r.estimate_id = "kernel_norm_scaling";
  r.nu = nu;
  r.multiplier_id = spec.id;
  grid_params(r, grid);
  r.params["j_first"] = j_list.front();
  r.params["j_last"] = j_list.back();
  std::map<double, std::vector<double>> n2, ninf, nx;
  for (int j : j_list) {
    const LagKernel lk(nu, grid, band_symbol(spec, partition, j), band_quadrature(j, grid));
    for (double y : options.y_samples) {
      const std::size_t l = grid.nearest(y);
      const auto col = lk.column(l);
      double sup = 0.0;
      ComplexGridFunction moment(col.size());
      for (std::size_t i = 0; i < col.size(); ++i) {
        sup = std::max(sup, std::abs(col[i]));
        moment[i] = (grid.x(i) - grid.x(l)) * col[i];
      }
      const double a = l2_norm(grid, col), c = l2_norm(grid, moment);
      n2[y].push_back(a);
      ninf[y].push_back(sup);
      nx[y].push_back(c);
      const std::string tag = "(y=" + fmt(y) + ")";
      r.traces["L2" + tag].push_back({j, a});
      r.traces["Linf" + tag].push_back({j, sup});
      r.traces["xL2" + tag].push_back({j, c});
    }
  }
  const auto xj = as_double(j_list);
  bool ok = true;
  auto check = [&](const std::string& name, const std::vector<double>& v, double target) {
    const auto fit = log2_fit(xj, v);
    r.fitted_slopes[name] = fit.slope;
    r.residuals[name + "_r2"] = fit.r2;
    r.residuals[name + "_rms"] = fit.rms;
    if (!(std::abs(fit.slope - target) <= options.slope_tolerance) || !(fit.r2 >= options.min_r2))
      ok = false;
  };
  for (double y : options.y_samples) {
    const std::string tag = "(y=" + fmt(y) + ")";
    check("L2" + tag, n2[y], 0.25);
    check("Linf" + tag, ninf[y], 0.5);
    check("xL2" + tag, nx[y], -0.25);
  }

  if (!options.derivative_j_list.empty()) {
    // D(j,y) ~ A(y) 2^{j/4} + B(y) 2^{-j/4} at low j, with B(y) proportional to sech^2 y.
    std::vector<double> bs;
    for (double y : options.derivative_y) {
      const std::string tag = "(y=" + fmt(y) + ")";
      double s11 = 0, s12 = 0, s22 = 0, t1 = 0, t2 = 0;
      for (int j : options.derivative_j_list) {
        const double d = derivative_weighted_norm(nu, spec, partition, j, y);
        r.traces["dyL2" + tag].push_back({j, d});
        const double u = std::exp2(0.25 * j), v = std::exp2(-0.25 * j);
        // Relative least squares: weight each equation by 1/d.
        const double w = 1.0 / (d * d);
        s11 += w * u * u;
        s12 += w * u * v;
        s22 += w * v * v;
        t1 += w * u * d;
        t2 += w * v * d;
      }
      const double det = s11 * s22 - s12 * s12;
      const double A = (t1 * s22 - t2 * s12) / det, B = (s11 * t2 - s12 * t1) / det;
      r.constants["dy_A" + tag] = A;
      r.constants["dy_B" + tag] = B;
      bs.push_back(B);
    }
    if (options.derivative_y.size() >= 2) {
      // B(y) is bounded by a multiple of sech^2 y, so B(y1)/B(y0) may not exceed the
      // sech^2 ratio, and the y0 curve dominates at every low band.
      const double y0 = options.derivative_y[0], y1 = options.derivative_y[1];
      const double bound = std::pow(std::cosh(y0) / std::cosh(y1), 2.0);
      r.constants["dy_B_rel"] = bs[1] / bs[0];
      r.constants["dy_sech2_rel"] = bound;
      const auto& lo_trace = r.traces["dyL2(y=" + fmt(y0) + ")"];
      const auto& hi_trace = r.traces["dyL2(y=" + fmt(y1) + ")"];
      bool dominates = true;
      for (std::size_t t = 0; t < lo_trace.size(); ++t) {
        const double q = lo_trace[t].second / hi_trace[t].second;
        r.traces["dy_ratio"].push_back({lo_trace[t].first, q});
        if (lo_trace[t].first <= -2 && !(q > 1.0)) dominates = false;
      }
      const bool bound_ok = bs[0] > 0.0 && bs[1] / bs[0] <= bound;
      r.constants["dy_bound_ok"] = bound_ok && dominates ? 1.0 : 0.0;
      if (!(bound_ok && dominates)) ok = false;
    }
  }
  r.pass = ok;
  finish(r);
  return r;
}

double derivative_weighted_norm(int nu, const MultiplierSpec& spec,
                                const DyadicPartition& partition, int j, double y) {
  // The kernel spreads over ~2^{-j/2} and varies on the unit scale through tanh.
  const double scale = std::exp2(-0.5 * j);
  const double L = std::max(20.0, 24.0 * scale) + std::abs(y);
  const double h = std::min(0.02, scale / 24.0);
  const Grid grid = Grid::with_spacing(L, h);
  const LagKernel lk(nu, grid, band_symbol(spec, partition, j), band_quadrature(j, grid));
  const std::size_t l = grid.nearest(y);
  if (l < 2 || l + 2 >= grid.size()) throw RangeError("derivative_weighted_norm: y too close to the edge");
  const double hh = grid.spacing();
  ComplexGridFunction v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const cplx d = (lk(i, l - 2) - 8.0 * lk(i, l - 1) + 8.0 * lk(i, l + 1) - lk(i, l + 2)) / (12.0 * hh);
    v[i] = (grid.x(i) - grid.x(l)) * d;
  }
  return l2_norm(grid, v);
}

double tail_integral(int nu, const MultiplierSpec& spec, const DyadicPartition& partition, int j,
                     int j_ref, double t, const Grid& grid, const std::vector<double>& y_samples) {
  const FrequencySymbol sym = [&](double k) {
    const double lam = k * k;
    const double w = partition.phi_j(j, lam) * (1.0 - partition.Phi_j(j_ref, lam));
    return w == 0.0 ? cplx(0.0) : spec.m(lam) * w;
  };
  const LagKernel lk(nu, grid, sym, band_quadrature(j, grid));
  double worst = 0.0;
  for (double y : y_samples) {
    const std::size_t l = grid.nearest(y);
    CompensatedSum<double> s;
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (std::abs(grid.x(i) - grid.x(l)) >= 2.0 * t) s += grid.weight(i) * std::abs(lk(i, l));
    worst = std::max(worst, s.value());
  }
  return worst;
}

namespace {

// Tail integrals for one band at several (j_ref, t) pairs, sharing kernels whose
// symbol does not depend on j_ref (j >= j_ref + 2 keeps 1 - Phi_{j_ref} = 1 on the band).
class TailTable {
 public:
  TailTable(int nu, const MultiplierSpec& spec, const DyadicPartition& partition, const Grid& grid,
            std::vector<double> ys)
      : nu_(nu), spec_(spec), partition_(partition), grid_(grid), ys_(std::move(ys)) {}

  double operator()(int j, int j_ref, double t) {
    const int key_ref = j >= j_ref + 2 ? std::numeric_limits<int>::min() : j_ref;
    const auto key = std::make_pair(j, key_ref);
    auto it = cols_.find(key);
    if (it == cols_.end()) {
      const int ref = key_ref == std::numeric_limits<int>::min() ? j - 2 : j_ref;
      const FrequencySymbol sym = [this, j, ref](double k) {
        const double lam = k * k;
        const double w = partition_.phi_j(j, lam) * (1.0 - partition_.Phi_j(ref, lam));
        return w == 0.0 ? cplx(0.0) : spec_.m(lam) * w;
      };
      const LagKernel lk(nu_, grid_, sym, band_quadrature(j, grid_));
      std::vector<std::vector<double>> cols;
      for (double y : ys_) {
        const std::size_t l = grid_.nearest(y);
        std::vector<double> c(grid_.size());
        for (std::size_t i = 0; i < grid_.size(); ++i) c[i] = std::abs(lk(i, l));
        cols.push_back(std::move(c));
      }
      it = cols_.emplace(key, std::move(cols)).first;
    }
    double worst = 0.0;
    for (std::size_t yi = 0; yi < ys_.size(); ++yi) {
      const std::size_t l = grid_.nearest(ys_[yi]);
      CompensatedSum<double> s;
      for (std::size_t i = 0; i < grid_.size(); ++i)
        if (std::abs(grid_.x(i) - grid_.x(l)) >= 2.0 * t) s += grid_.weight(i) * it->second[yi][i];
      worst = std::max(worst, s.value());
    }
    return worst;
  }

 private:
  int nu_;
  const MultiplierSpec& spec_;
  const DyadicPartition& partition_;
  const Grid& grid_;
  std::vector<double> ys_;
  std::map<std::pair<int, int>, std::vector<std::vector<double>>> cols_;
};

}  // namespace

EstimateReport hormander_tail(int nu, const MultiplierSpec& spec, const DyadicPartition& partition,
                              int j_ref, double s, const Grid& grid, const TailOptions& options) {
  if (!(s > 0.5)) throw ArgumentError("hormander_tail: need s > 1/2");
  EstimateReport r;
  r.estimate_id = "hormander_tail";
  r.nu = nu;
  r.multiplier_id = spec.id;
  grid_params(r, grid);
  r.params["j_ref"] = j_ref;
  r.params["s"] = s;
  r.params["t_levels"] = options.t_levels;
  TailTable table(nu, spec, partition, grid, options.y_samples);

  const double t = std::exp2(-0.5 * j_ref);
  std::vector<double> us, ts;
  double tmax = 0.0;
  for (int j = j_ref; j <= partition.j_max(); ++j) {
    const double v = table(j, j_ref, t);
    r.traces["T(t=2^{-j_ref/2})"].push_back({j, v});
    tmax = std::max(tmax, v);
    us.push_back(0.5 * (j - j_ref));
    ts.push_back(v);
  }
  // Fit over the bands whose tails stand above the quadrature floor.
  std::vector<double> fu, ft;
  for (std::size_t q = 0; q < us.size(); ++q)
    if (ts[q] > 1e-10 * tmax) {
      fu.push_back(us[q]);
      ft.push_back(ts[q]);
    }
  double slope = std::numeric_limits<double>::quiet_NaN(), r2 = 0.0, rms = 0.0;
  if (fu.size() >= 4) {
    const auto fit = log2_fit(fu, ft);
    slope = fit.slope;
    r2 = fit.r2;
    rms = fit.rms;
  }
  const double target = 0.5 - s;
  r.fitted_slopes["tail_exponent"] = slope;
  r.residuals["tail_exponent_r2"] = r2;
  r.residuals["tail_exponent_rms"] = rms;
  r.constants["target_exponent"] = target;
  r.constants["bands_in_fit"] = static_cast<double>(fu.size());
  // Fitted C: smallest constant with T <= C (2^{j/2} t)^{1/2-s} on the sampled bands.
  double cfit = 0.0;
  for (std::size_t q = 0; q < us.size(); ++q) cfit = std::max(cfit, ts[q] / std::exp2(target * us[q]));
  r.constants["C_fit"] = cfit;

  double amax = 0.0, amin = std::numeric_limits<double>::infinity();
  for (int l = 0; l < options.t_levels; ++l) {
    const double tl = std::exp2(-0.5 * l);
    double sum = 0.0;
    for (int j = l; j <= partition.j_max(); ++j) sum += table(j, l, tl);
    r.traces["A(t=2^{-l/2})"].push_back({l, sum});
    amax = std::max(amax, sum);
    amin = std::min(amin, sum);
  }
  r.constants["A"] = amax;
  r.constants["A_spread"] = amax / amin;
  const bool exponent_ok = std::abs(slope - target) <= options.exponent_tolerance;
  const bool uniform_ok = amax / amin <= options.uniformity_factor;
  r.constants["exponent_ok"] = exponent_ok ? 1.0 : 0.0;
  r.constants["uniform_ok"] = uniform_ok ? 1.0 : 0.0;
  r.pass = exponent_ok && uniform_ok && std::isfinite(amax);
  finish(r);
  return r;
}

namespace {

std::vector<double> sorted_magnitudes(std::span<const cplx> g) {
  std::vector<double> mags(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) mags[i] = std::abs(g[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  return mags;
}

// Highest level whose set {|g| > lambda} still holds min_cells cells.
double top_level(const std::vector<double>& mags, std::size_t min_cells) {
  if (mags.size() <= min_cells)
    throw ResolutionError("level_profile: grid has fewer cells than the level-set minimum");
  return mags[min_cells];
}

std::vector<double> level_grid(double top, const WeakOptions& options) {
  if (!(top > 0.0)) throw DegenerateInputError("level_profile: output vanishes");
  const int steps = static_cast<int>(std::lround(options.decades * options.levels_per_decade));
  std::vector<double> out;
  for (int d = 0; d <= steps; ++d)
    out.push_back(top * std::pow(10.0, -static_cast<double>(d) / options.levels_per_decade));
  return out;
}

double level_measure(const std::vector<double>& mags, double lam, double h) {
  // mags is descending: count of entries strictly above lam.
  const auto cnt = std::lower_bound(mags.begin(), mags.end(), lam, std::greater<>()) - mags.begin();
  return h * static_cast<double>(cnt);
}

}  // namespace

std::vector<std::pair<double, double>> level_profile(std::span<const cplx> g, const Grid& grid,
                                                     const WeakOptions& options) {
  const auto mags = sorted_magnitudes(g);
  std::vector<std::pair<double, double>> out;
  for (double lam : level_grid(top_level(mags, options.min_cells), options))
    out.emplace_back(lam, lam * level_measure(mags, lam, grid.spacing()));
  return out;
}

EstimateReport weak11_profile(int nu, const MultiplierSpec& spec,
                              const std::vector<GridFunction>& family,
                              const DyadicPartition& partition, const Grid& grid,
                              const WeakOptions& options) {
  if (family.empty()) throw ArgumentError("weak11_profile: empty family");
  EstimateReport r;
  r.estimate_id = "weak11";
  r.nu = nu;
  r.multiplier_id = spec.id;
  grid_params(r, grid);
  r.params["j_min"] = partition.j_min();
  r.params["j_max"] = partition.j_max();
  r.params["decades"] = options.decades;
  r.params["min_cells"] = static_cast<double>(options.min_cells);
  r.params["family_size"] = static_cast<double>(family.size());
  const KQuadrature unused;
  std::vector<std::vector<double>> mags;
  std::vector<double> l1s;
  double top = 0.0;
  for (const auto& f : family) {
    const double l1 = l1_norm(grid, f);
    if (!(l1 > 0.0)) throw DegenerateInputError("weak11_profile: member with zero L1 norm");
    const auto g = apply_multiplier(nu, spec, f, {.include_bound_states = true, .partition = &partition},
                                    grid, unused);
    mags.push_back(sorted_magnitudes(g));
    l1s.push_back(l1);
    top = std::max(top, top_level(mags.back(), options.min_cells));
  }
  // Common levels from the highest resolved level of any member; the envelope is
  // the running sup over members and over all higher levels.
  const auto levels = level_grid(top, options);
  std::vector<double> xl, yl;
  std::vector<double> member_env(family.size(), 0.0);
  double env = 0.0;
  for (double lam : levels) {
    for (std::size_t q = 0; q < family.size(); ++q) {
      const double v = lam * level_measure(mags[q], lam, grid.spacing()) / l1s[q];
      member_env[q] = std::max(member_env[q], v);
      env = std::max(env, v);
    }
    if (env > 0.0) {
      xl.push_back(std::log10(lam));
      yl.push_back(std::log10(env));
    }
  }
  const auto fit = fit_line(xl, yl, 4);
  double rmin = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < family.size(); ++q) {
    r.traces["R"].push_back({static_cast<int>(q), member_env[q]});
    rmin = std::min(rmin, member_env[q]);
  }
  const double cm = multiplier_norm(spec);
  r.constants["R"] = env;
  r.constants["R_spread"] = env / rmin;
  r.constants["C_m"] = cm;
  r.constants["R_over_C_m"] = env / cm;
  r.constants["top_level"] = top;
  r.fitted_slopes["envelope_slope"] = fit.slope;
  r.residuals["envelope_rms"] = fit.residual_rms;
  r.pass = std::isfinite(env) && std::abs(fit.slope) <= options.slope_tolerance;
  finish(r);
  return r;
}

GridFunction normalized_bump(const Grid& grid, double center, double width) {
  if (!(width > 0.0)) throw ArgumentError("normalized_bump: width must be positive");
  auto f = grid.sample([&](double x) { return smooth_seed(2.0 * (x - center) / width); });
  const double l1 = l1_norm(grid, f);
  if (!(l1 > 0.0)) throw ResolutionError("normalized_bump: bump falls between grid points");
  for (auto& v : f) v /= l1;
  return f;
}

}  // namespace ptspec
