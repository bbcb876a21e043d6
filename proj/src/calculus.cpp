#include "ptspec/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ptspec/error.hpp"
#include "ptspec/numerics.hpp"

namespace ptspec {

namespace multipliers {

namespace {

MultiplierSpec with_default_chi(MultiplierSpec s) {
  if (!s.chi) s.chi = [](double x) { return smooth_seed(x) - smooth_seed(2.0 * x); };
  return s;
}

}  // namespace

MultiplierSpec identity() {
  return with_default_chi({"one", [](double) { return cplx(1.0); }, {}, 0.5, 2.0, 1.0, true});
}

MultiplierSpec mihlin() {
  return with_default_chi(
      {"mihlin", [](double l) { return cplx(l / (1.0 + std::abs(l))); }, {}, 0.5, 2.0, 1.0, true});
}

MultiplierSpec imaginary_power(double beta) {
  auto m = [beta](double l) {
    const double a = std::abs(l);
    if (a == 0.0) return cplx(std::nan(""), std::nan(""));
    return std::polar(1.0, beta * std::log(a));
  };
  std::string id = "ipow:" + std::to_string(beta);
  id.erase(id.find_last_not_of('0') + 1);
  if (id.back() == '.') id.pop_back();
  return with_default_chi({id, m, {}, 0.5, 2.0, 1.0, beta == 0.0});
}

MultiplierSpec energy() {
  return with_default_chi({"energy", [](double l) { return cplx(l); }, {}, 0.5, 2.0, 1.0, true});
}

MultiplierSpec heat(double t) {
  return with_default_chi({"heat:" + std::to_string(t),
                           [t](double l) { return cplx(std::exp(-t * l)); }, {}, 0.5, 2.0, 1.0,
                           true});
}

MultiplierSpec by_name(const std::string& id) {
  if (id == "one") return identity();
  if (id == "mihlin") return mihlin();
  if (id == "energy") return energy();
  auto param = [&](const std::string& prefix) {
    try {
      return std::stod(id.substr(prefix.size()));
    } catch (const std::exception&) {
      throw ArgumentError("unknown multiplier id: " + id);
    }
  };
  if (id.rfind("ipow:", 0) == 0) return imaginary_power(param("ipow:"));
  if (id.rfind("heat:", 0) == 0) return heat(param("heat:"));
  throw ArgumentError("unknown multiplier id: " + id);
}

}  // namespace multipliers

double KernelMatrix::max_hermitian_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = i; l < n; ++l)
      worst = std::max(worst, std::abs(at(i, l) - std::conj(at(l, i))));
  return worst;
}

double KernelMatrix::max_abs_diff(const KernelMatrix& other) const {
  if (other.n != n) throw ArgumentError("KernelMatrix: size mismatch");
  double worst = 0.0;
  for (std::size_t t = 0; t < entries.size(); ++t)
    worst = std::max(worst, std::abs(entries[t] - other.entries[t]));
  return worst;
}

std::size_t required_band_nodes(int j, double half_width) {
  const double n = std::ceil(16.0 * std::exp2(0.5 * j) * half_width / kPi);
  return std::max<std::size_t>(256, static_cast<std::size_t>(n));
}

namespace {

constexpr int kBandPoints = 4;

std::size_t panels_for(std::size_t nodes_per_side) {
  return std::max<std::size_t>(1, (nodes_per_side + kBandPoints - 1) / kBandPoints);
}

}  // namespace

KQuadrature band_quadrature(int j, const Grid& grid) {
  const double lo = std::exp2(0.5 * (j - 1)), hi = std::exp2(0.5 * (j + 1));
  const std::size_t per_side = (required_band_nodes(j, grid.half_width()) + 1) / 2;
  const double width = (hi - lo) / static_cast<double>(panels_for(per_side));
  return KQuadrature::band(lo, hi, width * (1.0 + 1e-12), kBandPoints);
}

KQuadrature lowpass_quadrature(int j, const Grid& grid) {
  const double hi = std::exp2(0.5 * (j + 1));
  // Same node density as the band rule; an even panel count keeps k = 0 off the nodes.
  const double density = static_cast<double>(required_band_nodes(j, grid.half_width())) /
                         (2.0 * (std::exp2(0.5 * (j + 1)) - std::exp2(0.5 * (j - 1))));
  std::size_t panels = panels_for(static_cast<std::size_t>(std::ceil(density * hi)));
  panels = std::max<std::size_t>(panels, 16);
  return KQuadrature::uniform(hi, 2 * panels * kBandPoints, kBandPoints);
}

LagKernel::LagKernel(int nu, const Grid& grid, const FrequencySymbol& symbol,
                     const KQuadrature& quad)
    : nu_(nu), grid_(grid), n_(grid.size()) {
  const WaveFamily fam(nu);
  const auto stride = static_cast<std::size_t>(nu) + 1;
  alpha_.resize(n_ * stride);
  for (std::size_t i = 0; i < n_; ++i)
    fam.poly().z_coefficients(std::tanh(grid.x(i)),
                              std::span<double>(alpha_.data() + i * stride, stride));

  const std::size_t n_prof = 2 * static_cast<std::size_t>(nu) + 1;
  const std::size_t width = 2 * n_ - 1;
  const double h = grid.spacing();
  std::vector<CompensatedSum<cplx>> acc(n_prof * width);
  std::vector<cplx> c(n_prof);
  for (std::size_t q = 0; q < quad.size(); ++q) {
    const double k = quad.nodes[q];
    const cplx g = symbol(k);
    if (!std::isfinite(g.real()) || !std::isfinite(g.imag()))
      throw DomainError("LagKernel: symbol is not finite at k = " + std::to_string(k));
    if (g == cplx(0.0)) continue;
    const cplx base = quad.weights[q] * g * fam.product_normalization(k) / (2.0 * kPi);
    double kp = 1.0;
    for (std::size_t p = 0; p < n_prof; ++p) {
      c[p] = base * kp;
      kp *= k;
    }
    const cplx step = std::polar(1.0, k * h);
    cplx phase;
    for (std::size_t l = 0; l < n_; ++l) {
      if (l % 64 == 0)
        phase = std::polar(1.0, k * h * static_cast<double>(l));
      else
        phase *= step;
      for (std::size_t p = 0; p < n_prof; ++p) {
        acc[p * width + (n_ - 1) + l] += c[p] * phase;
        if (l != 0) acc[p * width + (n_ - 1) - l] += c[p] * std::conj(phase);
      }
    }
  }
  profiles_.resize(acc.size());
  for (std::size_t t = 0; t < acc.size(); ++t) profiles_[t] = acc[t].value();
}

cplx LagKernel::profile(int n, long offset) const {
  const std::size_t width = 2 * n_ - 1;
  return profiles_[static_cast<std::size_t>(n) * width +
                   static_cast<std::size_t>(offset + static_cast<long>(n_) - 1)];
}

cplx LagKernel::operator()(std::size_t i, std::size_t l) const {
  const auto stride = static_cast<std::size_t>(nu_) + 1;
  const double* ax = alpha_.data() + i * stride;
  const double* ay = alpha_.data() + l * stride;
  const long off = static_cast<long>(i) - static_cast<long>(l);
  // P(x,k) P(y,-k) = sum_{b,c} alpha_b(x) alpha_c(y) i^b (-i)^c k^{b+c}
  static constexpr cplx ipow[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
  cplx v = 0.0;
  for (std::size_t b = 0; b < stride; ++b) {
    for (std::size_t c = 0; c < stride; ++c) {
      const cplx phase = ipow[(b + 3 * c) % 4];
      v += ax[b] * ay[c] * phase * profile(static_cast<int>(b + c), off);
    }
  }
  return v;
}

ComplexGridFunction LagKernel::column(std::size_t l) const {
  ComplexGridFunction out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = (*this)(i, l);
  return out;
}

FrequencySymbol band_symbol(const MultiplierSpec& spec, const DyadicPartition& partition, int j) {
  return [&spec, &partition, j](double k) {
    const double lam = k * k;
    const double w = partition.phi_j(j, lam);
    return w == 0.0 ? cplx(0.0) : spec.m(lam) * w;
  };
}

namespace {

KernelMatrix dense_from(const LagKernel& lk, int nu, int j, const std::string& id) {
  KernelMatrix km;
  km.n = lk.grid().size();
  km.j = j;
  km.nu = nu;
  km.multiplier_id = id;
  km.entries.resize(km.n * km.n);
  for (std::size_t i = 0; i < km.n; ++i)
    for (std::size_t l = 0; l < km.n; ++l) km.entries[i * km.n + l] = lk(i, l);
  return km;
}

}  // namespace

KernelMatrix multiplier_kernel(int nu, const MultiplierSpec& spec, const DyadicPartition& partition,
                               int j, const Grid& grid, const std::optional<KQuadrature>& quad) {
  if (j < partition.j_min() || j > partition.j_max())
    throw RangeError("multiplier_kernel: band " + std::to_string(j) + " outside partition range");
  if (grid.size() > 4096)
    throw RangeError("multiplier_kernel: dense kernels are capped at 4096 grid points");
  KQuadrature rule = quad ? *quad : band_quadrature(j, grid);
  if (quad) {
    const double lo = std::exp2(0.5 * (j - 1)), hi = std::exp2(0.5 * (j + 1));
    std::size_t inside = 0;
    for (double k : rule.nodes)
      if (std::abs(k) >= lo && std::abs(k) <= hi) ++inside;
    const std::size_t need = required_band_nodes(j, grid.half_width());
    if (inside < need)
      throw ResolutionError("multiplier_kernel: band " + std::to_string(j) + " has " +
                            std::to_string(inside) + " quadrature nodes; " + std::to_string(need) +
                            " required");
  }
  const LagKernel lk(nu, grid, band_symbol(spec, partition, j), rule);
  return dense_from(lk, nu, j, spec.id);
}

FreeProfile::FreeProfile(const MultiplierSpec& spec, const DyadicPartition& partition, int j,
                         double max_r) {
  // Cosine form over k >= 0: (1/pi) int_a^b m(k^2) phi_j(k^2) cos(kr) dk, with
  // subintervals short enough that kr turns by at most half a radian.
  const double a = std::exp2(0.5 * (j - 1)), b = std::exp2(0.5 * (j + 1));
  const int pieces = std::max(16, static_cast<int>(std::ceil((b - a) * std::max(max_r, 1.0) * 2.0)));
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const auto& abs = GK::abscissa();
  const auto& wts = GK::weights();
  for (int p = 0; p < pieces; ++p) {
    const double lo = a + (b - a) * p / pieces, hi = a + (b - a) * (p + 1) / pieces;
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t t = 0; t < abs.size(); ++t) {
      for (int sgn : {-1, 1}) {
        if (abs[t] == 0.0 && sgn < 0) continue;
        const double k = mid + sgn * half * abs[t];
        const double lam = k * k;
        nodes_.push_back(k);
        weighted_.push_back(half * wts[t] * spec.m(lam) * partition.phi_j(j, lam) / kPi);
      }
    }
  }
}

cplx FreeProfile::operator()(double r) const {
  CompensatedSum<cplx> s;
  for (std::size_t t = 0; t < nodes_.size(); ++t) s += weighted_[t] * std::cos(nodes_[t] * r);
  return s.value();
}

KernelMatrix free_kernel_oracle(const MultiplierSpec& spec, const DyadicPartition& partition, int j,
                                const Grid& grid) {
  const std::size_t n = grid.size();
  const FreeProfile prof(spec, partition, j, 2.0 * grid.half_width());
  std::vector<cplx> lag(2 * n - 1);
  for (std::size_t t = 0; t < lag.size(); ++t)
    lag[t] = prof((static_cast<double>(t) - static_cast<double>(n - 1)) * grid.spacing());
  KernelMatrix km;
  km.n = n;
  km.j = j;
  km.nu = 0;
  km.multiplier_id = spec.id;
  km.entries.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < n; ++l) km.entries[i * n + l] = lag[i + n - 1 - l];
  return km;
}

ComplexGridFunction apply_multiplier(int nu, const MultiplierSpec& spec, std::span<const double> f,
                                     const ApplyOptions& options, const Grid& grid,
                                     const KQuadrature& quad) {
  const SpectralBasis basis(nu, grid);
  ComplexGridFunction out(grid.size(), 0.0);
  const std::vector<cplx> fc(f.begin(), f.end());
  if (options.partition == nullptr) {
    std::vector<cplx> g(quad.size());
    for (std::size_t q = 0; q < quad.size(); ++q) g[q] = spec.m(quad.nodes[q] * quad.nodes[q]);
    out = basis.apply(fc, g, quad);
  } else {
    const auto& part = *options.partition;
    for (int j = part.j_min(); j <= part.j_max(); ++j) {
      const auto rule = band_quadrature(j, grid);
      std::vector<cplx> g(rule.size());
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double lam = rule.nodes[q] * rule.nodes[q];
        g[q] = spec.m(lam) * part.phi_j(j, lam);
      }
      const auto band = basis.apply(fc, g, rule);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += band[i];
    }
  }
  for (const auto& c : out)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw DomainError("apply_multiplier: non-finite output; is m bounded on the quadrature?");
  if (options.include_bound_states) {
    for (const auto& st : bound_states(nu, grid)) {
      cplx mv = spec.m(st.energy);
      if (options.partition) mv *= options.partition->band_sum(st.energy);
      if (!std::isfinite(mv.real()) || !std::isfinite(mv.imag()))
        throw DomainError("apply_multiplier: m is undefined at eigenvalue " +
                          std::to_string(st.energy));
      const double c = inner(grid, f, st.samples);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += mv * c * st.samples[i];
    }
  }
  return out;
}

double scaled_c1_norm(const MultiplierSpec& spec, double lambda, int samples) {
  const double a = spec.chi_lo, b = spec.chi_hi;
  const double d = (b - a) / (samples - 1);
  std::vector<cplx> v(static_cast<std::size_t>(samples));
  double sup = 0.0;
  for (int t = 0; t < samples; ++t) {
    const double xi = a + d * t;
    const double c = spec.chi(xi);
    v[static_cast<std::size_t>(t)] = c == 0.0 ? cplx(0.0) : c * spec.m(lambda * xi);
    const auto& val = v[static_cast<std::size_t>(t)];
    if (!std::isfinite(val.real()) || !std::isfinite(val.imag()))
      throw DomainError("multiplier_norm: non-finite sample at lambda = " + std::to_string(lambda));
    sup = std::max(sup, std::abs(val));
  }
  double dsup = 0.0;
  for (int t = 1; t + 1 < samples; ++t)
    dsup = std::max(dsup, std::abs(v[static_cast<std::size_t>(t + 1)] -
                                   v[static_cast<std::size_t>(t - 1)]) / (2.0 * d));
  return sup + dsup;
}

double multiplier_norm(const MultiplierSpec& spec, const NormSampling& sampling) {
  double msup = 0.0;
  constexpr int per_octave = 64;
  for (int t = sampling.l_min * per_octave; t <= sampling.l_max * per_octave; ++t) {
    const double lam = std::exp2(static_cast<double>(t) / per_octave);
    for (double s : {lam, -lam}) {
      const cplx v = spec.m(s);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw DomainError("multiplier_norm: m is not finite at " + std::to_string(s));
      msup = std::max(msup, std::abs(v));
    }
  }
  double best = 0.0;
  for (int l = sampling.l_min; l <= sampling.l_max; ++l)
    best = std::max(best, scaled_c1_norm(spec, std::exp2(l), sampling.samples));
  return msup + best;
}

}  // namespace ptspec
