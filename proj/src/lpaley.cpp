#include "ptspec/lpaley.hpp"

#include <algorithm>
#include <cmath>

#include "ptspec/calculus.hpp"
#include "ptspec/error.hpp"
#include "ptspec/numerics.hpp"

namespace ptspec {

namespace {

std::vector<cplx> to_complex(std::span<const double> f) { return {f.begin(), f.end()}; }

GridFunction ac_part(int nu, std::span<const double> f, const Grid& grid, double* removed) {
  GridFunction out(f.begin(), f.end());
  if (nu == 0) {
    if (removed) *removed = 0.0;
    return out;
  }
  const auto proj = bound_projection(f, bound_states(nu, grid), grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= proj[i];
  if (removed) *removed = l2_norm(grid, proj);
  return out;
}

}  // namespace

BandOperator::BandOperator(int nu, const Grid& grid) : grid_(grid), basis_(nu, grid) {}

ComplexGridFunction BandOperator::phi(const DyadicPartition& p, int j,
                                      std::span<const cplx> f) const {
  const auto rule = band_quadrature(j, grid_);
  std::vector<cplx> gv(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) gv[q] = p.phi_j(j, rule.nodes[q] * rule.nodes[q]);
  return basis_.apply(f, gv, rule);
}

ComplexGridFunction BandOperator::low(const DyadicPartition& p, int j,
                                      std::span<const cplx> f) const {
  const auto rule = lowpass_quadrature(j, grid_);
  std::vector<cplx> gv(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) gv[q] = p.Phi_j(j, rule.nodes[q] * rule.nodes[q]);
  return basis_.apply(f, gv, rule);
}

SquareFunctionResult square_function(int nu, std::span<const double> f,
                                     const DyadicPartition& partition, const Grid& grid,
                                     const SquareFunctionOptions& options) {
  if (f.size() != grid.size()) throw ArgumentError("square_function: f does not match the grid");
  SquareFunctionResult res;
  res.j_min = partition.j_min();
  res.j_max = partition.j_max();
  const GridFunction fa = options.project_bound_states
                              ? ac_part(nu, f, grid, &res.bound_state_norm)
                              : GridFunction(f.begin(), f.end());
  const BandOperator op(nu, grid);
  const auto fc = to_complex(fa);
  GridFunction sq(grid.size(), 0.0);
  for (int j = res.j_min; j <= res.j_max; ++j) {
    const auto band = op.phi(partition, j, fc);
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] += std::norm(band[i]);
    res.per_band_norms.push_back(l2_norm(grid, band));
  }
  res.values.resize(sq.size());
  for (std::size_t i = 0; i < sq.size(); ++i) res.values[i] = std::sqrt(sq[i]);
  return res;
}

double lp_ratio(const SquareFunctionResult& sf, std::span<const double> f_ac, double p,
                const Grid& grid) {
  if (!(p >= 1.25 && p <= 4.0)) throw ArgumentError("lp_ratio: p must lie in [1.25, 4]");
  const double den = lp_norm(grid, f_ac, p);
  if (!(den >= 1e-12))
    throw DegenerateInputError("lp_ratio: ||f||_p below 1e-12 (f has no a.c. part)");
  return lp_norm(grid, sf.values, p) / den;
}

double lp_ratio(int nu, std::span<const double> f, double p, const DyadicPartition& partition,
                const Grid& grid) {
  if (!(p >= 1.25 && p <= 4.0)) throw ArgumentError("lp_ratio: p must lie in [1.25, 4]");
  const auto fa = ac_part(nu, f, grid, nullptr);
  if (!(lp_norm(grid, fa, p) >= 1e-12))
    throw DegenerateInputError("lp_ratio: ||f||_p below 1e-12 (f has no a.c. part)");
  const auto sf = square_function(nu, fa, partition, grid, {.project_bound_states = false});
  return lp_ratio(sf, fa, p, grid);
}

double spectral_tail_fraction(int nu, std::span<const double> f_ac, const DyadicPartition& partition,
                              const Grid& grid) {
  const double norm2 = std::pow(l2_norm(grid, f_ac), 2);
  if (!(norm2 > 0.0)) throw DegenerateInputError("spectral_tail_fraction: f_ac vanishes");
  const SpectralBasis basis(nu, grid);
  const double width = resolving_panel_width(grid);
  const double k_lo = std::exp2(0.5 * partition.j_min());
  const double k_hi = std::exp2(0.5 * partition.j_max());
  const double k_cap = std::min(kPi / grid.spacing(), 4.0 * k_hi);
  auto energy = [&](const KQuadrature& rule) {
    const auto c = basis.forward(f_ac, rule);
    CompensatedSum<double> s;
    for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * std::norm(c[q]);
    return s.value() / (2.0 * kPi);
  };
  double tail = energy(KQuadrature::graded(1e-3 * k_lo, k_lo, width));
  if (k_cap > k_hi) tail += energy(KQuadrature::band(k_hi, k_cap, width));
  return tail / norm2;
}

BandFamily q_operator(const SpectralBasis& basis, std::span<const double> f,
                      const DyadicPartition& partition) {
  BandFamily fam;
  fam.j_min = partition.j_min();
  const auto& grid = basis.grid();
  fam.rules.push_back(lowpass_quadrature(fam.j_min - 1, grid));
  for (int j = fam.j_min; j <= partition.j_max(); ++j) fam.rules.push_back(band_quadrature(j, grid));
  for (std::size_t b = 0; b < fam.rules.size(); ++b) {
    const auto& rule = fam.rules[b];
    auto c = basis.forward(f, rule);
    const int j = fam.j_min - 1 + static_cast<int>(b);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double lam = rule.nodes[q] * rule.nodes[q];
      c[q] *= b == 0 ? partition.Phi_j(j, lam) : partition.phi_j(j, lam);
    }
    fam.coeffs.push_back(std::move(c));
  }
  return fam;
}

ComplexGridFunction r_operator(const SpectralBasis& basis, const BandFamily& family,
                               const DyadicPartition& partition) {
  ComplexGridFunction out(basis.grid().size(), 0.0);
  for (std::size_t b = 0; b < family.rules.size(); ++b) {
    const auto& rule = family.rules[b];
    auto c = family.coeffs[b];
    const int j = family.j_min - 1 + static_cast<int>(b);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double lam = rule.nodes[q] * rule.nodes[q];
      // Phi_{j+1} = 1 on the support of Phi_j, as psi_j = 1 on the support of phi_j.
      c[q] *= b == 0 ? partition.Phi_j(j + 1, lam) : partition.psi_j(j, lam);
    }
    const auto piece = basis.adjoint(c, rule);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += piece[i];
  }
  return out;
}

double q_r_roundtrip(int nu, std::span<const double> f, const DyadicPartition& partition,
                     const Grid& grid) {
  if (f.size() != grid.size()) throw ArgumentError("q_r_roundtrip: f does not match the grid");
  const auto fa = ac_part(nu, f, grid, nullptr);
  const double base = l2_norm(grid, fa);
  if (base == 0.0) return 0.0;
  const SpectralBasis basis(nu, grid);
  auto out = r_operator(basis, q_operator(basis, fa, partition), partition);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= fa[i];
  return l2_norm(grid, out) / base;
}

nlohmann::json lp_report_json(int nu, double p, const std::string& function_id, double ratio,
                              const SquareFunctionResult& sf) {
  return {{"nu", nu},
          {"p", p},
          {"function_id", function_id},
          {"ratio", ratio},
          {"per_band_norms", sf.per_band_norms},
          {"j_range", {sf.j_min, sf.j_max}}};
}

}  // namespace ptspec
