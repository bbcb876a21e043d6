#include "ptspec/transform.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ptspec/error.hpp"
#include "ptspec/numerics.hpp"

namespace ptspec {

namespace {

// Phase resynchronisation period for the e^{ikh} recurrence.
constexpr std::size_t kResync = 64;

}  // namespace

KQuadrature KQuadrature::uniform(double k_max, std::size_t n_nodes, int points_per_panel) {
  if (!(k_max > 0.0)) throw ArgumentError("KQuadrature::uniform: k_max must be positive");
  const auto ppp = static_cast<std::size_t>(points_per_panel);
  if (n_nodes < ppp || n_nodes % ppp != 0)
    throw ArgumentError("KQuadrature::uniform: node count must be a multiple of points per panel");
  const auto rule = composite_gauss_legendre(-k_max, k_max, static_cast<int>(n_nodes / ppp),
                                             points_per_panel);
  return KQuadrature{rule.nodes, rule.weights, k_max};
}

KQuadrature KQuadrature::band(double k_lo, double k_hi, double max_width, int points_per_panel) {
  if (!(k_hi > k_lo) || k_lo < 0.0) throw ArgumentError("KQuadrature::band: need 0 <= k_lo < k_hi");
  const int panels = std::max(1, static_cast<int>(std::ceil((k_hi - k_lo) / max_width)));
  const auto pos = composite_gauss_legendre(k_lo, k_hi, panels, points_per_panel);
  KQuadrature q;
  q.k_max = k_hi;
  for (std::size_t i = pos.nodes.size(); i-- > 0;) {
    q.nodes.push_back(-pos.nodes[i]);
    q.weights.push_back(pos.weights[i]);
  }
  q.nodes.insert(q.nodes.end(), pos.nodes.begin(), pos.nodes.end());
  q.weights.insert(q.weights.end(), pos.weights.begin(), pos.weights.end());
  return q;
}

KQuadrature KQuadrature::graded(double k_floor, double k_max, double max_width, double rel,
                                int points_per_panel) {
  if (!(k_floor > 0.0) || !(k_max > k_floor))
    throw ArgumentError("KQuadrature::graded: need 0 < k_floor < k_max");
  std::vector<double> breaks{0.0, k_floor};
  while (breaks.back() < k_max) {
    const double b = breaks.back();
    const double w = std::min(max_width, std::max(rel * b, 1e-300));
    breaks.push_back(std::min(k_max, b + w));
  }
  const auto pos = composite_gauss_legendre(breaks, points_per_panel);
  KQuadrature q;
  q.k_max = k_max;
  for (std::size_t i = pos.nodes.size(); i-- > 0;) {
    q.nodes.push_back(-pos.nodes[i]);
    q.weights.push_back(pos.weights[i]);
  }
  q.nodes.insert(q.nodes.end(), pos.nodes.begin(), pos.nodes.end());
  q.weights.insert(q.weights.end(), pos.weights.begin(), pos.weights.end());
  return q;
}

double KQuadrature::max_node_gap() const {
  double gap = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) gap = std::max(gap, nodes[i] - nodes[i - 1]);
  return gap;
}

double resolving_panel_width(const Grid& grid) { return kPi / (4.0 * grid.half_width()); }

SpectralBasis::SpectralBasis(int nu, const Grid& grid) : grid_(grid), family_(nu) {
  const auto stride = static_cast<std::size_t>(nu) + 1;
  alpha_.resize(grid.size() * stride);
  for (std::size_t i = 0; i < grid.size(); ++i)
    family_.poly().z_coefficients(std::tanh(grid.x(i)),
                                  std::span<double>(alpha_.data() + i * stride, stride));
}

std::vector<cplx> SpectralBasis::forward(std::span<const double> f, const KQuadrature& quad) const {
  std::vector<cplx> fc(f.begin(), f.end());
  return forward(std::span<const cplx>(fc), quad);
}

std::vector<cplx> SpectralBasis::forward(std::span<const cplx> f, const KQuadrature& quad) const {
  if (f.size() != grid_.size()) throw ArgumentError("forward: grid mismatch");
  const std::size_t n = grid_.size();
  const int nu = family_.nu();
  const auto stride = static_cast<std::size_t>(nu) + 1;
  const double h = grid_.spacing();
  const double x0 = grid_.x(0);

  // Weighted samples w_i f_i alpha_b(i).
  std::vector<cplx> wf(n);
  for (std::size_t i = 0; i < n; ++i) wf[i] = grid_.weight(i) * f[i];

  std::vector<cplx> out(quad.size());
  std::vector<CompensatedSum<cplx>> moments(stride);
  for (std::size_t q = 0; q < quad.size(); ++q) {
    const double k = quad.nodes[q];
    for (auto& m : moments) m = CompensatedSum<cplx>{};
    const cplx step = std::polar(1.0, -k * h);
    cplx phase;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % kResync == 0)
        phase = std::polar(1.0, -k * (x0 + static_cast<double>(i) * h));
      else
        phase *= step;
      const cplx v = wf[i] * phase;
      const double* a = alpha_.data() + i * stride;
      for (std::size_t b = 0; b < stride; ++b) moments[b] += a[b] * v;
    }
    // conj(P(x,k)) = sum_b alpha_b (-ik)^b
    const cplx mik(0.0, -k);
    cplx acc = 0.0;
    for (std::size_t b = stride; b-- > 0;) acc = acc * mik + moments[b].value();
    out[q] = std::conj(family_.normalization(k)) * acc;
  }
  return out;
}

ComplexGridFunction SpectralBasis::adjoint(std::span<const cplx> coeffs,
                                           const KQuadrature& quad) const {
  if (coeffs.size() != quad.size()) throw ArgumentError("adjoint: coefficient/node mismatch");
  const std::size_t n = grid_.size();
  const int nu = family_.nu();
  const auto stride = static_cast<std::size_t>(nu) + 1;
  const double h = grid_.spacing();
  const double x0 = grid_.x(0);

  std::vector<CompensatedSum<cplx>> acc(n * stride);
  std::vector<cplx> d(stride);
  for (std::size_t q = 0; q < quad.size(); ++q) {
    const double k = quad.nodes[q];
    if (coeffs[q] == cplx(0.0)) continue;
    const cplx base = quad.weights[q] * family_.normalization(k) * coeffs[q] / (2.0 * kPi);
    const cplx ik(0.0, k);
    cplx pw = 1.0;
    for (std::size_t b = 0; b < stride; ++b) {
      d[b] = base * pw;
      pw *= ik;
    }
    const cplx step = std::polar(1.0, k * h);
    cplx phase;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % kResync == 0)
        phase = std::polar(1.0, k * (x0 + static_cast<double>(i) * h));
      else
        phase *= step;
      CompensatedSum<cplx>* row = acc.data() + i * stride;
      for (std::size_t b = 0; b < stride; ++b) row[b] += d[b] * phase;
    }
  }
  ComplexGridFunction out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* a = alpha_.data() + i * stride;
    cplx v = 0.0;
    for (std::size_t b = 0; b < stride; ++b) v += a[b] * acc[i * stride + b].value();
    out[i] = v;
  }
  return out;
}

ComplexGridFunction SpectralBasis::apply(std::span<const cplx> f, std::span<const cplx> g,
                                         const KQuadrature& quad) const {
  auto c = forward(f, quad);
  if (g.size() != c.size()) throw ArgumentError("apply: multiplier/node mismatch");
  for (std::size_t q = 0; q < c.size(); ++q) c[q] *= g[q];
  return adjoint(c, quad);
}

SpectralCoefficients forward(int nu, std::span<const double> f, const KQuadrature& quad,
                             const Grid& grid) {
  SpectralCoefficients out;
  out.nu = nu;
  out.values = SpectralBasis(nu, grid).forward(f, quad);
  const double edge = std::max(std::abs(f.front()), std::abs(f.back()));
  // The neglected tail is at least the edge amplitude times one decay length.
  out.tail_bound = edge;
  if (edge > 1e-10)
    out.warning = "input does not decay at the box edge; |f(+-L)| = " + std::to_string(edge);
  return out;
}

ComplexGridFunction adjoint_apply(int nu, const SpectralCoefficients& coeffs,
                                  const KQuadrature& quad, const Grid& grid) {
  return SpectralBasis(nu, grid).adjoint(coeffs.values, quad);
}

GridFunction bound_projection(std::span<const double> f, const std::vector<BoundState>& states,
                              const Grid& grid) {
  GridFunction out(grid.size(), 0.0);
  for (const auto& st : states) {
    const double c = inner(grid, f, st.samples);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * st.samples[i];
  }
  return out;
}

double completeness_defect(int nu, std::span<const double> f, const Grid& grid,
                           const KQuadrature& quad) {
  const SpectralBasis basis(nu, grid);
  const auto rec = basis.adjoint(basis.forward(f, quad), quad);
  const auto proj = bound_projection(f, bound_states(nu, grid), grid);
  ComplexGridFunction diff(grid.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = rec[i] + proj[i] - f[i];
  const double nf = l2_norm(grid, f);
  if (nf == 0.0) throw DegenerateInputError("completeness_defect: zero input");
  return l2_norm(grid, std::span<const cplx>(diff)) / nf;
}

void write_coefficients_csv(std::ostream& os, const SpectralCoefficients& c,
                            const KQuadrature& quad) {
  os << "k,re,im\n";
  os.precision(17);
  for (std::size_t q = 0; q < c.values.size(); ++q)
    os << quad.nodes[q] << ',' << c.values[q].real() << ',' << c.values[q].imag() << '\n';
}

}  // namespace ptspec
