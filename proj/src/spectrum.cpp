#include "ptspec/spectrum.hpp"

#include <cmath>
#include <ostream>

#include "ptspec/error.hpp"
#include "ptspec/numerics.hpp"
#include "ptspec/polyrec.hpp"

namespace ptspec {

namespace {

// root = (1-s^2)^{1/2}, passed separately so callers at s = tanh x can use sech x.
double legendre_with_root(int l, int m, double s, double root) {
  if (m < 0 || l < 0) throw RangeError("assoc_legendre: negative degree or order");
  if (m > l) return 0.0;
  // P_m^m = (-1)^m (2m-1)!! (1-s^2)^{m/2}
  double pmm = 1.0;
  for (int i = 1; i <= m; ++i) pmm *= -(2.0 * i - 1.0) * root;
  if (l == m) return pmm;
  double pm1 = s * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pm1;
  double pl = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pl = ((2.0 * ll - 1.0) * s * pm1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pm1;
    pm1 = pl;
  }
  return pl;
}

// P_l^m(tanh x) without the cancellation in 1 - tanh^2 x for large |x|.
double legendre_of_x(int l, int m, double x) { return legendre_with_root(l, m, std::tanh(x), sech(x)); }

}  // namespace

double assoc_legendre(int l, int m, double s) {
  return legendre_with_root(l, m, s, std::sqrt(std::max(0.0, (1.0 - s) * (1.0 + s))));
}

double BoundState::operator()(double x) const { return norm_constant * legendre_of_x(nu, m, x); }

SpectralData spectral_data(int nu) {
  if (nu < 0) throw RangeError("spectral_data: nu must be nonnegative");
  SpectralData d;
  d.nu = nu;
  for (int m = 1; m <= nu; ++m) d.point_spectrum.push_back(-static_cast<double>(m) * m);
  return d;
}

std::vector<BoundState> bound_states(int nu, const Grid& grid) {
  if (nu < 0) throw RangeError("bound_states: nu must be nonnegative");
  std::vector<BoundState> out;
  for (int m = 1; m <= nu; ++m) {
    BoundState st;
    st.m = m;
    st.nu = nu;
    st.energy = -static_cast<double>(m) * m;
    st.samples = grid.sample([&](double x) { return legendre_of_x(nu, m, x); });
    const double norm = l2_norm(grid, st.samples);
    // P_nu^m(s) has parity (-1)^{nu+m}: even states are oriented by the value
    // at 0, odd ones by the slope there.
    const bool even = ((nu + m) % 2) == 0;
    const double probe = even ? assoc_legendre(nu, m, 0.0) : assoc_legendre(nu, m, 1e-3);
    const double sign = probe >= 0.0 ? 1.0 : -1.0;
    st.norm_constant = sign / norm;
    for (auto& v : st.samples) v *= st.norm_constant;
    out.push_back(std::move(st));
  }
  return out;
}

cplx wronskian_eval(int nu, double k) {
  const cplx ik(0.0, k);
  cplx prod = 1.0;
  for (int l = 1; l <= nu; ++l) prod *= (static_cast<double>(l) + ik) / (static_cast<double>(l) - ik);
  const double sgn = (nu % 2 == 0) ? 1.0 : -1.0;
  return -2.0 * sgn * ik * prod;
}

double eigen_residual(const BoundState& state, int nu, const Grid& grid) {
  const auto& psi = state.samples;
  if (psi.size() != grid.size()) throw ArgumentError("eigen_residual: grid mismatch");
  const double h = grid.spacing();
  const double m2 = static_cast<double>(state.m) * state.m;
  GridFunction r(grid.size(), 0.0);
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double d2 = (psi[i - 1] - 2.0 * psi[i] + psi[i + 1]) / (h * h);
    r[i] = -d2 + (potential(nu, grid.x(i)) + m2) * psi[i];
  }
  return l2_norm(grid, r);
}

void write_bound_states_csv(std::ostream& os, int nu, const Grid& grid,
                            const std::vector<BoundState>& states) {
  os << "# nu=" << nu << ",L=" << grid.half_width() << ",n_points=" << grid.size() << '\n';
  os << 'x';
  for (const auto& s : states) os << ",psi_" << s.m;
  os << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    os << grid.x(i);
    for (const auto& s : states) os << ',' << s.samples[i];
    os << '\n';
  }
}

}  // namespace ptspec
