#include "ptspec/numerics.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include "ptspec/error.hpp"

namespace ptspec {

LinearFit fit_line(std::span<const double> x, std::span<const double> y, std::size_t min_points) {
  if (x.size() != y.size()) throw ArgumentError("fit_line: size mismatch");
  if (x.size() < std::max<std::size_t>(min_points, 2))
    throw InsufficientDataError("fit_line: need at least " + std::to_string(min_points) +
                                " points, got " + std::to_string(x.size()));
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InsufficientDataError("fit_line: abscissae are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ssr += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  fit.residual_rms = std::sqrt(ssr / n);
  return fit;
}

namespace {

template <int N>
QuadratureRule boost_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& a = G::abscissa();
  const auto& w = G::weights();
  QuadratureRule r;
  // boost stores the non-negative half; zero (odd N) comes first.
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] == 0.0) continue;
    r.nodes.push_back(-a[i]);
    r.weights.push_back(w[i]);
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    r.nodes.push_back(a[i]);
    r.weights.push_back(w[i]);
  }
  return r;
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
  switch (n) {
    case 1:
      return QuadratureRule{{0.0}, {2.0}};
    case 2:
      return boost_rule<2>();
    case 3:
      return boost_rule<3>();
    case 4:
      return boost_rule<4>();
    case 5:
      return boost_rule<5>();
    case 8:
      return boost_rule<8>();
    case 16:
      return boost_rule<16>();
    default:
      throw ArgumentError("gauss_legendre: unsupported point count " + std::to_string(n));
  }
}

QuadratureRule composite_gauss_legendre(std::span<const double> breaks, int points_per_panel) {
  const QuadratureRule ref = gauss_legendre(points_per_panel);
  QuadratureRule out;
  if (breaks.size() < 2) return out;
  out.nodes.reserve((breaks.size() - 1) * ref.nodes.size());
  out.weights.reserve(out.nodes.capacity());
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p], b = breaks[p + 1];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t q = 0; q < ref.nodes.size(); ++q) {
      out.nodes.push_back(mid + half * ref.nodes[q]);
      out.weights.push_back(half * ref.weights[q]);
    }
  }
  return out;
}

QuadratureRule composite_gauss_legendre(double a, double b, int n_panels, int points_per_panel) {
  std::vector<double> breaks(static_cast<std::size_t>(n_panels) + 1);
  for (int i = 0; i <= n_panels; ++i)
    breaks[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / n_panels;
  return composite_gauss_legendre(breaks, points_per_panel);
}

}  // namespace ptspec
