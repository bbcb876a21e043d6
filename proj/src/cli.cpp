#include "ptspec/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "ptspec/calculus.hpp"
#include "ptspec/cztools.hpp"
#include "ptspec/lpaley.hpp"
#include "ptspec/numerics.hpp"
#include "ptspec/partition.hpp"
#include "ptspec/polyrec.hpp"
#include "ptspec/spectrum.hpp"
#include "ptspec/transform.hpp"

namespace ptspec {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw ConfigError("format must be csv or json, got '" + s + "'");
}

}  // namespace

void RunConfig::validate() const {
  if (nu < 0 || nu > kDefaultMaxNu) throw ConfigError("nu must lie in [0, " + std::to_string(kDefaultMaxNu) + "]");
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("L must be positive");
  if (!is_power_of_two(n_points)) throw ConfigError("n_points must be a power of two");
  if (!(j_min < j_max)) throw ConfigError("j_min must be below j_max");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(k_max > 0.0)) throw ConfigError("k_max must be positive");
  if (n_k_per_band == 0) throw ConfigError("n_k_per_band must be positive");
  if (jobs < 1) throw ConfigError("jobs must be positive");
  if (!multiplier_id.empty()) {
    try {
      multipliers::by_name(multiplier_id);
    } catch (const Error& e) {
      throw ConfigError(std::string("unknown multiplier: ") + e.what());
    }
  }
}

nlohmann::json RunConfig::to_json() const {
  return {{"nu", nu},
          {"L", L},
          {"n_points", n_points},
          {"j_min", j_min},
          {"j_max", j_max},
          {"epsilon", epsilon},
          {"alpha", alpha},
          {"k_max", k_max},
          {"n_k_per_band", n_k_per_band},
          {"multiplier_id", multiplier_id},
          {"seed", seed}};
}

void RunConfig::merge_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  static const std::vector<std::string> known = {"nu",    "L",     "n_points", "j_min",        "j_max",
                                                 "epsilon", "alpha", "k_max",   "n_k_per_band", "multiplier_id",
                                                 "format", "seed",  "jobs",    "out"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown config key '" + key + "'");
  try {
    if (j.contains("nu")) nu = j["nu"].get<int>();
    if (j.contains("L")) L = j["L"].get<double>();
    if (j.contains("n_points")) n_points = j["n_points"].get<std::size_t>();
    if (j.contains("j_min")) j_min = j["j_min"].get<int>();
    if (j.contains("j_max")) j_max = j["j_max"].get<int>();
    if (j.contains("epsilon")) epsilon = j["epsilon"].get<double>();
    if (j.contains("alpha")) alpha = j["alpha"].get<double>();
    if (j.contains("k_max")) k_max = j["k_max"].get<double>();
    if (j.contains("n_k_per_band")) n_k_per_band = j["n_k_per_band"].get<std::size_t>();
    if (j.contains("multiplier_id")) multiplier_id = j["multiplier_id"].get<std::string>();
    if (j.contains("format")) format = parse_format(j["format"].get<std::string>());
    if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
    if (j.contains("jobs")) jobs = j["jobs"].get<int>();
    if (j.contains("out")) out_dir = j["out"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config file: ") + e.what());
  }
}

std::string RunConfig::digest() const { return config_digest(to_json()); }

bool RunReport::pass() const {
  if (reports.empty()) return false;
  return std::all_of(reports.begin(), reports.end(), [](const EstimateReport& r) { return r.pass; });
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& r : reports) reps.push_back(ptspec::to_json(r));
  return {{"command", command}, {"config_digest", config_digest}, {"config", config},
          {"pass", pass()},     {"reports", reps},                {"payload", payload}};
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "poly",   "wave",       "bound-states", "transform-check", "kernel", "verify-decay", "verify-weighted",
      "scaling", "hormander", "weak11",       "lp",              "cz-demo", "all"};
  return names;
}

namespace {

/// Runs the tasks on `jobs` threads; results keep the task order and the first
/// exception (in task order) is rethrown.
template <class T>
std::vector<T> run_pool(const std::vector<std::function<T()>>& tasks, int jobs) {
  std::vector<T> out(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        out[i] = tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), tasks.size());
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

struct Context {
  const RunConfig& cfg;
  Grid grid;
  DyadicPartition partition;

  explicit Context(const RunConfig& c)
      : cfg(c), grid(c.L, c.n_points), partition(make_partition({.j_min = c.j_min, .j_max = c.j_max})) {}

  MultiplierSpec multiplier(const std::string& fallback) const {
    return multipliers::by_name(cfg.multiplier_id.empty() ? fallback : cfg.multiplier_id);
  }

  std::vector<int> bands(int lo, int hi) const {
    std::vector<int> out;
    for (int j = std::max(lo, cfg.j_min); j <= std::min(hi, cfg.j_max); ++j) out.push_back(j);
    return out;
  }
};

struct CommandResult {
  std::vector<EstimateReport> reports;
  nlohmann::json payload = nlohmann::json::object();
};

EstimateReport new_report(const std::string& id, int nu, const Grid& grid) {
  EstimateReport r;
  r.estimate_id = id;
  r.nu = nu;
  r.params["L"] = grid.half_width();
  r.params["n_points"] = static_cast<double>(grid.size());
  return r;
}

GridFunction gaussian(const Grid& g) {
  return g.sample([](double x) { return std::exp(-0.5 * x * x); });
}

CommandResult cmd_poly(const Context& c) {
  const auto polys = poly_recursion(c.cfg.nu);
  EstimateReport r;
  r.estimate_id = "poly";
  r.nu = c.cfg.nu;
  bool ok = true;
  nlohmann::json seq = nlohmann::json::array();
  for (const auto& p : polys) {
    const bool monic = p.is_monic_in_z(), parity = p.has_parity();
    r.traces["monic"].push_back({p.nu(), monic ? 1.0 : 0.0});
    r.traces["parity"].push_back({p.nu(), parity ? 1.0 : 0.0});
    ok = ok && monic && parity;
    seq.push_back(to_json(p));
  }
  r.constants["degree"] = c.cfg.nu;
  r.pass = ok;
  finalize(r);
  return {{r}, {{"polynomial", to_json(polys.back())}, {"sequence", seq}}};
}

CommandResult cmd_wave(const Context& c) {
  const int nu = c.cfg.nu;
  const std::vector<double> ks = {0.5, 1.0, 2.0, 4.0};
  const Grid fine = Grid::with_spacing(c.cfg.L, 1e-3);
  const Grid coarse = Grid::with_spacing(c.cfg.L, 2e-3);
  EstimateReport r = new_report("wave", nu, fine);
  bool ok = true;
  double worst = 0.0, worst_order_dev = 0.0;
  int ordered = 0;
  for (std::size_t q = 0; q < ks.size(); ++q) {
    const double rf = helmholtz_residual(nu, ks[q], fine);
    const double rc = helmholtz_residual(nu, ks[q], coarse);
    r.traces["helmholtz_residual"].push_back({static_cast<int>(q), rf});
    worst = std::max(worst, rf);
    // The order is only visible where truncation dominates the rounding floor
    // 4 eps / (h^2 (1 + k^2)) of the second difference.
    const double h = fine.spacing();
    const double floor = 4.0 * std::numeric_limits<double>::epsilon() / (h * h * (1.0 + ks[q] * ks[q]));
    if (rf < 100.0 * floor) continue;
    const double order = std::log(rc / rf) / std::log(coarse.spacing() / h);
    r.traces["helmholtz_order"].push_back({static_cast<int>(q), order});
    worst_order_dev = std::max(worst_order_dev, std::abs(order - 2.0));
    ++ordered;
  }
  r.constants["helmholtz_residual_max"] = worst;
  r.constants["helmholtz_order_max_deviation"] = worst_order_dev;
  r.constants["helmholtz_order_samples"] = ordered;
  ok = ok && worst <= 5e-4 && worst_order_dev <= 0.2 && ordered > 0;

  const double ls = lippmann_schwinger_residual(nu, 1.0, c.grid);
  r.constants["lippmann_schwinger_residual"] = ls;
  ok = ok && ls <= 1e-6;

  std::mt19937_64 rng(c.cfg.seed);
  std::uniform_real_distribution<double> ux(-5.0, 5.0), uk(0.05, 8.0);
  const WaveFamily fam(nu);
  double sym = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double x = ux(rng);
    const double k = (t % 2 == 0 ? 1.0 : -1.0) * uk(rng);
    sym = std::max(sym, std::abs(fam.wave(x, -k) - fam.wave(-x, k)));
  }
  r.constants["symmetry_defect"] = sym;
  ok = ok && sym <= 1e-14;
  r.pass = ok;
  finalize(r);
  return {{r}, {}};
}

CommandResult cmd_bound_states(const Context& c) {
  const int nu = c.cfg.nu;
  EstimateReport r = new_report("bound_states", nu, c.grid);
  const auto states = bound_states(nu, c.grid);
  const auto sd = spectral_data(nu);
  bool ok = static_cast<int>(states.size()) == nu;
  double worst_res = 0.0, worst_orth = 0.0;
  KQuadrature probe;
  probe.nodes = {-4.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 4.0};
  probe.weights.assign(probe.nodes.size(), 1.0);
  const SpectralBasis basis(nu, c.grid);
  for (const auto& s : states) {
    for (const cplx v : basis.forward(std::span<const double>(s.samples), probe))
      worst_orth = std::max(worst_orth, std::abs(v));
    ok = ok && s.energy == -static_cast<double>(s.m * s.m);
    const double res = eigen_residual(s, nu, c.grid);
    r.traces["eigen_residual"].push_back({s.m, res});
    r.traces["energy"].push_back({s.m, s.energy});
    worst_res = std::max(worst_res, res);
  }
  for (std::size_t q = 0; q < sd.point_spectrum.size(); ++q)
    ok = ok && sd.point_spectrum[q] == -static_cast<double>((q + 1) * (q + 1));
  r.constants["eigen_residual_max"] = worst_res;
  r.constants["continuum_orthogonality"] = worst_orth;
  r.constants["bound_state_count"] = static_cast<double>(states.size());
  r.pass = ok && worst_res <= 5e-3 && worst_orth <= 1e-8;
  finalize(r);
  return {{r}, {{"point_spectrum", sd.point_spectrum}}};
}

CommandResult cmd_transform_check(const Context& c) {
  const int nu = c.cfg.nu;
  EstimateReport r = new_report("transform_check", nu, c.grid);
  r.params["k_max"] = c.cfg.k_max;
  r.params["k_nodes"] = static_cast<double>(c.cfg.n_k_per_band);
  const auto quad = KQuadrature::uniform(c.cfg.k_max, c.cfg.n_k_per_band);
  const auto f = gaussian(c.grid);
  const double d = completeness_defect(nu, f, c.grid, quad);
  const auto shifted = c.grid.sample([](double x) { return std::exp(-(x - 1.0) * (x - 1.0)); });
  const double ds = completeness_defect(nu, shifted, c.grid, quad);
  r.constants["completeness_defect"] = d;
  r.constants["completeness_defect_shifted"] = ds;
  r.pass = d <= 1e-6 && ds <= 1e-6;
  finalize(r);
  return {{r}, {}};
}

CommandResult cmd_kernel(const Context& c) {
  const int nu = c.cfg.nu;
  const auto spec = c.multiplier("one");
  EstimateReport r = new_report("kernel", nu, c.grid);
  r.multiplier_id = spec.id;
  r.params["j_min"] = c.cfg.j_min;
  r.params["j_max"] = c.cfg.j_max;
  const std::size_t l0 = c.grid.nearest(0.0);
  const std::size_t n = c.grid.size();
  bool ok = true;
  double worst_herm = 0.0, worst_oracle = 0.0;
  for (int j = c.cfg.j_min; j <= c.cfg.j_max; ++j) {
    const LagKernel lk(nu, c.grid, band_symbol(spec, c.partition, j), band_quadrature(j, c.grid));
    const auto col = lk.column(l0);
    double linf = 0.0;
    for (const cplx v : col) linf = std::max(linf, std::abs(v));
    r.traces["L2(y=0)"].push_back({j, l2_norm(c.grid, col)});
    r.traces["Linf(y=0)"].push_back({j, linf});
    if (spec.real_valued) {
      double herm = 0.0;
      for (std::size_t i = 0; i < n; i += n / 64)
        for (std::size_t l = 0; l < n; l += n / 16) herm = std::max(herm, std::abs(lk(i, l) - std::conj(lk(l, i))));
      r.traces["hermitian_defect"].push_back({j, herm});
      worst_herm = std::max(worst_herm, herm);
    }
    if (nu == 0) {
      const FreeProfile free(spec, c.partition, j, 2.0 * c.grid.half_width());
      double diff = 0.0;
      for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(col[i] - free(c.grid.x(i) - c.grid.x(l0))));
      r.traces["oracle_diff"].push_back({j, diff});
      worst_oracle = std::max(worst_oracle, diff);
    }
  }
  r.constants["hermitian_defect_max"] = worst_herm;
  ok = ok && worst_herm <= 1e-10;
  if (nu == 0) {
    r.constants["oracle_diff_max"] = worst_oracle;
    ok = ok && worst_oracle <= 1e-8;
  }
  r.pass = ok;
  finalize(r);
  return {{r}, {}};
}

CommandResult cmd_verify_decay(const Context& c) {
  const int nu = c.cfg.nu;
  const auto js = c.bands(0, 10);
  const DecayProfile profile{.epsilon = c.cfg.epsilon};
  if (nu == 0) return {{verify_integral_decay(nu, c.partition, js, KernelMeasure::delta(), profile, c.grid)}, {}};
  auto main = verify_integral_decay(nu, c.partition, js, KernelMeasure::with_density(1, 1.0), profile, c.grid);
  auto control = verify_integral_decay(nu, c.partition, js, KernelMeasure::delta(), profile, c.grid);
  // The control documents that the pointwise bound is not uniform in j.
  control.estimate_id = "integral_decay_control";
  control.pass = control.constants["growing"] == 1.0;
  return {{main, control}, {}};
}

CommandResult cmd_verify_weighted(const Context& c) {
  return {{verify_weighted_l2(c.cfg.nu, c.multiplier("one"), c.partition, c.bands(0, 10), c.cfg.alpha, c.grid)},
          {}};
}

CommandResult cmd_scaling(const Context& c) {
  ScalingOptions o;
  o.derivative_j_list = c.bands(c.cfg.j_min, -2);
  if (o.derivative_j_list.size() < 3) o.derivative_j_list.clear();
  return {{kernel_norm_scaling(c.cfg.nu, c.multiplier("one"), c.partition, c.bands(2, 10), c.grid, o)}, {}};
}

CommandResult cmd_hormander(const Context& c) {
  return {{hormander_tail(c.cfg.nu, c.multiplier("mihlin"), c.partition, 0, 1.0, c.grid)}, {}};
}

std::vector<GridFunction> bump_family(const Grid& g) {
  std::vector<GridFunction> fam;
  for (int l = 0; l <= 6; ++l) fam.push_back(normalized_bump(g, 0.3, std::ldexp(1.0, -l)));
  return fam;
}

CommandResult cmd_weak11(const Context& c) {
  const auto fam = bump_family(c.grid);
  std::vector<MultiplierSpec> specs;
  if (!c.cfg.multiplier_id.empty())
    specs.push_back(multipliers::by_name(c.cfg.multiplier_id));
  else
    for (double beta : {0.0, 1.0, 2.0, 4.0}) specs.push_back(multipliers::imaginary_power(beta));
  std::vector<std::function<EstimateReport()>> tasks;
  for (const auto& s : specs)
    tasks.push_back([&c, &fam, s] { return weak11_profile(c.cfg.nu, s, fam, c.partition, c.grid); });
  CommandResult out;
  out.reports = run_pool(tasks, c.cfg.jobs);
  if (out.reports.size() > 1) {
    EstimateReport sweep = new_report("weak11_sweep", c.cfg.nu, c.grid);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t q = 0; q < out.reports.size(); ++q) {
      const double v = out.reports[q].constants.at("R_over_C_m");
      sweep.traces["R_over_C_m"].push_back({static_cast<int>(q), v});
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    sweep.constants["R_over_C_m_variation"] = hi / lo;
    sweep.pass = hi / lo <= 5.0;
    finalize(sweep);
    out.reports.push_back(sweep);
  }
  return out;
}

// Modulated Gaussians whose a.c. spectrum sits inside the covered annulus, so the
// p = 2 bracket applies.
std::vector<std::pair<std::string, GridFunction>> lp_family(const Grid& g) {
  return {
      {"mod_gauss_9", g.sample([](double x) { return std::exp(-x * x / 8.0) * std::cos(9.0 * x); })},
      {"mod_gauss_sin_10", g.sample([](double x) { return std::exp(-x * x / 8.0) * std::sin(10.0 * x); })},
      {"shifted_mod_gauss_12",
       g.sample([](double x) { return std::exp(-0.5 * (x - 1.0) * (x - 1.0)) * std::cos(12.0 * x); })},
      {"wide_mod_gauss_9", g.sample([](double x) { return std::exp(-x * x / 18.0) * std::cos(9.0 * x); })},
      {"two_mod_bumps", g.sample([](double x) {
         return std::exp(-0.5 * (x + 2.0) * (x + 2.0)) * std::cos(10.0 * x) +
                0.5 * std::exp(-0.5 * (x - 3.0) * (x - 3.0)) * std::cos(14.0 * x);
       })},
  };
}

CommandResult cmd_lp(const Context& c) {
  const int nu = c.cfg.nu;
  EstimateReport r = new_report("lp", nu, c.grid);
  r.params["j_min"] = c.cfg.j_min;
  r.params["j_max"] = c.cfg.j_max;
  const auto [lo, hi] = c.partition.square_sum_bracket();
  r.constants["bracket_lo"] = std::sqrt(lo);
  r.constants["bracket_hi"] = std::sqrt(hi);
  const auto states = bound_states(nu, c.grid);
  const auto fam = lp_family(c.grid);
  CommandResult out;
  nlohmann::json entries = nlohmann::json::array();
  bool ok = true;
  std::map<double, std::pair<double, double>> extremes;
  for (std::size_t q = 0; q < fam.size(); ++q) {
    const auto& [name, f] = fam[q];
    const auto sf = square_function(nu, f, c.partition, c.grid);
    GridFunction f_ac = f;
    const auto bp = bound_projection(f, states, c.grid);
    for (std::size_t i = 0; i < f_ac.size(); ++i) f_ac[i] -= bp[i];
    const double tail = spectral_tail_fraction(nu, f_ac, c.partition, c.grid);
    r.traces["spectral_tail"].push_back({static_cast<int>(q), tail});
    ok = ok && tail < 1e-8;
    for (double p : {1.5, 2.0, 3.0}) {
      const double ratio = lp_ratio(sf, f_ac, p, c.grid);
      r.traces["ratio(p=" + nlohmann::json(p).dump() + ")"].push_back({static_cast<int>(q), ratio});
      entries.push_back(lp_report_json(nu, p, name, ratio, sf));
      if (p == 2.0) {
        ok = ok && ratio >= std::sqrt(lo) - 1e-4 && ratio <= std::sqrt(hi) + 1e-4;
      } else {
        ok = ok && ratio >= 0.1 && ratio <= 10.0;
        auto [it, fresh] = extremes.try_emplace(p, ratio, ratio);
        if (!fresh) it->second = {std::min(it->second.first, ratio), std::max(it->second.second, ratio)};
      }
    }
  }
  for (const auto& [p, mm] : extremes) {
    const double spread = mm.second / mm.first;
    r.constants["family_spread(p=" + nlohmann::json(p).dump() + ")"] = spread;
    ok = ok && spread <= 3.0;
  }
  const double qr = q_r_roundtrip(nu, gaussian(c.grid), c.partition, c.grid);
  r.constants["q_r_roundtrip"] = qr;
  ok = ok && qr <= 1e-6;
  r.pass = ok;
  finalize(r);
  out.reports.push_back(r);
  out.payload["ratios"] = entries;
  return out;
}

CommandResult cmd_cz_demo(const Context& c) {
  const Grid& g = c.grid;
  EstimateReport r = new_report("cz_demo", c.cfg.nu, g);
  r.params["seed"] = static_cast<double>(c.cfg.seed);
  std::mt19937_64 rng(c.cfg.seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> centre(-0.75 * g.half_width(), 0.75 * g.half_width());
  const double two_l = 2.0 * g.half_width();
  double worst_rec = 0.0, worst_mean = 0.0, worst_dom = -std::numeric_limits<double>::infinity();
  bool bracket = true, lengths = true;
  std::vector<GridFunction> inputs;
  nlohmann::json first;
  for (int t = 0; t < 20; ++t) {
    const double c1 = centre(rng), c2 = centre(rng), w = 0.2 + std::abs(nd(rng));
    std::vector<double> noise(g.size());
    for (auto& v : noise) v = nd(rng);
    GridFunction f(g.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double x = g.x(i);
      f[i] = 0.1 * noise[i] * std::exp(-(x - c1) * (x - c1) / w) + 3.0 * std::exp(-4.0 * (x - c2) * (x - c2)) * std::sin(5.0 * x);
    }
    const double l1 = l1_norm(g, f);
    const double thr = l1 / two_l * (1.5 + t);
    const auto d = cz_decompose(f, thr, g);
    if (t == 0) first = cz_json(d);
    worst_rec = std::max(worst_rec, d.reconstruction_error(f));
    for (const auto& b : d.bad_parts) {
      CompensatedSum<double> s;
      for (std::size_t i = b.first; i < b.last; ++i) s += b.values[i];
      worst_mean = std::max(worst_mean, std::abs(g.spacing() * s.value()));
      const double avg = CZDecomposition::cube_average(g, f, b.first, b.last, b.cube.length);
      bracket = bracket && avg > thr && avg <= 2.0 * thr;
    }
    lengths = lengths && d.cube_total_length() <= d.l1_norm / thr;
    r.traces["cube_count"].push_back({t, static_cast<double>(d.bad_parts.size())});
    const auto m = maximal_function(f, g);
    for (int l = 0; l <= 10; ++l) {
      const auto conv = decay_convolution(f, std::ldexp(1.0, -l), c.cfg.epsilon, g);
      for (std::size_t i = 0; i < f.size(); ++i) worst_dom = std::max(worst_dom, conv[i] - m.values[i]);
    }
    inputs.push_back(f);
  }
  r.constants["reconstruction_error_eps"] = worst_rec;
  r.constants["bad_part_mean_max"] = worst_mean;
  r.constants["bracket_ok"] = bracket ? 1.0 : 0.0;
  r.constants["length_ok"] = lengths ? 1.0 : 0.0;
  r.constants["maximal_domination_excess"] = worst_dom;
  bool fs_ok = true;
  for (double p : {1.5, 3.0}) {
    const double v = fefferman_stein_check(inputs, p, g);
    r.constants["fefferman_stein(p=" + nlohmann::json(p).dump() + ")"] = v;
    fs_ok = fs_ok && v >= 1.0;
  }
  r.pass = worst_rec <= 1.0 && worst_mean <= 1e-12 && bracket && lengths && worst_dom <= 1e-8 && fs_ok;
  finalize(r);
  return {{r}, {{"first_decomposition", first}}};
}

using Handler = CommandResult (*)(const Context&);

Handler handler_for(const std::string& command) {
  static const std::map<std::string, Handler> table = {
      {"poly", cmd_poly},
      {"wave", cmd_wave},
      {"bound-states", cmd_bound_states},
      {"transform-check", cmd_transform_check},
      {"kernel", cmd_kernel},
      {"verify-decay", cmd_verify_decay},
      {"verify-weighted", cmd_verify_weighted},
      {"scaling", cmd_scaling},
      {"hormander", cmd_hormander},
      {"weak11", cmd_weak11},
      {"lp", cmd_lp},
      {"cz-demo", cmd_cz_demo},
  };
  const auto it = table.find(command);
  return it == table.end() ? nullptr : it->second;
}

}  // namespace

RunReport dispatch(const std::string& command, const RunConfig& config) {
  const bool all = command == "all";
  if (!all && !handler_for(command)) throw UsageError("unknown command '" + command + "'");
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Context ctx(config);
  RunReport rep;
  rep.command = command;
  rep.config = config.to_json();
  rep.config_digest = config.digest();
  if (all) {
    // Commands share the pool, so each one runs its own cells serially.
    RunConfig inner = config;
    inner.jobs = 1;
    const Context inner_ctx(inner);
    std::vector<std::string> names;
    std::vector<std::function<CommandResult()>> tasks;
    for (const auto& name : command_names()) {
      if (name == "all") continue;
      names.push_back(name);
      tasks.push_back([&inner_ctx, name] { return handler_for(name)(inner_ctx); });
    }
    const auto results = run_pool(tasks, config.jobs);
    for (std::size_t q = 0; q < results.size(); ++q) {
      for (const auto& r : results[q].reports) rep.reports.push_back(r);
      if (!results[q].payload.empty()) rep.payload[names[q]] = results[q].payload;
    }
  } else {
    auto res = handler_for(command)(ctx);
    rep.reports = std::move(res.reports);
    rep.payload = std::move(res.payload);
  }
  rep.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::vector<std::filesystem::path> emit(const RunReport& report, const RunConfig& config) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec || !fs::is_directory(config.out_dir))
    throw IoError("cannot create output directory " + config.out_dir.string());
  const std::string stem = report.command + "-" + report.config_digest;
  std::vector<fs::path> written;
  auto write = [&](const fs::path& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << body;
    os.close();
    if (!os) throw IoError("cannot write " + path.string());
    written.push_back(path);
  };
  if (config.format == OutputFormat::json) write(config.out_dir / (stem + ".json"), report.to_json().dump(2) + "\n");
  std::ostringstream csv;
  csv << "estimate_id,j,value\n";
  for (const auto& r : report.reports) write_trace_csv(csv, r, false);
  write(config.out_dir / (stem + ".csv"), csv.str());
  return written;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Spectral multiplier verification suite for Poschl-Teller operators"};
  std::string command;
  RunConfig flags;
  std::string format = "json", out_dir = ".", config_path;
  app.add_option("command", command, "One of: poly wave bound-states transform-check kernel verify-decay "
                                     "verify-weighted scaling hormander weak11 lp cz-demo all")
      ->required();
  auto* o_nu = app.add_option("--nu", flags.nu, "Poschl-Teller order");
  auto* o_L = app.add_option("--L", flags.L, "Box half-width");
  auto* o_n = app.add_option("--n", flags.n_points, "Grid points (power of two)");
  auto* o_jmin = app.add_option("--jmin", flags.j_min, "Lowest band index");
  auto* o_jmax = app.add_option("--jmax", flags.j_max, "Highest band index");
  auto* o_eps = app.add_option("--eps", flags.epsilon, "Decay exponent epsilon");
  auto* o_alpha = app.add_option("--alpha", flags.alpha, "Smoothness order alpha");
  auto* o_kmax = app.add_option("--kmax", flags.k_max, "Frequency cutoff");
  auto* o_nk = app.add_option("--nk", flags.n_k_per_band, "k-rule nodes for transform-check");
  auto* o_mult = app.add_option("--multiplier", flags.multiplier_id, "one, mihlin, ipow:<beta>, energy, heat:<t>");
  auto* o_format = app.add_option("--format", format, "csv or json");
  auto* o_jobs = app.add_option("--jobs", flags.jobs, "Worker threads");
  auto* o_out = app.add_option("--out", out_dir, "Output directory");
  auto* o_seed = app.add_option("--seed", flags.seed, "Seed for random test inputs");
  app.add_option("--config", config_path, "JSON config file; flags override it");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw IoError("cannot read config file " + config_path);
      nlohmann::json j;
      try {
        is >> j;
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
      }
      cfg.merge_json(j);
    }
    if (o_nu->count()) cfg.nu = flags.nu;
    if (o_L->count()) cfg.L = flags.L;
    if (o_n->count()) cfg.n_points = flags.n_points;
    if (o_jmin->count()) cfg.j_min = flags.j_min;
    if (o_jmax->count()) cfg.j_max = flags.j_max;
    if (o_eps->count()) cfg.epsilon = flags.epsilon;
    if (o_alpha->count()) cfg.alpha = flags.alpha;
    if (o_kmax->count()) cfg.k_max = flags.k_max;
    if (o_nk->count()) cfg.n_k_per_band = flags.n_k_per_band;
    if (o_mult->count()) cfg.multiplier_id = flags.multiplier_id;
    if (o_format->count()) cfg.format = parse_format(format);
    if (o_jobs->count()) cfg.jobs = flags.jobs;
    if (o_out->count()) cfg.out_dir = out_dir;
    if (o_seed->count()) cfg.seed = flags.seed;

    const auto rep = dispatch(command, cfg);
    const auto paths = emit(rep, cfg);
    for (const auto& r : rep.reports)
      std::cout << (r.pass ? "pass " : "FAIL ") << r.estimate_id << " (nu=" << r.nu << ")\n";
    for (const auto& p : paths) std::cout << "wrote " << p.string() << "\n";
    std::cout << rep.command << ": " << (rep.pass() ? "pass" : "FAIL") << " digest=" << rep.config_digest
              << " elapsed=" << rep.elapsed_seconds << "s\n";
    return rep.pass() ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ptspec
