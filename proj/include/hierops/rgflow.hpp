#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "hierops/density.hpp"
#include "hierops/energy_window.hpp"
#include "hierops/error.hpp"
#include "hierops/potential.hpp"
#include "hierops/rng.hpp"
#include "hierops/stats.hpp"

namespace hierops {

/// Grid used for the reciprocal variable 1/(2V) and for the output of T_p.
/// Nodes follow `sinh_nodes(0, scale, max_abs, nodes)`; `nodes` is kept even
/// so that 0 is never a node.
struct TransportOptions {
  double scale = 0.02;
  double max_abs = 1e6;
  std::size_t nodes = 4096;
  /// Width of the excised interval around v = 0 (its image is unrepresented).
  double excision = 1e-6;
  /// Mass within |v| < concentration_radius above which the input is
  /// considered concentrated at 0.
  double concentration_radius = 1e-3;
  double concentration_threshold = 0.05;
};

struct TransportDiagnostics {
  /// Trapezoid integral before renormalization minus (1 - tail_mass).
  double mass_defect = 0.0;
  /// Mass removed by clamping negative values (always 0 for this scheme).
  double clamp_mass = 0.0;
  /// Input mass excised around v = 0.
  double excised_mass = 0.0;
  bool singularity_warning = false;
};

/// Discretizes rho on a sinh grid centered at `center`; the analytic mass
/// outside the grid becomes tail_mass and the sampled values are rescaled to
/// carry the rest exactly.
inline DensityGrid discretize(const PotentialSpec& spec, const TransportOptions& opt = {},
                              double center = 0.0) {
  validate(spec);
  auto nodes = sinh_nodes(center, opt.scale, opt.max_abs, opt.nodes);
  const double tail = cdf(spec, nodes.front()) + (1.0 - cdf(spec, nodes.back()));
  DensityGrid g = sample_density(std::move(nodes), [&spec](double x) { return pdf(spec, x); });
  const double inside = g.integral();
  if (!(inside > 0.0)) throw ConfigError("distribution has no mass on the transport grid");
  for (auto& v : g.values) v *= (1.0 - tail) / inside;
  g.tail_mass = tail;
  return g;
}

/// rho(. + shift): same values on nodes moved by -shift.
inline DensityGrid shifted(DensityGrid g, double shift) {
  for (auto& x : g.nodes) x -= shift;
  return g;
}

/// T_p rho: density of (1/(2V) + 1/(2V'))^{-1} + p for V, V' i.i.d. ~ rho.
///
/// Pipeline: g(y) = rho(1/(2y)) / (2y^2) is the density of Y = 1/(2V); the
/// sum S = Y + Y' has density (g*g)(s) = 2 int_{y < s/2} g(y) g(s-y) dy
/// (mirrored for s < 0 so the fine part of the grid around 0 is always
/// inside the integration range); Z = 1/S has density (g*g)(1/z)/z^2; the
/// result is Z + p. Input tail mass enters as an atom of Y at 0. Output
/// tail mass is the probability that |S| < 1/max_abs plus the excised mass.
inline DensityGrid apply_T(const DensityGrid& rho, double p, const TransportOptions& opt = {},
                           TransportDiagnostics* diag = nullptr) {
  validate(rho, 1e-4);
  TransportDiagnostics local;
  TransportOptions o = opt;
  if (o.nodes % 2 == 1) ++o.nodes;
  if (rho.mass_between(-o.concentration_radius, o.concentration_radius) > o.concentration_threshold) {
    local.singularity_warning = true;
    o.max_abs *= 100.0;
  }
  local.excised_mass = rho.mass_between(-0.5 * o.excision, 0.5 * o.excision);
  const double input_tail = rho.tail_mass;

  const auto g = [&rho](double y) {
    if (y == 0.0) return 0.0;
    const double v = 0.5 / y;
    return rho(v) * 2.0 * v * v;  // rho(1/(2y)) / (2 y^2)
  };

  const auto y_nodes = sinh_nodes(0.0, o.scale, std::min(o.max_abs, 0.5 / o.excision), o.nodes);
  std::vector<double> g_at(y_nodes.size());
  for (std::size_t i = 0; i < y_nodes.size(); ++i) g_at[i] = g(y_nodes[i]);

  const auto conv = [&](double s) {
    const double half = 0.5 * s;
    double acc = 0.0;
    const double end_value = g(half) * g(half);
    if (s >= 0.0) {
      const auto stop = static_cast<std::size_t>(
          std::lower_bound(y_nodes.begin(), y_nodes.end(), half) - y_nodes.begin());
      double prev = 0.0;
      for (std::size_t i = 0; i < stop; ++i) {
        const double f = g_at[i] * g(s - y_nodes[i]);
        if (i > 0) acc += 0.5 * (prev + f) * (y_nodes[i] - y_nodes[i - 1]);
        prev = f;
      }
      if (stop > 0) acc += 0.5 * (prev + end_value) * (half - y_nodes[stop - 1]);
    } else {
      const auto start = static_cast<std::size_t>(
          std::upper_bound(y_nodes.begin(), y_nodes.end(), half) - y_nodes.begin());
      double prev = 0.0;
      for (std::size_t i = y_nodes.size(); i-- > start;) {
        const double f = g_at[i] * g(s - y_nodes[i]);
        if (i + 1 < y_nodes.size()) acc += 0.5 * (prev + f) * (y_nodes[i + 1] - y_nodes[i]);
        prev = f;
      }
      if (start < y_nodes.size()) acc += 0.5 * (prev + end_value) * (y_nodes[start] - half);
    }
    return 2.0 * acc + 2.0 * input_tail * g(s);
  };

  DensityGrid out;
  out.nodes = sinh_nodes(0.0, o.scale, o.max_abs, o.nodes);
  out.values.resize(out.nodes.size());
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    const double z = out.nodes[i];
    const double s = 1.0 / z;
    out.values[i] = std::max(0.0, conv(s) * s * s);
  }
  // |Z| > max_abs  <=>  |S| < 1/max_abs; (g*g) is flat there.
  const double near_zero = conv(0.0) * 2.0 / o.max_abs + input_tail * input_tail;
  out.tail_mass = std::min(1.0, near_zero + local.excised_mass);
  const double raw = out.integral();
  local.mass_defect = raw - (1.0 - out.tail_mass);
  if (!(raw > 0.0)) throw NumericalError("transport produced no mass on the grid");
  for (auto& v : out.values) v *= (1.0 - out.tail_mass) / raw;
  for (auto& x : out.nodes) x += p;
  if (diag) *diag = local;
  return out;
}

/// Gaussian-kernel smoothing of a grid density at x (integrated on a fine
/// auxiliary grid so the result does not depend on the node spacing).
inline double smooth_at(const DensityGrid& rho, double x, double bandwidth) {
  constexpr int kSteps = 320;
  const double lo = x - 8.0 * bandwidth;
  const double step = 16.0 * bandwidth / kSteps;
  const double norm = 1.0 / (bandwidth * std::sqrt(2.0 * std::numbers::pi));
  double acc = 0.0;
  for (int i = 0; i <= kSteps; ++i) {
    const double y = lo + step * i;
    const double z = (x - y) / bandwidth;
    const double w = (i == 0 || i == kSteps) ? 0.5 : 1.0;
    acc += w * rho(y) * norm * std::exp(-0.5 * z * z);
  }
  return acc * step;
}

/// Kernel density estimate together with its pointwise standard error.
struct McDensity {
  DensityGrid density;
  std::vector<double> standard_error;
  std::size_t samples = 0;
  double bandwidth = 0.0;
};

/// Samples of (1/(2V) + 1/(2V'))^{-1} + p.
inline std::vector<double> sample_T(const PotentialSpec& spec, double p, std::size_t count, Engine& rng) {
  validate(spec);
  std::vector<double> out(count);
  for (auto& w : out) {
    const double v1 = sample_one(spec, rng);
    const double v2 = sample_one(spec, rng);
    w = 1.0 / (0.5 / v1 + 0.5 / v2) + p;
  }
  return out;
}

/// Monte Carlo version of apply_T: Gaussian KDE of `count` samples on a
/// uniform grid over `range`, by default the [0.1%, 99.9%] sample quantiles.
inline McDensity mc_apply_T(const PotentialSpec& spec, double p, std::size_t count, double bandwidth,
                            Engine& rng, std::size_t grid_nodes = 512,
                            std::optional<std::pair<double, double>> range = std::nullopt) {
  if (count < 10000) throw ConfigError("Monte Carlo transport needs >= 10^4 samples");
  if (!(bandwidth > 0.0)) throw ConfigError("bandwidth must be > 0");
  auto w = sample_T(spec, p, count, rng);
  std::sort(w.begin(), w.end());
  const auto at_quantile = [&w](double q) {
    return w[static_cast<std::size_t>(q * static_cast<double>(w.size() - 1))];
  };
  const double lo = range ? range->first : at_quantile(0.001);
  const double hi = range ? range->second : at_quantile(0.999);
  if (!(lo < hi) || grid_nodes < 2) throw ConfigError("KDE grid needs lo < hi and >= 2 nodes");

  McDensity out;
  out.samples = count;
  out.bandwidth = bandwidth;
  out.density.nodes.resize(grid_nodes);
  out.density.values.resize(grid_nodes);
  out.standard_error.resize(grid_nodes);
  const double n = static_cast<double>(count);
  const double norm = 1.0 / (bandwidth * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t i = 0; i < grid_nodes; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_nodes - 1);
    const auto first = std::lower_bound(w.begin(), w.end(), x - 8.0 * bandwidth);
    const auto last = std::upper_bound(first, w.end(), x + 8.0 * bandwidth);
    double s1 = 0.0, s2 = 0.0;
    for (auto it = first; it != last; ++it) {
      const double z = (x - *it) / bandwidth;
      const double k = norm * std::exp(-0.5 * z * z);
      s1 += k;
      s2 += k * k;
    }
    const double m1 = s1 / n;
    const double m2 = s2 / n;
    out.density.nodes[i] = x;
    out.density.values[i] = m1;
    out.standard_error[i] = std::sqrt(std::max(0.0, m2 - m1 * m1) / n);
  }
  out.density.tail_mass = std::max(0.0, 1.0 - out.density.integral());
  return out;
}

/// Node-wise comparison of apply_T (smoothed with the KDE kernel) against
/// mc_apply_T inside the central 99% of the deterministic output.
struct TransportComparison {
  double max_z = 0.0;          ///< max |mc - det| / combined error
  double max_abs_diff = 0.0;
  std::size_t nodes_checked = 0;
};

/// The deterministic error estimate at a node is the change of the smoothed
/// apply_T value when the grid is halved; the Monte Carlo error is the KDE
/// standard deviation under the deterministic law.
inline TransportComparison compare_transport(const PotentialSpec& spec, double p, std::size_t samples,
                                             double bandwidth, Engine& rng, const TransportOptions& opt = {}) {
  const auto det = apply_T(discretize(spec, opt), p, opt);
  TransportOptions coarse = opt;
  coarse.nodes = opt.nodes / 2;
  const auto det_coarse = apply_T(discretize(spec, coarse), p, coarse);
  const auto [lo, hi] = det.central_region(0.005);
  const auto mc = mc_apply_T(spec, p, samples, bandwidth, rng, 512, std::pair{lo, hi});
  TransportComparison out;
  for (std::size_t i = 0; i < mc.density.size(); ++i) {
    const double x = mc.density.nodes[i];
    if (x < lo || x > hi) continue;
    const double d = smooth_at(det, x, bandwidth);
    const double err_det = std::abs(d - smooth_at(det_coarse, x, bandwidth));
    // KDE variance at x if det is the true law: (E K^2 - (E K)^2) / n.
    const double ek2 = smooth_at(det, x, bandwidth / std::numbers::sqrt2) /
                       (2.0 * std::sqrt(std::numbers::pi) * bandwidth);
    const double se_mc = std::sqrt(std::max(0.0, ek2 - d * d) / static_cast<double>(samples));
    const double err = std::sqrt(se_mc * se_mc + err_det * err_det);
    const double diff = std::abs(mc.density.values[i] - d);
    out.max_abs_diff = std::max(out.max_abs_diff, diff);
    out.max_z = std::max(out.max_z, diff / err);
    ++out.nodes_checked;
  }
  return out;
}

struct FlowReport {
  /// Shifts p_1, p_2, ... applied at each step.
  std::vector<double> shifts;
  /// max over the energy grid in I of ||T_{p_r}...T_{p_1} rho(. + E)||_inf.
  std::vector<double> sup_norms;
  /// max over x in I of the iterate started from rho itself.
  std::vector<double> window_max;
  /// Tail mass of the unshifted iterate after each step.
  std::vector<double> tail_mass;
  /// Slope of log2(sup_norm) against the step index r.
  double growth_exponent = 0.0;
  bool aborted = false;
  DensityGrid final_density;
};

struct FlowOptions {
  double eps = 1.0;
  double c = 1.0;
  unsigned steps = 8;
  EnergyWindow window{0.0, 0.0};
  std::size_t energies = 5;
  /// Flow stops when the iterate's tail mass exceeds this.
  double max_tail_mass = 1e-3;
  TransportOptions transport;
};

inline FlowReport flow(const DensityGrid& rho0, const FlowOptions& opt) {
  if (opt.steps < 1) throw ConfigError("flow needs at least one step");
  if (!(opt.window.lo <= opt.window.hi)) throw ConfigError("flow window needs lo <= hi");
  const std::size_t m = opt.window.lo == opt.window.hi ? 1 : std::max<std::size_t>(2, opt.energies);
  std::vector<double> energies(m);
  for (std::size_t e = 0; e < m; ++e)
    energies[e] = m == 1 ? opt.window.lo
                         : opt.window.lo + (opt.window.hi - opt.window.lo) * static_cast<double>(e) /
                                               static_cast<double>(m - 1);
  // Index 0 is the unshifted iterate, used for window_max and the final density.
  std::vector<DensityGrid> iterates{rho0};
  for (double e : energies) iterates.push_back(shifted(rho0, e));

  FlowReport report;
  for (unsigned r = 1; r <= opt.steps; ++r) {
    const double p = opt.eps * std::exp2(-opt.c * static_cast<double>(r));
    double sup = 0.0;
    for (std::size_t i = 0; i < iterates.size(); ++i) {
      iterates[i] = apply_T(iterates[i], p, opt.transport);
      if (i > 0) sup = std::max(sup, iterates[i].sup());
    }
    const auto& base = iterates.front();
    double wmax = std::max(base(opt.window.lo), base(opt.window.hi));
    for (std::size_t i = 0; i < base.size(); ++i)
      if (opt.window.contains(base.nodes[i])) wmax = std::max(wmax, base.values[i]);
    report.shifts.push_back(p);
    report.sup_norms.push_back(sup);
    report.window_max.push_back(wmax);
    report.tail_mass.push_back(base.tail_mass);
    if (base.tail_mass > opt.max_tail_mass) {
      report.aborted = true;
      break;
    }
  }
  report.final_density = iterates.front();
  if (report.sup_norms.size() >= 2) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < report.sup_norms.size(); ++i) {
      x.push_back(static_cast<double>(i + 1));
      y.push_back(std::log2(report.sup_norms[i]));
    }
    report.growth_exponent = stats::linear_fit(x, y).slope;
  }
  return report;
}

}  // namespace hierops
