#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "hierops/density.hpp"
#include "hierops/error.hpp"
#include "hierops/linalg.hpp"
#include "hierops/models.hpp"
#include "hierops/stats.hpp"

namespace hierops {

/// One realization of mu_n restricted to a window: points 2^n (lambda - E).
struct PointProcessSample {
  std::vector<double> points;
  double window_lo = 0.0;
  double window_hi = 0.0;
};

inline PointProcessSample rescale_points(std::span<const double> eigs, double energy, unsigned n,
                                         double window_halfwidth) {
  if (!std::isfinite(window_halfwidth) || window_halfwidth < 0.0)
    throw ArgumentError("window half-width must be finite and >= 0");
  const double scale = std::exp2(static_cast<double>(n));
  PointProcessSample out{{}, -window_halfwidth, window_halfwidth};
  for (double lambda : eigs) {
    const double p = scale * (lambda - energy);
    if (std::abs(p) <= window_halfwidth) out.points.push_back(p);
  }
  return out;
}

/// Index window [floor(lo N), ceil(hi N)) of an ascending spectrum.
struct QuantileWindow {
  double lo = 0.375;
  double hi = 0.625;
};

/// Consecutive-gap ratios min(s_i, s_{i+1}) / max(s_i, s_{i+1}) inside the
/// window. Two zero gaps count as ratio 1.
inline std::vector<double> gap_ratios(std::span<const double> eigs, QuantileWindow window = {}) {
  if (!(window.lo >= 0.0 && window.lo < window.hi && window.hi <= 1.0))
    throw ArgumentError("quantile window must satisfy 0 <= lo < hi <= 1");
  if (!std::is_sorted(eigs.begin(), eigs.end())) throw ArgumentError("eigenvalues must be ascending");
  const double n = static_cast<double>(eigs.size());
  const auto first = static_cast<std::size_t>(std::floor(window.lo * n));
  const auto last = std::min(eigs.size(), static_cast<std::size_t>(std::ceil(window.hi * n)));
  if (last < first + 3) throw StatisticsError("fewer than 3 eigenvalues in the gap-ratio window");
  std::vector<double> out;
  out.reserve(last - first - 2);
  for (std::size_t i = first; i + 2 < last; ++i) {
    const double a = eigs[i + 1] - eigs[i];
    const double b = eigs[i + 2] - eigs[i + 1];
    const double hi = std::max(a, b);
    out.push_back(hi == 0.0 ? 1.0 : std::min(a, b) / hi);
  }
  return out;
}

inline double gap_ratio_mean(std::span<const double> eigs, QuantileWindow window = {}) {
  const auto r = gap_ratios(eigs, window);
  return stats::mean(r);
}

inline double gap_ratio_mean(const Eigen::VectorXd& eigs, QuantileWindow window = {}) {
  return gap_ratio_mean(std::span<const double>(eigs.data(), static_cast<std::size_t>(eigs.size())),
                        window);
}

/// Poisson and GOE reference values of the mean gap ratio.
inline constexpr double kPoissonGapRatio = 0.38629436111989061;  // 2 ln 2 - 1
inline constexpr double kGoeGapRatio = 0.5307;

/// Gaussian-kernel estimate of E <delta_site, K(. - H) delta_site>. Without a
/// site the weights are 1/N (site average), which needs no eigenvectors.
inline DensityGrid empirical_dos(std::span<const SpectralData> realizations,
                                 std::optional<std::size_t> site, double bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw ConfigError("bandwidth must be > 0");
  if (realizations.empty()) throw StatisticsError("empirical DOS needs >= 1 realization");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& sd : realizations) {
    if (sd.dimension() == 0) throw ArgumentError("empty spectrum");
    if (site && !sd.has_vectors()) throw ArgumentError("site-resolved DOS needs eigenvectors");
    if (site && *site >= sd.dimension()) throw ArgumentError("site outside volume");
    lo = std::min(lo, sd.eigenvalues.minCoeff());
    hi = std::max(hi, sd.eigenvalues.maxCoeff());
  }
  constexpr double kReach = 8.0;
  const double step = bandwidth / 10.0;
  const double start = lo - kReach * bandwidth;
  const auto count = static_cast<std::size_t>(std::ceil((hi - lo + 2 * kReach * bandwidth) / step)) + 1;
  DensityGrid g;
  g.nodes.resize(count);
  g.values.assign(count, 0.0);
  for (std::size_t i = 0; i < count; ++i) g.nodes[i] = start + step * static_cast<double>(i);

  const double norm = 1.0 / (bandwidth * std::sqrt(2.0 * std::numbers::pi) *
                             static_cast<double>(realizations.size()));
  for (const auto& sd : realizations) {
    const double uniform = 1.0 / static_cast<double>(sd.dimension());
    for (std::size_t l = 0; l < sd.dimension(); ++l) {
      const double lambda = sd.eigenvalues(static_cast<Eigen::Index>(l));
      const double w = site ? std::pow(sd.eigenvectors(static_cast<Eigen::Index>(*site),
                                                       static_cast<Eigen::Index>(l)), 2)
                            : uniform;
      if (w == 0.0) continue;
      const auto i0 = static_cast<std::size_t>(std::max(0.0, std::floor((lambda - kReach * bandwidth - start) / step)));
      const auto i1 = std::min(count, static_cast<std::size_t>(std::ceil((lambda + kReach * bandwidth - start) / step)) + 1);
      for (std::size_t i = i0; i < i1; ++i) {
        const double z = (g.nodes[i] - lambda) / bandwidth;
        g.values[i] += w * norm * std::exp(-0.5 * z * z);
      }
    }
  }
  g.tail_mass = std::max(0.0, 1.0 - g.integral());
  return g;
}

inline double semicircle_density(double energy) {
  return std::sqrt(std::max(0.0, 4.0 - energy * energy)) / (2.0 * std::numbers::pi);
}

/// <delta_k, 1_[lambda_inf - lambda, lambda_inf](Delta) delta_k> in infinite
/// volume. The spectral measure of delta_k puts weight 1/2 on E_0 = 0 and
/// 2^{-r-1} on E_r, r >= 1. With explicit couplings p_r = 0 beyond the list,
/// which is also the finite-volume measure of depth n = list length.
inline double band_edge_mass(const LaplacianSpec& spec, double lambda) {
  if (spec.couplings.empty()) {
    // lambda_inf - E_r = lambda_inf 2^{-c r}.
    const double top = spec.total_coupling();
    double tail = top;
    unsigned r = 0;
    while (tail > lambda) {
      tail *= std::exp2(-spec.c);
      ++r;
      if (r > 100000) throw NumericalError("band-edge mass did not converge");
    }
    return std::exp2(-static_cast<double>(r));
  }
  const auto& p = spec.couplings;
  // tails[r] = sum_{s > r} p_s, computed from the top so it is exact at r = L.
  std::vector<double> tails(p.size() + 1, 0.0);
  for (std::size_t r = p.size(); r-- > 0;) tails[r] = tails[r + 1] + p[r];
  double mass = 0.0;
  for (std::size_t r = 0; r <= p.size(); ++r) {
    if (tails[r] <= lambda) mass += r < p.size() ? std::exp2(-static_cast<double>(r) - 1.0)
                                                 : std::exp2(-static_cast<double>(r));
  }
  return mass;
}

struct SpectralDimensionFit {
  double estimate = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  std::vector<double> masses;
};

/// Log-spaced grid lambda_inf 10^{-k}, k from 2 to 30, descending.
inline std::vector<double> default_dimension_grid(const LaplacianSpec& spec, std::size_t count = 200) {
  const double top = spec.total_coupling();
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i)
    grid[i] = top * std::pow(10.0, -2.0 - 28.0 * static_cast<double>(i) / static_cast<double>(count - 1));
  return grid;
}

/// Slope of ln(band-edge mass) against ln(sqrt(lambda)).
inline SpectralDimensionFit spectral_dimension(const LaplacianSpec& spec,
                                               std::span<const double> lambda_grid) {
  validate(spec);
  const double top = spec.total_coupling();
  if (lambda_grid.size() < 2) throw ConfigError("spectral-dimension grid needs >= 2 values");
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    const double l = lambda_grid[i];
    if (!(l > 0.0 && l < top)) throw ConfigError("grid values must lie in (0, lambda_inf)");
    if (i > 0 && !(l < lambda_grid[i - 1])) throw ConfigError("grid must be strictly descending");
  }
  SpectralDimensionFit fit;
  std::vector<double> x, y;
  for (double l : lambda_grid) {
    const double m = band_edge_mass(spec, l);
    fit.masses.push_back(m);
    x.push_back(0.5 * std::log(l));
    y.push_back(std::log(m));
  }
  const auto lf = stats::linear_fit(x, y);
  fit.estimate = lf.slope;
  fit.intercept = lf.intercept;
  fit.residual = lf.residual;
  return fit;
}

}  // namespace hierops
