#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "hierops/energy_window.hpp"
#include "hierops/error.hpp"
#include "hierops/hierarchy.hpp"
#include "hierops/linalg.hpp"
#include "hierops/rng.hpp"
#include "hierops/stats.hpp"

namespace hierops {

namespace detail {

/// Ranges [first, last) of numerically degenerate eigenvalues lying in the
/// window (membership decided by the group's lowest eigenvalue).
inline std::vector<std::pair<Eigen::Index, Eigen::Index>> window_groups(const SpectralData& sd,
                                                                        EnergyWindow window) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> groups;
  const Eigen::Index n = sd.eigenvalues.size();
  if (n == 0) return groups;
  const double tol = 1e-9 * std::max(1.0, sd.eigenvalues.cwiseAbs().maxCoeff());
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index end = i + 1;
    while (end < n && sd.eigenvalues(end) - sd.eigenvalues(end - 1) <= tol) ++end;
    if (window.contains(sd.eigenvalues(i))) groups.emplace_back(i, end);
    i = end;
  }
  return groups;
}

inline void require_vectors(const SpectralData& sd) {
  if (!sd.has_vectors()) throw ArgumentError("eigenfunction diagnostics need eigenvectors");
}

}  // namespace detail

/// Q(j, k; I) = sup |<delta_k, f(H) delta_j>| over f supported in I with
/// |f| <= 1. For a finite matrix this is sum over distinct eigenvalues in I
/// of |P_E(j, k)|, P_E the spectral projector.
inline double eigenfunction_correlator(const SpectralData& sd, std::size_t j, std::size_t k,
                                       EnergyWindow window) {
  detail::require_vectors(sd);
  if (j >= sd.dimension() || k >= sd.dimension()) throw ArgumentError("site outside volume");
  const auto rj = static_cast<Eigen::Index>(j);
  const auto rk = static_cast<Eigen::Index>(k);
  double q = 0.0;
  for (const auto& [first, last] : detail::window_groups(sd, window)) {
    double p = 0.0;
    for (Eigen::Index i = first; i < last; ++i) p += sd.eigenvectors(rj, i) * sd.eigenvectors(rk, i);
    q += std::abs(p);
  }
  return q;
}

/// Q(j, k; I) for every k.
inline std::vector<double> correlator_row(const SpectralData& sd, std::size_t j, EnergyWindow window) {
  detail::require_vectors(sd);
  if (j >= sd.dimension()) throw ArgumentError("site outside volume");
  const auto rj = static_cast<Eigen::Index>(j);
  const auto n = static_cast<Eigen::Index>(sd.dimension());
  std::vector<double> out(sd.dimension(), 0.0);
  Eigen::VectorXd projector_row(n);
  for (const auto& [first, last] : detail::window_groups(sd, window)) {
    projector_row.setZero();
    for (Eigen::Index i = first; i < last; ++i)
      projector_row += sd.eigenvectors(rj, i) * sd.eigenvectors.col(i);
    for (Eigen::Index k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] += std::abs(projector_row(k));
  }
  return out;
}

/// sum_k |psi(k)|^q for a unit vector.
inline double ipr(const Eigen::Ref<const Eigen::VectorXd>& psi, double q = 4.0) {
  if (std::abs(psi.squaredNorm() - 1.0) > 1e-8) throw ArgumentError("ipr needs a unit vector");
  if (q == 4.0) return psi.array().square().square().sum();
  return psi.array().abs().pow(q).sum();
}

/// sum_k 2^{(c/4) d(origin, k)} |psi(k)|^2.
inline double decay_moment(const Eigen::Ref<const Eigen::VectorXd>& psi, double c, std::size_t origin,
                           const HierarchySpec& h) {
  if (static_cast<std::size_t>(psi.size()) != h.volume()) throw ArgumentError("vector size != volume");
  double acc = 0.0;
  for (std::size_t k = 0; k < h.volume(); ++k) {
    const double w = std::exp2(0.25 * c * static_cast<double>(h.distance(origin, k)));
    acc += w * psi(static_cast<Eigen::Index>(k)) * psi(static_cast<Eigen::Index>(k));
  }
  return acc;
}

/// Decay moments of the eigenvectors with eigenvalue in `window`, each taken
/// about the site where |psi| is largest.
inline std::vector<double> decay_moments_in_window(const SpectralData& sd, double c, EnergyWindow window,
                                                   const HierarchySpec& h) {
  detail::require_vectors(sd);
  std::vector<double> out;
  for (std::size_t i = 0; i < sd.dimension(); ++i) {
    if (!window.contains(sd.eigenvalues(static_cast<Eigen::Index>(i)))) continue;
    Eigen::Index origin = 0;
    sd.vector(i).cwiseAbs().maxCoeff(&origin);
    out.push_back(decay_moment(sd.vector(i), c, static_cast<std::size_t>(origin), h));
  }
  return out;
}

struct CorrelatorProfile {
  /// Mean E[Q(j, k; I)] over sites k with d(j, k) = d, index d = 0..n.
  std::vector<double> means;
  /// -slope of log2(mean) against d over d >= 1; +inf if fewer than two
  /// distances carry nonzero mass.
  double fitted_rate = 0.0;
  double fit_residual = 0.0;
  stats::Interval rate_ci;
  std::size_t realizations = 0;
};

namespace detail {

inline double profile_rate(const std::vector<std::vector<double>>& per_real,
                           std::span<const std::size_t> pick, double* residual,
                           std::vector<double>* means_out) {
  const std::size_t levels = per_real.front().size();
  std::vector<double> means(levels, 0.0);
  for (std::size_t i : pick)
    for (std::size_t d = 0; d < levels; ++d) means[d] += per_real[i][d];
  for (auto& m : means) m /= static_cast<double>(pick.size());
  std::vector<double> x, y;
  for (std::size_t d = 1; d < levels; ++d) {
    if (means[d] > 0.0) {
      x.push_back(static_cast<double>(d));
      y.push_back(std::log2(means[d]));
    }
  }
  if (means_out) *means_out = means;
  if (x.size() < 2) {
    if (residual) *residual = 0.0;
    return std::numeric_limits<double>::infinity();
  }
  const auto fit = stats::linear_fit(x, y);
  if (residual) *residual = fit.residual;
  return -fit.slope;
}

}  // namespace detail

/// Monte Carlo correlator profile about site j with a percentile-bootstrap
/// interval for the decay rate (resampling realizations).
inline CorrelatorProfile correlator_profile(std::span<const SpectralData> realizations, EnergyWindow window,
                                            std::size_t j, const HierarchySpec& h,
                                            std::uint64_t bootstrap_seed = 0x5eed,
                                            std::size_t resamples = 400) {
  if (realizations.size() < 20) throw StatisticsError("correlator profile needs >= 20 realizations");
  std::vector<std::vector<double>> per_real;
  std::vector<std::size_t> count(h.depth() + 1, 0);
  for (std::size_t k = 0; k < h.volume(); ++k) ++count[h.distance(j, k)];
  bool any_in_window = false;
  for (const auto& sd : realizations) {
    if (sd.dimension() != h.volume()) throw ArgumentError("realization size != volume");
    if (!detail::window_groups(sd, window).empty()) any_in_window = true;
    const auto row = correlator_row(sd, j, window);
    std::vector<double> by_distance(h.depth() + 1, 0.0);
    for (std::size_t k = 0; k < row.size(); ++k) by_distance[h.distance(j, k)] += row[k];
    for (std::size_t d = 0; d <= h.depth(); ++d) by_distance[d] /= static_cast<double>(count[d]);
    per_real.push_back(std::move(by_distance));
  }
  if (!any_in_window) throw StatisticsError("no eigenvalue in the correlator window");

  CorrelatorProfile out;
  out.realizations = realizations.size();
  std::vector<std::size_t> all(per_real.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  out.fitted_rate = detail::profile_rate(per_real, all, &out.fit_residual, &out.means);
  if (std::isfinite(out.fitted_rate)) {
    Engine rng = make_stream(bootstrap_seed, 0);
    out.rate_ci = stats::bootstrap_ci(
        per_real.size(),
        [&per_real](std::span<const std::size_t> pick) {
          const double r = detail::profile_rate(per_real, pick, nullptr, nullptr);
          if (!std::isfinite(r)) throw StatisticsError("degenerate resample");
          return r;
        },
        rng, resamples);
  } else {
    out.rate_ci = {out.fitted_rate, out.fitted_rate};
  }
  return out;
}

/// sum_{y outside B_m(x)} Q(x, y; W).
inline double correlator_mass_outside(const SpectralData& sd, std::size_t x, unsigned m, EnergyWindow window,
                                      const HierarchySpec& h) {
  const auto row = correlator_row(sd, x, window);
  double acc = 0.0;
  for (std::size_t y = 0; y < row.size(); ++y)
    if (h.distance(x, y) > m) acc += row[y];
  return acc;
}

/// Normalized triangular kernel of half-width `bandwidth`.
inline double triangular_kernel(double u, double bandwidth) {
  const double a = std::abs(u) / bandwidth;
  return a < 1.0 ? (1.0 - a) / bandwidth : 0.0;
}

struct IprAverage {
  double value = 0.0;
  /// Per-realization sum_l ipr(psi_l) K(E - l) and sum_l K(E - l).
  std::vector<double> numerator;
  std::vector<double> denominator;
};

/// E[sum_l ipr(psi_l) K(E - l)] / E[sum_l K(E - l)].
inline IprAverage ipr_spectral_average(std::span<const SpectralData> realizations, double energy,
                                       double bandwidth) {
  if (!(bandwidth > 0.0)) throw ConfigError("bandwidth must be > 0");
  IprAverage out;
  double num = 0.0, den = 0.0;
  for (const auto& sd : realizations) {
    detail::require_vectors(sd);
    double rn = 0.0, rd = 0.0;
    for (std::size_t i = 0; i < sd.dimension(); ++i) {
      const double k = triangular_kernel(energy - sd.eigenvalues(static_cast<Eigen::Index>(i)), bandwidth);
      if (k == 0.0) continue;
      rn += k * ipr(sd.vector(i));
      rd += k;
    }
    out.numerator.push_back(rn);
    out.denominator.push_back(rd);
    num += rn;
    den += rd;
  }
  if (!(den > 0.0)) throw StatisticsError("no kernel mass at the requested energy");
  out.value = num / den;
  return out;
}

/// Bootstrap interval for the ratio estimator of an IprAverage.
inline stats::Interval ipr_average_ci(const IprAverage& avg, std::uint64_t seed = 0x1b7,
                                      std::size_t resamples = 400) {
  Engine rng = make_stream(seed, 0);
  return stats::bootstrap_ci(
      avg.numerator.size(),
      [&avg](std::span<const std::size_t> pick) {
        double n = 0.0, d = 0.0;
        for (std::size_t i : pick) {
          n += avg.numerator[i];
          d += avg.denominator[i];
        }
        if (!(d > 0.0)) throw StatisticsError("empty resample");
        return n / d;
      },
      rng, resamples);
}

}  // namespace hierops
