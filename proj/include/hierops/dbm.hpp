#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hierops/error.hpp"
#include "hierops/linalg.hpp"
#include "hierops/rng.hpp"

namespace hierops {

/// Ascending particle configuration lambda_1 <= ... <= lambda_N.
struct DBMState {
  std::vector<double> particles;
  double elapsed = 0.0;

  std::size_t size() const noexcept { return particles.size(); }
};

/// Symmetric Gaussian matrix with entry variance (1 + delta_kl) t / N, drawn
/// upper triangle column by column.
inline Eigen::MatrixXd gaussian_flow_increment(std::size_t size, double duration, Engine& rng) {
  const auto n = static_cast<Eigen::Index>(size);
  const double off_sd = std::sqrt(duration / static_cast<double>(size));
  const double diag_sd = off_sd * std::numbers::sqrt2;
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < k; ++j) g(j, k) = g(k, j) = off_sd * standard_normal(rng);
    g(k, k) = diag_sd * standard_normal(rng);
  }
  return g;
}

/// Spectrum of diag(particles) + Phi(duration). By orthogonal invariance of
/// the Gaussian flow this is the exact law of Dyson Brownian motion at time
/// `duration` started from `state`.
inline DBMState evolve_exact(const DBMState& state, double duration, Engine& rng) {
  if (!(duration >= 0.0)) throw ArgumentError("duration must be >= 0");
  if (duration == 0.0 || state.size() == 0) return state;
  Eigen::MatrixXd m = gaussian_flow_increment(state.size(), duration, rng);
  for (std::size_t i = 0; i < state.size(); ++i)
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += state.particles[i];
  const Eigen::VectorXd w = eigvalsh(m);
  return {std::vector<double>(w.data(), w.data() + w.size()), state.elapsed + duration};
}

struct SdeOptions {
  double step = 1e-4;
  bool noise = true;
  unsigned max_halvings = 40;
};

/// Euler-Maruyama for
///   d lambda_j = sqrt(2/N) dB_j + (1/N) sum_{i != j} dt / (lambda_j - lambda_i).
/// A step that breaks strict ordering is retried with half the step (fresh
/// noise); after `max_halvings` failures a CollisionError is thrown.
inline DBMState evolve_sde(const DBMState& state, double duration, Engine& rng, const SdeOptions& opt = {}) {
  if (!(duration >= 0.0)) throw ArgumentError("duration must be >= 0");
  if (!(opt.step > 0.0)) throw ArgumentError("step must be > 0");
  for (std::size_t i = 1; i < state.size(); ++i)
    if (!(state.particles[i] > state.particles[i - 1]))
      throw ArgumentError("SDE integration needs strictly distinct ascending particles");
  const std::size_t n = state.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> lambda = state.particles;
  std::vector<double> drift(n), proposal(n);
  double t = 0.0;
  while (t < duration) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (i != j) acc += 1.0 / (lambda[j] - lambda[i]);
      drift[j] = inv_n * acc;
    }
    double dt = std::min(opt.step, duration - t);
    unsigned halvings = 0;
    for (;;) {
      const double noise_sd = std::sqrt(2.0 * dt * inv_n);
      for (std::size_t j = 0; j < n; ++j)
        proposal[j] = lambda[j] + drift[j] * dt + (opt.noise ? noise_sd * standard_normal(rng) : 0.0);
      bool ordered = true;
      for (std::size_t j = 1; j < n && ordered; ++j) ordered = proposal[j] > proposal[j - 1];
      if (ordered) break;
      if (++halvings > opt.max_halvings) throw CollisionError("DBM step underflow: particles collided");
      dt *= 0.5;
    }
    lambda.swap(proposal);
    t += dt;
  }
  return {std::move(lambda), state.elapsed + duration};
}

struct RecursionTrace {
  std::vector<std::size_t> sizes;   ///< 2^0, ..., 2^n
  std::vector<double> durations;    ///< t_k = 2^{-(1+c) k}; t_0 applies to the seed
};

/// How sigma(H_0) is seeded.
enum class RecursionSeed {
  /// One N(0, 2) value: the law of the 1x1 block Phi_{0,0}, i.e. the k = 0
  /// step evolved from {0} for t_0 = 1. Matches the direct matrix model.
  kMatrixModel,
  /// One N(0, 1) value.
  kStandardNormal,
};

struct RecursiveSpectrum {
  std::vector<double> eigenvalues;
  RecursionTrace trace;
};

namespace detail {

inline std::vector<double> recursive_level(unsigned k, double c, Engine& rng, RecursionSeed seed) {
  if (k == 0) {
    const double sd = seed == RecursionSeed::kMatrixModel ? std::numbers::sqrt2 : 1.0;
    return {sd * standard_normal(rng)};
  }
  auto left = recursive_level(k - 1, c, rng, seed);
  const auto right = recursive_level(k - 1, c, rng, seed);
  std::vector<double> merged(left.size() + right.size());
  std::merge(left.begin(), left.end(), right.begin(), right.end(), merged.begin());
  const double duration = std::exp2(-(1.0 + c) * static_cast<double>(k));
  return evolve_exact(DBMState{std::move(merged), 0.0}, duration, rng).particles;
}

}  // namespace detail

/// Spectrum of H_n built by n merge-and-evolve steps: level k joins two
/// independent level-(k-1) spectra and runs DBM for t_k = 2^{-(1+c) k}.
inline RecursiveSpectrum recursive_spectrum(unsigned n, double c, Engine& rng,
                                            RecursionSeed seed = RecursionSeed::kMatrixModel) {
  RecursiveSpectrum out;
  for (unsigned k = 0; k <= n; ++k) {
    out.trace.sizes.push_back(std::size_t{1} << k);
    out.trace.durations.push_back(std::exp2(-(1.0 + c) * static_cast<double>(k)));
  }
  out.eigenvalues = detail::recursive_level(n, c, rng, seed);
  return out;
}

}  // namespace hierops
