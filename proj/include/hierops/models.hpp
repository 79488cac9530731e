#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hierops/error.hpp"
#include "hierops/hierarchy.hpp"
#include "hierops/linalg.hpp"
#include "hierops/potential.hpp"
#include "hierops/rng.hpp"

namespace hierops {

/// Hierarchical Laplacian: H(B) = p_r |phi_B><phi_B| on every level-r block,
/// r >= 1, with p_r = eps 2^{-c r} unless `couplings` (p_1, p_2, ...) is given.
struct LaplacianSpec {
  HierarchySpec hierarchy{0};
  double eps = 1.0;
  double c = 1.0;
  std::vector<double> couplings;

  double coupling(unsigned r) const {
    if (r == 0) return 0.0;
    if (!couplings.empty()) return r <= couplings.size() ? couplings[r - 1] : 0.0;
    return eps * std::exp2(-c * static_cast<double>(r));
  }

  /// sum_{r >= 1} p_r over the infinite hierarchy (finite list: its sum).
  double total_coupling() const {
    if (!couplings.empty()) {
      double s = 0.0;
      for (double p : couplings) s += p;
      return s;
    }
    const double q = std::exp2(-c);
    return eps * q / (1.0 - q);
  }
};

inline void validate(const LaplacianSpec& spec) {
  if (!spec.couplings.empty()) {
    if (spec.couplings.size() < spec.hierarchy.depth())
      throw ConfigError("explicit couplings must cover levels 1..n");
    for (double p : spec.couplings)
      if (!std::isfinite(p)) throw ConfigError("couplings must be finite");
    return;
  }
  if (!(spec.eps >= 0.0) || !std::isfinite(spec.eps)) throw ConfigError("eps must be finite and >= 0");
  if (!(spec.c > 0.0) || !std::isfinite(spec.c)) throw ConfigError("c must be finite and > 0");
}

struct LaplacianModel {
  LaplacianSpec laplacian;
};
struct AndersonModel {
  LaplacianSpec laplacian;
  PotentialSpec potential;
};
/// H_n = sum_{r=0}^n 2^{-(1+c) r / 2} Phi_{n,r}.
struct UltrametricModel {
  unsigned n = 0;
  double c = 0.0;
};
/// diag(V_1..V_N) + Phi(t), t = N^{-(1+c)}.
struct RosenzweigPorterModel {
  std::size_t size = 1;
  double c = 0.0;
  PotentialSpec potential;

  double time() const { return std::pow(static_cast<double>(size), -(1.0 + c)); }
};

using ModelSpec =
    std::variant<LaplacianModel, AndersonModel, UltrametricModel, RosenzweigPorterModel>;

struct BuildLimits {
  unsigned max_depth = 13;
};

inline std::size_t dimension(const ModelSpec& model) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, UltrametricModel>) return std::size_t{1} << m.n;
        else if constexpr (std::is_same_v<M, RosenzweigPorterModel>) return m.size;
        else return m.laplacian.hierarchy.volume();
      },
      model);
}

/// Block sizes of the partition levels the model's terms live on.
inline std::vector<std::size_t> term_block_sizes(const ModelSpec& model) {
  if (const auto* rp = std::get_if<RosenzweigPorterModel>(&model)) return {1, rp->size};
  std::vector<std::size_t> sizes;
  const std::size_t dim = dimension(model);
  for (std::size_t s = 1; s <= dim; s <<= 1) sizes.push_back(s);
  return sizes;
}

inline void validate(const ModelSpec& model, const BuildLimits& limits = {}) {
  std::visit(
      [&limits](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        auto check_depth = [&](unsigned n) {
          if (n > limits.max_depth)
            throw CapacityError("depth " + std::to_string(n) + " exceeds dense cap " +
                                std::to_string(limits.max_depth));
        };
        if constexpr (std::is_same_v<M, UltrametricModel>) {
          check_depth(m.n);
          if (std::isnan(m.c)) throw ConfigError("c must not be NaN");
        } else if constexpr (std::is_same_v<M, RosenzweigPorterModel>) {
          if (m.size < 1) throw ConfigError("Rosenzweig-Porter size must be >= 1");
          if (m.size > (std::size_t{1} << limits.max_depth))
            throw CapacityError("size " + std::to_string(m.size) + " exceeds dense cap");
          if (std::isnan(m.c)) throw ConfigError("c must not be NaN");
          validate(m.potential);
        } else {
          check_depth(m.laplacian.hierarchy.depth());
          validate(m.laplacian);
          if constexpr (std::is_same_v<M, AndersonModel>) validate(m.potential);
        }
      },
      model);
}

/// Calls visit(level, offset, block) for every nonzero block term H(B) of one
/// realization, in a fixed order: ascending level, ascending block. Random
/// draws are consumed from `rng` in that order.
template <class Visitor>
void for_each_term(const ModelSpec& model, Engine& rng, Visitor&& visit,
                   const BuildLimits& limits = {}) {
  validate(model, limits);
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LaplacianModel> || std::is_same_v<M, AndersonModel>) {
          const HierarchySpec& h = m.laplacian.hierarchy;
          if constexpr (std::is_same_v<M, AndersonModel>) {
            const auto v = sample_potential(m.potential, h.volume(), rng);
            Eigen::MatrixXd single(1, 1);
            for (std::size_t x = 0; x < v.size(); ++x) {
              single(0, 0) = v[x];
              visit(0u, x, single);
            }
          }
          for (unsigned r = 1; r <= h.depth(); ++r) {
            const auto s = static_cast<Eigen::Index>(std::size_t{1} << r);
            const Eigen::MatrixXd projector =
                Eigen::MatrixXd::Constant(s, s, m.laplacian.coupling(r) / static_cast<double>(s));
            for (std::size_t b = 0; b < h.block_count(r); ++b)
              visit(r, h.block_members(r, b).first, projector);
          }
        } else if constexpr (std::is_same_v<M, UltrametricModel>) {
          const HierarchySpec h(m.n);
          for (unsigned r = 0; r <= m.n; ++r) {
            const auto s = static_cast<Eigen::Index>(std::size_t{1} << r);
            const double coef = r == 0 ? 1.0 : std::exp2(-(1.0 + m.c) * 0.5 * r);
            const double off_sd = coef * std::sqrt(std::exp2(-static_cast<double>(r)));
            const double diag_sd = off_sd * std::numbers::sqrt2;
            Eigen::MatrixXd block(s, s);
            for (std::size_t b = 0; b < h.block_count(r); ++b) {
              for (Eigen::Index k = 0; k < s; ++k) {
                for (Eigen::Index j = 0; j < k; ++j) {
                  block(j, k) = block(k, j) = off_sd * standard_normal(rng);
                }
                block(k, k) = diag_sd * standard_normal(rng);
              }
              visit(r, h.block_members(r, b).first, block);
            }
          }
        } else {
          const auto n = static_cast<Eigen::Index>(m.size);
          const auto v = sample_potential(m.potential, m.size, rng);
          Eigen::MatrixXd single(1, 1);
          for (std::size_t x = 0; x < v.size(); ++x) {
            single(0, 0) = v[x];
            visit(0u, x, single);
          }
          const double t = m.time();
          const double off_sd = std::sqrt(t / static_cast<double>(m.size));
          const double diag_sd = off_sd * std::numbers::sqrt2;
          Eigen::MatrixXd phi(n, n);
          for (Eigen::Index k = 0; k < n; ++k) {
            for (Eigen::Index j = 0; j < k; ++j) {
              phi(j, k) = phi(k, j) = off_sd * standard_normal(rng);
            }
            phi(k, k) = diag_sd * standard_normal(rng);
          }
          visit(1u, std::size_t{0}, phi);
        }
      },
      model);
}

/// One realization of the model's Hamiltonian.
inline DenseSymmetricMatrix build(const ModelSpec& model, Engine& rng,
                                  const BuildLimits& limits = {}) {
  validate(model, limits);
  DenseSymmetricMatrix h(dimension(model));
  for_each_term(
      model, rng,
      [&h](unsigned, std::size_t offset, const Eigen::MatrixXd& block) { h.add_block(offset, block); },
      limits);
  return h;
}

/// <delta_j, Delta delta_k> = sum_{r = max(d(j,k), 1)}^n p_r 2^{-r}.
inline double laplacian_entry(const LaplacianSpec& spec, std::size_t j, std::size_t k) {
  const HierarchySpec& h = spec.hierarchy;
  const unsigned d = h.distance(j, k);
  double acc = 0.0;
  for (unsigned r = std::max(d, 1u); r <= h.depth(); ++r)
    acc += spec.coupling(r) / static_cast<double>(std::size_t{1} << r);
  return acc;
}

inline DenseSymmetricMatrix build_laplacian(const LaplacianSpec& spec,
                                            const BuildLimits& limits = {}) {
  Engine unused(0);
  return build(LaplacianModel{spec}, unused, limits);
}

inline DenseSymmetricMatrix build_anderson(const LaplacianSpec& spec, const PotentialSpec& pot,
                                           Engine& rng, const BuildLimits& limits = {}) {
  return build(AndersonModel{spec, pot}, rng, limits);
}

inline DenseSymmetricMatrix build_ultrametric(unsigned n, double c, Engine& rng,
                                              const BuildLimits& limits = {}) {
  return build(UltrametricModel{n, c}, rng, limits);
}

inline DenseSymmetricMatrix build_rosenzweig_porter(std::size_t size, double c,
                                                    const PotentialSpec& pot, Engine& rng,
                                                    const BuildLimits& limits = {}) {
  return build(RosenzweigPorterModel{size, c, pot}, rng, limits);
}

/// Exact closed-form spectrum of the finite-volume Laplacian: level r carries
/// E_r = sum_{s<=r} p_s with multiplicity 2^{n-r-1} (r < n) and 1 (r = n).
struct LaplacianLevel {
  unsigned level = 0;
  double energy = 0.0;
  std::size_t multiplicity = 0;
};

inline std::vector<LaplacianLevel> laplacian_spectrum(const LaplacianSpec& spec) {
  const unsigned n = spec.hierarchy.depth();
  std::vector<LaplacianLevel> out;
  double energy = 0.0;
  for (unsigned r = 0; r <= n; ++r) {
    energy += spec.coupling(r);
    const std::size_t mult = r < n ? (std::size_t{1} << (n - r - 1)) : 1;
    out.push_back({r, energy, mult});
  }
  return out;
}

/// Variance of <delta_l, H_n delta_k> for sites at hierarchical distance `dist`.
inline double ultrametric_entry_variance(unsigned n, double c, unsigned dist) {
  if (dist > n) throw ArgumentError("distance exceeds depth");
  double acc = 0.0;
  for (unsigned r = dist; r <= n; ++r) acc += r == 0 ? 1.0 : std::exp2(-(2.0 + c) * r);
  return dist == 0 ? 2.0 * acc : acc;
}

struct ScaleDiagnostics {
  /// l2 norm scale of H_n delta_0: sqrt(sum_l Var <delta_l, H_n delta_0>).
  double z = 0.0;
  /// 1 / max entry variance.
  double m = 0.0;
};

inline ScaleDiagnostics scale_diagnostics(unsigned n, double c) {
  double z2 = ultrametric_entry_variance(n, c, 0);
  double max_var = z2;
  for (unsigned d = 1; d <= n; ++d) {
    const double v = ultrametric_entry_variance(n, c, d);
    z2 += static_cast<double>(std::size_t{1} << (d - 1)) * v;
    max_var = std::max(max_var, v);
  }
  return {std::sqrt(z2), 1.0 / max_var};
}

struct BlockTerm {
  unsigned level = 0;
  std::size_t offset = 0;
  Eigen::MatrixXd block;
};

/// H split around a center x: S collects every term H(B) with x in B (the
/// level-0 term included), F collects the rest. Cross-spine entries of F are
/// never written.
struct SpineSplit {
  std::size_t center = 0;
  DenseSymmetricMatrix h;
  DenseSymmetricMatrix s;
  DenseSymmetricMatrix f;
  /// spine_label[y] = smallest level r with y in B_r(x); the spine set X_r is
  /// { y : spine_label[y] = r }.
  std::vector<unsigned> spine_label;
  std::vector<BlockTerm> center_terms;
};

inline std::vector<unsigned> spine_labels(const ModelSpec& model, std::size_t x) {
  const std::size_t dim = dimension(model);
  if (x >= dim) throw ArgumentError("center outside volume");
  const auto sizes = term_block_sizes(model);
  std::vector<unsigned> label(dim, 0);
  for (std::size_t y = 0; y < dim; ++y) {
    unsigned r = 0;
    while (y / sizes[r] != x / sizes[r]) ++r;
    label[y] = r;
  }
  return label;
}

inline SpineSplit spine_operator(const ModelSpec& model, std::size_t x, Engine& rng,
                                 const BuildLimits& limits = {}) {
  validate(model, limits);
  const std::size_t dim = dimension(model);
  if (x >= dim) throw ArgumentError("center outside volume");
  SpineSplit out{x, DenseSymmetricMatrix(dim), DenseSymmetricMatrix(dim),
                 DenseSymmetricMatrix(dim), spine_labels(model, x), {}};
  for_each_term(
      model, rng,
      [&](unsigned level, std::size_t offset, const Eigen::MatrixXd& block) {
        out.h.add_block(offset, block);
        const auto size = static_cast<std::size_t>(block.rows());
        if (x >= offset && x < offset + size) {
          out.s.add_block(offset, block);
          out.center_terms.push_back({level, offset, block});
        } else {
          out.f.add_block(offset, block);
        }
      },
      limits);
  return out;
}

/// max |F(j,k)| over pairs lying in different spine sets.
inline double max_cross_spine_entry(const DenseSymmetricMatrix& f,
                                    const std::vector<unsigned>& labels) {
  double worst = 0.0;
  for (std::size_t k = 0; k < f.dimension(); ++k)
    for (std::size_t j = 0; j < f.dimension(); ++j)
      if (labels[j] != labels[k]) worst = std::max(worst, std::abs(f(j, k)));
  return worst;
}

}  // namespace hierops
