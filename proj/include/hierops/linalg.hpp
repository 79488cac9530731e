#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>

#include "hierops/error.hpp"

namespace hierops {

/// Dense real symmetric matrix. Symmetry is exact: every writer updates
/// (j,k) and (k,j) together.
class DenseSymmetricMatrix {
 public:
  DenseSymmetricMatrix() = default;
  explicit DenseSymmetricMatrix(std::size_t dim)
      : a_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                 static_cast<Eigen::Index>(dim))) {}

  /// Adopts `m`; throws unless m is square and exactly symmetric.
  static DenseSymmetricMatrix from_matrix(Eigen::MatrixXd m) {
    if (m.rows() != m.cols()) throw ArgumentError("matrix is not square");
    for (Eigen::Index j = 0; j < m.rows(); ++j)
      for (Eigen::Index k = j + 1; k < m.cols(); ++k)
        if (m(j, k) != m(k, j)) throw ArgumentError("matrix is not exactly symmetric");
    DenseSymmetricMatrix out;
    out.a_ = std::move(m);
    return out;
  }

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(a_.rows()); }
  double operator()(std::size_t j, std::size_t k) const {
    return a_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
  }

  /// Adds symmetric `block` on the principal submatrix starting at `offset`.
  template <class Derived>
  void add_block(std::size_t offset, const Eigen::MatrixBase<Derived>& block) {
    const auto o = static_cast<Eigen::Index>(offset);
    a_.block(o, o, block.rows(), block.cols()) += block;
  }

  void add_diagonal(std::size_t j, double v) {
    const auto i = static_cast<Eigen::Index>(j);
    a_(i, i) += v;
  }

  const Eigen::MatrixXd& matrix() const noexcept { return a_; }

  DenseSymmetricMatrix operator-(const DenseSymmetricMatrix& other) const {
    DenseSymmetricMatrix out;
    out.a_ = a_ - other.a_;
    return out;
  }
  DenseSymmetricMatrix operator+(const DenseSymmetricMatrix& other) const {
    DenseSymmetricMatrix out;
    out.a_ = a_ + other.a_;
    return out;
  }
  bool operator==(const DenseSymmetricMatrix& other) const {
    return a_.rows() == other.a_.rows() &&
           std::memcmp(a_.data(), other.a_.data(),
                       sizeof(double) * static_cast<std::size_t>(a_.size())) == 0;
  }

 private:
  Eigen::MatrixXd a_;
};

/// FNV-1a hash of the raw entries, used to identify matrices in error reports.
inline std::uint64_t fingerprint(const Eigen::MatrixXd& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
  const std::size_t n = sizeof(double) * static_cast<std::size_t>(m.size());
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string fingerprint_hex(const Eigen::MatrixXd& m) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fingerprint(m)));
  return buf;
}

/// Eigen-decomposition of one realization: ascending eigenvalues and, when
/// requested, orthonormal eigenvectors stored as columns.
struct SpectralData {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  /// max_i ||H psi_i - lambda_i psi_i||_2; 0 when no vectors were computed.
  double residual_bound = 0.0;
  /// max |(Psi^T Psi - I)_{jk}|.
  double orthogonality_defect = 0.0;

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
  bool has_vectors() const noexcept { return eigenvectors.size() != 0; }
  auto vector(std::size_t i) const { return eigenvectors.col(static_cast<Eigen::Index>(i)); }
};

inline constexpr double kCertificateTolerance = 1e-8;

namespace detail {

/// Householder tridiagonalization + implicit symmetric QR (Eigen). With
/// `vectors` the eigenvectors overwrite `work` column by column.
inline Eigen::VectorXd run_symmetric_solver(Eigen::MatrixXd& work, bool vectors) {
  if (work.rows() == 0) return Eigen::VectorXd(0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      work, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverError("symmetric QR iteration did not converge");
  if (vectors) work = es.eigenvectors();
  return es.eigenvalues();
}

}  // namespace detail

/// Eigenvalues only, ascending.
inline Eigen::VectorXd eigvalsh(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd work = a;
  try {
    return detail::run_symmetric_solver(work, false);
  } catch (const SolverError& e) {
    throw SolverError(std::string(e.what()) + " on matrix " + fingerprint_hex(a));
  }
}

inline Eigen::VectorXd eigvalsh(const DenseSymmetricMatrix& a) { return eigvalsh(a.matrix()); }

/// Full decomposition with residual and orthogonality certificate; throws
/// SolverError if either exceeds 1e-8 max(1, ||H||).
inline SpectralData eigh(const DenseSymmetricMatrix& h, bool with_vectors = true) {
  SpectralData out;
  if (!with_vectors) {
    out.eigenvalues = eigvalsh(h);
    return out;
  }
  out.eigenvectors = h.matrix();
  try {
    out.eigenvalues = detail::run_symmetric_solver(out.eigenvectors, true);
  } catch (const SolverError& e) {
    throw SolverError(std::string(e.what()) + " on matrix " + fingerprint_hex(h.matrix()));
  }
  if (h.dimension() == 0) return out;

  const Eigen::MatrixXd residual =
      h.matrix() * out.eigenvectors - out.eigenvectors * out.eigenvalues.asDiagonal();
  out.residual_bound = residual.colwise().norm().maxCoeff();
  const Eigen::Index n = out.eigenvectors.cols();
  const Eigen::MatrixXd gram = out.eigenvectors.transpose() * out.eigenvectors;
  out.orthogonality_defect = (gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();

  const double scale = std::max(1.0, out.eigenvalues.cwiseAbs().maxCoeff());
  if (!(out.residual_bound <= kCertificateTolerance * scale) ||
      !(out.orthogonality_defect <= kCertificateTolerance)) {
    throw SolverError("eigen certificate failed (residual " + std::to_string(out.residual_bound) +
                      ", orthogonality " + std::to_string(out.orthogonality_defect) +
                      ") on matrix " + fingerprint_hex(h.matrix()));
  }
  return out;
}

/// Schatten-1 norm of a symmetric matrix.
inline double trace_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  return eigvalsh(a).cwiseAbs().sum();
}
inline double trace_norm(const DenseSymmetricMatrix& a) { return trace_norm(a.matrix()); }

/// Number of eigenvalues with |lambda| > rel_tol * max(1, max |lambda|).
inline std::size_t numerical_rank(const Eigen::MatrixXd& a, double rel_tol = 1e-10) {
  if (a.size() == 0) return 0;
  const Eigen::VectorXd w = eigvalsh(a).cwiseAbs();
  const double cut = rel_tol * std::max(1.0, w.maxCoeff());
  return static_cast<std::size_t>((w.array() > cut).count());
}

}  // namespace hierops
