#pragma once

// Sparse symmetric positive-definite linear algebra backed by CHOLMOD's
// supernodal Cholesky. Matrices store their lower triangle only.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace sttrend {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

/// Symmetric matrix held as a compressed, sorted lower triangle.
///
/// Explicit zeros are kept: two matrices built from the same triplet
/// pattern share a sparsity pattern even when some values vanish, which is
/// what lets a single symbolic analysis serve a whole hyperparameter sweep.
class SparseSymmetric {
 public:
  SparseSymmetric() = default;

  /// Coalesces duplicates by summation. Entries above the diagonal are
  /// mirrored into the lower triangle.
  static SparseSymmetric from_triplets(int dim, std::span<const Triplet> entries);
  /// Takes the lower triangle of `m` (which must be square).
  static SparseSymmetric from_matrix(const SparseMatrix& m);
  static SparseSymmetric identity(int dim);
  static SparseSymmetric diagonal(const Eigen::VectorXd& d);

  int dim() const noexcept { return static_cast<int>(lower_.rows()); }
  std::int64_t nonzeros() const noexcept { return lower_.nonZeros(); }
  const SparseMatrix& lower() const noexcept { return lower_; }

  SparseMatrix full() const;
  Eigen::MatrixXd dense() const;
  std::vector<Triplet> entries() const;

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  SparseSymmetric scaled(double factor) const;
  double coeff(int row, int col) const;

  bool same_pattern(const SparseSymmetric& other) const;

 private:
  friend class SparseCombination;
  explicit SparseSymmetric(SparseMatrix lower) : lower_(std::move(lower)) {}
  SparseMatrix lower_;
};

namespace detail {
struct FactorStorage;
struct AnalysisStorage;
}  // namespace detail

/// Cholesky factorization P Q Pᵀ = L Lᵀ. Immutable and cheap to copy;
/// concurrent reads (solves, sampling) are safe.
class CholeskyFactor {
 public:
  int dim() const noexcept;
  double log_det() const noexcept { return log_det_; }

  /// Fill-reducing ordering: row i of P Q Pᵀ is row permutation()[i] of Q.
  std::vector<int> permutation() const;
  /// The lower factor L in permuted ordering, converted to a simplicial
  /// sparse matrix. Intended for inspection and tests; it copies the factor.
  SparseMatrix lower_factor() const;

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;

  /// One draw from N(0, Q⁻¹).
  Eigen::VectorXd sample(std::uint64_t seed) const;
  /// `count` draws as columns of a dim × count matrix.
  Eigen::MatrixXd sample(int count, std::uint64_t seed) const;
  /// x = Pᵀ L⁻ᵀ z for caller-supplied standard-normal columns z.
  Eigen::MatrixXd transform_standard_normal(const Eigen::MatrixXd& z) const;

  /// diag(Q⁻¹) at the requested indices.
  Eigen::VectorXd marginal_variances(std::span<const int> indices) const;
  /// Dense block of Q⁻¹ restricted to rows and columns `indices`.
  Eigen::MatrixXd covariance_block(std::span<const int> indices) const;

 private:
  friend class SymbolicCholesky;
  CholeskyFactor(std::shared_ptr<const detail::FactorStorage> storage, double log_det)
      : storage_(std::move(storage)), log_det_(log_det) {}

  std::shared_ptr<const detail::FactorStorage> storage_;
  double log_det_ = 0.0;
};

/// Symbolic analysis (ordering + supernodal structure) for one sparsity
/// pattern. Numeric factorizations of any matrix with that same pattern reuse
/// it. Not safe for concurrent factorize() calls on one instance.
class SymbolicCholesky {
 public:
  explicit SymbolicCholesky(const SparseSymmetric& pattern);
  ~SymbolicCholesky();
  SymbolicCholesky(SymbolicCholesky&&) noexcept;
  SymbolicCholesky& operator=(SymbolicCholesky&&) noexcept;
  SymbolicCholesky(const SymbolicCholesky&) = delete;
  SymbolicCholesky& operator=(const SymbolicCholesky&) = delete;

  int dim() const noexcept;
  /// Throws Error(NotPositiveDefinite) on a non-positive pivot and
  /// Error(DimensionMismatch) if `q` does not have the analysed pattern.
  CholeskyFactor factorize(const SparseSymmetric& q);
  /// Predicted nonzeros of L under the chosen ordering.
  double factor_nonzeros() const noexcept;

 private:
  std::unique_ptr<detail::AnalysisStorage> storage_;
};

CholeskyFactor factorize(const SparseSymmetric& q);
Eigen::VectorXd solve(const CholeskyFactor& factor, const Eigen::VectorXd& b);
Eigen::VectorXd sample(const CholeskyFactor& factor, std::uint64_t seed);
Eigen::VectorXd marginal_variances(const CholeskyFactor& factor, std::span<const int> indices);

/// A family of symmetric matrices Σ_k c_k M_k over a fixed union pattern.
/// Terms are registered once; evaluate() scatters the weighted values
/// without rebuilding the pattern.
class SparseCombination {
 public:
  explicit SparseCombination(int dim) : dim_(dim) {}

  /// Registers a term. Returns its index for the coefficient vector.
  int add_term(const SparseSymmetric& term);
  /// Builds the union pattern. Must be called before evaluate().
  void finalize();

  int dim() const noexcept { return dim_; }
  int term_count() const noexcept { return static_cast<int>(terms_.size()); }
  SparseSymmetric evaluate(std::span<const double> coefficients) const;

 private:
  struct Term {
    std::vector<int> slots;
    std::vector<double> values;
  };
  int dim_;
  std::vector<SparseSymmetric> pending_;
  std::vector<Term> terms_;
  SparseMatrix pattern_;
  bool finalized_ = false;
};

/// Version of the sparse Cholesky backend, "major.minor.patch".
std::string cholesky_backend_version();

}  // namespace sttrend
