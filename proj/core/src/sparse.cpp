#include "sttrend/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <cholmod.h>

#include "sttrend/error.hpp"

namespace sttrend {

// ---------------------------------------------------------------------------
// SparseSymmetric

SparseSymmetric SparseSymmetric::from_triplets(int dim, std::span<const Triplet> entries) {
  if (dim < 1) throw Error(ErrorCode::DimensionMismatch, "sparse matrix dimension must be >= 1");
  std::vector<Triplet> lower;
  lower.reserve(entries.size());
  for (const auto& t : entries) {
    if (t.row() < 0 || t.col() < 0 || t.row() >= dim || t.col() >= dim)
      throw Error(ErrorCode::IndexOutOfRange, "triplet (" + std::to_string(t.row()) + ", " +
                                                  std::to_string(t.col()) + ") outside dim " +
                                                  std::to_string(dim));
    if (t.row() >= t.col())
      lower.push_back(t);
    else
      lower.emplace_back(t.col(), t.row(), t.value());
  }
  SparseMatrix m(dim, dim);
  m.setFromTriplets(lower.begin(), lower.end());
  m.makeCompressed();
  return SparseSymmetric(std::move(m));
}

SparseSymmetric SparseSymmetric::from_matrix(const SparseMatrix& m) {
  if (m.rows() != m.cols())
    throw Error(ErrorCode::DimensionMismatch, "symmetric matrix must be square");
  std::vector<Triplet> lower;
  lower.reserve(static_cast<std::size_t>(m.nonZeros()));
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      if (it.row() >= it.col()) lower.emplace_back(it.row(), it.col(), it.value());
  SparseMatrix out(m.rows(), m.cols());
  out.setFromTriplets(lower.begin(), lower.end());
  out.makeCompressed();
  return SparseSymmetric(std::move(out));
}

SparseSymmetric SparseSymmetric::identity(int dim) {
  return diagonal(Eigen::VectorXd::Ones(dim));
}

SparseSymmetric SparseSymmetric::diagonal(const Eigen::VectorXd& d) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(d.size()));
  for (int i = 0; i < d.size(); ++i) t.emplace_back(i, i, d[i]);
  return from_triplets(static_cast<int>(d.size()), t);
}

SparseMatrix SparseSymmetric::full() const {
  SparseMatrix upper = lower_.transpose();
  SparseMatrix out = lower_ + upper;
  // The diagonal was counted twice.
  for (int k = 0; k < out.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(out, k); it; ++it)
      if (it.row() == it.col()) it.valueRef() *= 0.5;
  return out;
}

Eigen::MatrixXd SparseSymmetric::dense() const { return Eigen::MatrixXd(full()); }

std::vector<Triplet> SparseSymmetric::entries() const {
  std::vector<Triplet> out;
  out.reserve(static_cast<std::size_t>(lower_.nonZeros()));
  for (int k = 0; k < lower_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(lower_, k); it; ++it)
      out.emplace_back(it.row(), it.col(), it.value());
  return out;
}

Eigen::VectorXd SparseSymmetric::multiply(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw Error(ErrorCode::DimensionMismatch, "multiply: length mismatch");
  return lower_.selfadjointView<Eigen::Lower>() * x;
}

SparseSymmetric SparseSymmetric::scaled(double factor) const {
  SparseMatrix m = lower_;
  for (int i = 0; i < m.nonZeros(); ++i) m.valuePtr()[i] *= factor;
  return SparseSymmetric(std::move(m));
}

double SparseSymmetric::coeff(int row, int col) const {
  if (row < col) std::swap(row, col);
  return lower_.coeff(row, col);
}

bool SparseSymmetric::same_pattern(const SparseSymmetric& other) const {
  if (dim() != other.dim() || nonzeros() != other.nonzeros()) return false;
  const int n = dim();
  return std::equal(lower_.outerIndexPtr(), lower_.outerIndexPtr() + n + 1,
                    other.lower_.outerIndexPtr()) &&
         std::equal(lower_.innerIndexPtr(), lower_.innerIndexPtr() + nonzeros(),
                    other.lower_.innerIndexPtr());
}

// ---------------------------------------------------------------------------
// CHOLMOD plumbing

namespace {

struct Common {
  cholmod_common c;
  Common() {
    cholmod_start(&c);
    c.print = 0;
    c.supernodal = CHOLMOD_SUPERNODAL;
    c.final_ll = 1;
  }
  ~Common() { cholmod_finish(&c); }
  Common(const Common&) = delete;
  Common& operator=(const Common&) = delete;
};

// Non-owning CHOLMOD view of a compressed lower-triangular Eigen matrix.
cholmod_sparse view_lower(const SparseMatrix& m) {
  cholmod_sparse a{};
  a.nrow = static_cast<std::size_t>(m.rows());
  a.ncol = static_cast<std::size_t>(m.cols());
  a.nzmax = static_cast<std::size_t>(m.nonZeros());
  a.p = const_cast<int*>(m.outerIndexPtr());
  a.i = const_cast<int*>(m.innerIndexPtr());
  a.x = const_cast<double*>(m.valuePtr());
  a.stype = -1;
  a.itype = CHOLMOD_INT;
  a.xtype = CHOLMOD_REAL;
  a.dtype = CHOLMOD_DOUBLE;
  a.sorted = 1;
  a.packed = 1;
  return a;
}

cholmod_dense view_dense(const Eigen::MatrixXd& m) {
  cholmod_dense d{};
  d.nrow = static_cast<std::size_t>(m.rows());
  d.ncol = static_cast<std::size_t>(m.cols());
  d.nzmax = d.nrow * d.ncol;
  d.d = d.nrow;
  d.x = const_cast<double*>(m.data());
  d.xtype = CHOLMOD_REAL;
  d.dtype = CHOLMOD_DOUBLE;
  return d;
}

double factor_log_det(const cholmod_factor* f) {
  double sum = 0.0;
  const auto* x = static_cast<const double*>(f->x);
  if (f->is_super) {
    const auto* super = static_cast<const int*>(f->super);
    const auto* pi = static_cast<const int*>(f->pi);
    const auto* px = static_cast<const int*>(f->px);
    for (std::size_t s = 0; s < f->nsuper; ++s) {
      const int ncols = super[s + 1] - super[s];
      const int nrows = pi[s + 1] - pi[s];
      for (int j = 0; j < ncols; ++j) sum += std::log(x[px[s] + j + j * nrows]);
    }
  } else {
    const auto* p = static_cast<const int*>(f->p);
    for (std::size_t j = 0; j < f->n; ++j) sum += std::log(x[p[j]]);
  }
  return 2.0 * sum;
}

}  // namespace

namespace detail {

struct FactorStorage {
  mutable Common common;
  cholmod_factor* factor = nullptr;
  ~FactorStorage() {
    if (factor) cholmod_free_factor(&factor, &common.c);
  }
};

struct AnalysisStorage {
  Common common;
  cholmod_factor* symbolic = nullptr;
  SparseSymmetric pattern;
  ~AnalysisStorage() {
    if (symbolic) cholmod_free_factor(&symbolic, &common.c);
  }
};

}  // namespace detail

namespace {

Eigen::MatrixXd run_solve(int system, const cholmod_factor* factor, const Eigen::MatrixXd& b) {
  Common local;
  cholmod_dense rhs = view_dense(b);
  cholmod_dense* x =
      cholmod_solve(system, const_cast<cholmod_factor*>(factor), &rhs, &local.c);
  if (!x) throw Error(ErrorCode::NoConvergence, "CHOLMOD solve failed");
  Eigen::MatrixXd out = Eigen::Map<Eigen::MatrixXd>(static_cast<double*>(x->x), b.rows(), b.cols());
  cholmod_free_dense(&x, &local.c);
  return out;
}

constexpr int kSolveBlock = 256;

}  // namespace

// ---------------------------------------------------------------------------
// CholeskyFactor

int CholeskyFactor::dim() const noexcept { return static_cast<int>(storage_->factor->n); }

std::vector<int> CholeskyFactor::permutation() const {
  const auto* perm = static_cast<const int*>(storage_->factor->Perm);
  return std::vector<int>(perm, perm + dim());
}

SparseMatrix CholeskyFactor::lower_factor() const {
  Common local;
  cholmod_factor* copy = cholmod_copy_factor(storage_->factor, &local.c);
  cholmod_change_factor(CHOLMOD_REAL, 1, 0, 1, 1, copy, &local.c);
  cholmod_sparse* s = cholmod_factor_to_sparse(copy, &local.c);
  const int n = dim();
  const auto* p = static_cast<const int*>(s->p);
  const auto* i = static_cast<const int*>(s->i);
  const auto* x = static_cast<const double*>(s->x);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(p[n]));
  for (int j = 0; j < n; ++j)
    for (int k = p[j]; k < p[j + 1]; ++k) t.emplace_back(i[k], j, x[k]);
  cholmod_free_sparse(&s, &local.c);
  cholmod_free_factor(&copy, &local.c);
  SparseMatrix out(n, n);
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

Eigen::VectorXd CholeskyFactor::solve(const Eigen::VectorXd& b) const {
  if (b.size() != dim())
    throw Error(ErrorCode::DimensionMismatch, "solve: rhs length " + std::to_string(b.size()) +
                                                  " != dim " + std::to_string(dim()));
  return run_solve(CHOLMOD_A, storage_->factor, b);
}

Eigen::MatrixXd CholeskyFactor::solve(const Eigen::MatrixXd& b) const {
  if (b.rows() != dim()) throw Error(ErrorCode::DimensionMismatch, "solve: rhs rows != dim");
  if (b.cols() == 0) return b;
  return run_solve(CHOLMOD_A, storage_->factor, b);
}

Eigen::MatrixXd CholeskyFactor::transform_standard_normal(const Eigen::MatrixXd& z) const {
  if (z.rows() != dim()) throw Error(ErrorCode::DimensionMismatch, "sample: rows != dim");
  Eigen::MatrixXd y = run_solve(CHOLMOD_Lt, storage_->factor, z);
  return run_solve(CHOLMOD_Pt, storage_->factor, y);
}

Eigen::VectorXd CholeskyFactor::sample(std::uint64_t seed) const {
  return sample(1, seed).col(0);
}

Eigen::MatrixXd CholeskyFactor::sample(int count, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd z(dim(), count);
  for (int c = 0; c < count; ++c)
    for (int r = 0; r < dim(); ++r) z(r, c) = normal(rng);
  return transform_standard_normal(z);
}

Eigen::VectorXd CholeskyFactor::marginal_variances(std::span<const int> indices) const {
  const int n = dim();
  for (int idx : indices)
    if (idx < 0 || idx >= n)
      throw Error(ErrorCode::IndexOutOfRange, "marginal_variances: index " + std::to_string(idx));
  Eigen::VectorXd out(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t start = 0; start < indices.size(); start += kSolveBlock) {
    const std::size_t count = std::min<std::size_t>(kSolveBlock, indices.size() - start);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(count));
    for (std::size_t k = 0; k < count; ++k) rhs(indices[start + k], static_cast<Eigen::Index>(k)) = 1.0;
    Eigen::MatrixXd x = run_solve(CHOLMOD_A, storage_->factor, rhs);
    for (std::size_t k = 0; k < count; ++k)
      out[static_cast<Eigen::Index>(start + k)] = x(indices[start + k], static_cast<Eigen::Index>(k));
  }
  return out;
}

Eigen::MatrixXd CholeskyFactor::covariance_block(std::span<const int> indices) const {
  const int n = dim();
  for (int idx : indices)
    if (idx < 0 || idx >= n)
      throw Error(ErrorCode::IndexOutOfRange, "covariance_block: index " + std::to_string(idx));
  const auto k = static_cast<Eigen::Index>(indices.size());
  Eigen::MatrixXd out(k, k);
  for (Eigen::Index start = 0; start < k; start += kSolveBlock) {
    const Eigen::Index count = std::min<Eigen::Index>(kSolveBlock, k - start);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, count);
    for (Eigen::Index c = 0; c < count; ++c) rhs(indices[start + c], c) = 1.0;
    Eigen::MatrixXd x = run_solve(CHOLMOD_A, storage_->factor, rhs);
    for (Eigen::Index c = 0; c < count; ++c)
      for (Eigen::Index r = 0; r < k; ++r) out(r, start + c) = x(indices[r], c);
  }
  return 0.5 * (out + out.transpose());
}

// ---------------------------------------------------------------------------
// SymbolicCholesky

SymbolicCholesky::SymbolicCholesky(const SparseSymmetric& pattern)
    : storage_(std::make_unique<detail::AnalysisStorage>()) {
  storage_->pattern = pattern;
  cholmod_sparse a = view_lower(storage_->pattern.lower());
  storage_->symbolic = cholmod_analyze(&a, &storage_->common.c);
  if (!storage_->symbolic)
    throw Error(ErrorCode::InvalidInput, "CHOLMOD symbolic analysis failed");
}

SymbolicCholesky::~SymbolicCholesky() = default;
SymbolicCholesky::SymbolicCholesky(SymbolicCholesky&&) noexcept = default;
SymbolicCholesky& SymbolicCholesky::operator=(SymbolicCholesky&&) noexcept = default;

int SymbolicCholesky::dim() const noexcept { return storage_->pattern.dim(); }

double SymbolicCholesky::factor_nonzeros() const noexcept { return storage_->common.c.lnz; }

CholeskyFactor SymbolicCholesky::factorize(const SparseSymmetric& q) {
  if (!q.same_pattern(storage_->pattern))
    throw Error(ErrorCode::DimensionMismatch, "factorize: matrix pattern differs from analysis");
  auto out = std::make_shared<detail::FactorStorage>();
  out->factor = cholmod_copy_factor(storage_->symbolic, &out->common.c);
  cholmod_sparse a = view_lower(q.lower());
  cholmod_factorize(&a, out->factor, &out->common.c);
  if (out->common.c.status == CHOLMOD_NOT_POSDEF ||
      out->factor->minor < out->factor->n)
    throw Error(ErrorCode::NotPositiveDefinite,
                "non-positive pivot at column " + std::to_string(out->factor->minor));
  if (out->common.c.status != CHOLMOD_OK)
    throw Error(ErrorCode::NotPositiveDefinite,
                "CHOLMOD status " + std::to_string(out->common.c.status));
  const double ld = factor_log_det(out->factor);
  if (!std::isfinite(ld)) throw Error(ErrorCode::NotPositiveDefinite, "non-finite log-determinant");
  return CholeskyFactor(std::move(out), ld);
}

CholeskyFactor factorize(const SparseSymmetric& q) { return SymbolicCholesky(q).factorize(q); }

Eigen::VectorXd solve(const CholeskyFactor& factor, const Eigen::VectorXd& b) {
  return factor.solve(b);
}

Eigen::VectorXd sample(const CholeskyFactor& factor, std::uint64_t seed) {
  return factor.sample(seed);
}

Eigen::VectorXd marginal_variances(const CholeskyFactor& factor, std::span<const int> indices) {
  return factor.marginal_variances(indices);
}

// ---------------------------------------------------------------------------
// SparseCombination

int SparseCombination::add_term(const SparseSymmetric& term) {
  if (finalized_) throw Error(ErrorCode::InvalidInput, "SparseCombination already finalized");
  if (term.dim() != dim_) throw Error(ErrorCode::DimensionMismatch, "combination term dim");
  pending_.push_back(term);
  return static_cast<int>(pending_.size()) - 1;
}

void SparseCombination::finalize() {
  std::vector<Triplet> all;
  for (const auto& t : pending_)
    for (const auto& e : t.entries()) all.emplace_back(e.row(), e.col(), 0.0);
  pattern_ = SparseMatrix(dim_, dim_);
  pattern_.setFromTriplets(all.begin(), all.end());
  pattern_.makeCompressed();

  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  terms_.clear();
  for (const auto& t : pending_) {
    Term term;
    for (const auto& e : t.entries()) {
      const int* begin = inner + outer[e.col()];
      const int* end = inner + outer[e.col() + 1];
      const int* pos = std::lower_bound(begin, end, e.row());
      term.slots.push_back(static_cast<int>(pos - inner));
      term.values.push_back(e.value());
    }
    terms_.push_back(std::move(term));
  }
  pending_.clear();
  finalized_ = true;
}

SparseSymmetric SparseCombination::evaluate(std::span<const double> coefficients) const {
  if (!finalized_) throw Error(ErrorCode::InvalidInput, "SparseCombination not finalized");
  if (coefficients.size() != terms_.size())
    throw Error(ErrorCode::DimensionMismatch, "combination coefficient count");
  SparseMatrix m = pattern_;
  double* values = m.valuePtr();
  std::fill(values, values + m.nonZeros(), 0.0);
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const double c = coefficients[k];
    if (c == 0.0) continue;
    const auto& term = terms_[k];
    for (std::size_t j = 0; j < term.slots.size(); ++j) values[term.slots[j]] += c * term.values[j];
  }
  return SparseSymmetric(std::move(m));
}

std::string cholesky_backend_version() {
  return std::to_string(CHOLMOD_MAIN_VERSION) + "." + std::to_string(CHOLMOD_SUB_VERSION) + "." +
         std::to_string(CHOLMOD_SUBSUB_VERSION);
}

}  // namespace sttrend
