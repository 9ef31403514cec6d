#include "sttrend/timeseries.hpp"

#include <cmath>
#include <string>

#include "sttrend/error.hpp"

namespace sttrend {

namespace {

void require_phi(double phi) {
  if (!(std::abs(phi) < 1.0))
    throw Error(ErrorCode::PhiOutOfRange, "|phi| must be < 1, got " + std::to_string(phi));
}

}  // namespace

SparseSymmetric ar1_precision(const Ar1Params& p) {
  require_phi(p.phi);
  if (p.m < 1) throw Error(ErrorCode::InvalidParameters, "AR(1) length must be >= 1");
  const int m = p.m;
  if (m == 1) return SparseSymmetric::diagonal(Eigen::VectorXd::Constant(1, 1.0 - p.phi * p.phi));
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(2 * m));
  for (int i = 0; i < m; ++i) {
    const bool end = (i == 0 || i == m - 1);
    t.emplace_back(i, i, end ? 1.0 : 1.0 + p.phi * p.phi);
    if (i + 1 < m) t.emplace_back(i + 1, i, -p.phi);
  }
  return SparseSymmetric::from_triplets(m, t);
}

double ar1_log_det(double phi) {
  require_phi(phi);
  return std::log1p(-phi * phi);
}

SparseSymmetric kron_precision(const SparseSymmetric& q_time, const SparseSymmetric& q_space) {
  const int m = q_time.dim();
  const int g = q_space.dim();
  const auto time_entries = q_time.entries();
  const auto space_entries = q_space.entries();
  std::vector<Triplet> t;
  t.reserve(time_entries.size() * space_entries.size() * 2);
  for (const auto& te : time_entries) {
    const int bi = te.row() * g;
    const int bj = te.col() * g;
    for (const auto& se : space_entries) {
      const double v = te.value() * se.value();
      t.emplace_back(bi + se.row(), bj + se.col(), v);
      // Off-diagonal time blocks also need the mirrored spatial entry.
      if (te.row() != te.col() && se.row() != se.col())
        t.emplace_back(bi + se.col(), bj + se.row(), v);
    }
  }
  return SparseSymmetric::from_triplets(m * g, t);
}

}  // namespace sttrend
