#pragma once

#include "sttrend/sparse.hpp"

namespace sttrend {

struct Ar1Params {
  double phi = 0.0;
  int m = 1;
};

/// Precision of a stationary AR(1) series with unit innovation variance:
/// tridiagonal with diagonal (1, 1+φ², …, 1+φ², 1) and off-diagonal −φ.
/// For m = 1 this is [1 − φ²]. Throws PhiOutOfRange unless |φ| < 1.
SparseSymmetric ar1_precision(const Ar1Params& p);

/// log det of ar1_precision, which is log(1 − φ²) for every m.
double ar1_log_det(double phi);

/// Kronecker product Q_time ⊗ Q_space in time-major block layout: block
/// (i, j) equals Q_time[i, j] · Q_space.
SparseSymmetric kron_precision(const SparseSymmetric& q_time, const SparseSymmetric& q_space);

}  // namespace sttrend
