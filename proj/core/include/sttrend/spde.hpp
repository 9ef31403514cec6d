#pragma once

// Matérn covariance for smoothness ν = 1 (α = 2, d = 2) and its SPDE/GMRF
// representation on a finite-element mesh.

#include "sttrend/sparse.hpp"

namespace sttrend {

/// Matérn parameters with α = 2 in two dimensions, hence ν = α − d/2 = 1.
struct MaternParams {
  double sigma2 = 1.0;
  double kappa = 1.0;
  static constexpr double nu = 1.0;
  static constexpr double alpha = 2.0;
  static constexpr int dimension = 2;
};

/// Covariance σ² (κd) K₁(κd) at Euclidean distance `dist`; σ² at dist = 0.
double matern_cov(double dist, const MaternParams& p);
/// matern_cov divided by σ².
double matern_corr(double dist, double kappa);

/// σ² = 1 / (4π κ² τ²).
double sigma2_from(double kappa, double tau);
/// Inverse of sigma2_from in τ.
double tau_from(double kappa, double sigma2);
/// Range √(8ν)/κ, the distance at which correlation drops to about 0.14.
double range_from(double kappa);
double kappa_from(double range_rho);

/// Finite-element precision of the α = 2 SPDE:
///   Q = τ² (κ⁴ C + 2κ² G + G C⁻¹ G)
/// with C the lumped (diagonal) mass matrix and G the stiffness matrix.
SparseSymmetric spde_precision(double kappa, double tau, const SparseSymmetric& mass,
                               const SparseSymmetric& stiffness);

/// The three κ-independent building blocks C, G, G C⁻¹ G, each expanded to
/// the union pattern so Q(κ, τ) is a weighted sum with a fixed pattern.
struct SpdeBasis {
  SparseSymmetric mass;
  SparseSymmetric stiffness;
  SparseSymmetric stiffness2;

  static SpdeBasis build(const SparseSymmetric& mass, const SparseSymmetric& stiffness);
  SparseSymmetric precision(double kappa, double tau) const;
};

}  // namespace sttrend
