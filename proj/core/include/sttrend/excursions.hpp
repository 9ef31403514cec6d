#pragma once

// Pointwise, simultaneous and Bonferroni credible bands for a field with
// mixture marginals, and the avoidance sets of a level u.

#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sttrend/inference.hpp"

namespace sttrend {

enum class BandMethod { Pointwise, Simultaneous, Bonferroni };

std::string_view to_string(BandMethod m) noexcept;

struct BandResult {
  BandMethod method = BandMethod::Pointwise;
  double alpha = 0.05;
  /// Per-location tail level: bounds are the band_rho and 1 − band_rho quantiles.
  double band_rho = 0.025;
  double level = 0.0;  ///< u
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<bool> avoid;
  /// Simultaneous bands only: estimated joint coverage and its binomial se.
  double coverage = 0.0;
  double coverage_se = 0.0;

  int size() const noexcept { return static_cast<int>(lower.size()); }
};

/// Equi-tailed [q_{α/2}, q_{1−α/2}] at every location.
BandResult pointwise_band(const FieldMarginals& marginals, double alpha, double u = 0.0);

struct SimultaneousOptions {
  /// Required accuracy of the joint coverage.
  double tol = 0.002;
  int min_samples = 1000;
};

/// Chooses band_rho so that a fraction 1 − α of the joint samples (rows of
/// `samples`, one column per location) lies strictly inside the band at every
/// location. Throws InsufficientSamples or NoConvergence.
BandResult simultaneous_band(const Eigen::MatrixXd& samples, const FieldMarginals& marginals, double alpha,
                             double u = 0.0, const SimultaneousOptions& options = {});

/// Pointwise band at per-location level α / n_cells.
BandResult bonferroni_band(const FieldMarginals& marginals, double alpha, int n_cells, double u = 0.0);

/// Indices whose band excludes u.
std::vector<int> avoidance_set(const BandResult& band, double u);

/// Band at data cells: each cell takes the basis-weighted bounds of the
/// vertex band (projector columns index vertices, `vertex_index` maps a
/// vertex to its position in `band`).
BandResult project_band(const BandResult& band, const SparseMatrix& projector,
                        const std::vector<int>& vertex_index);

}  // namespace sttrend
