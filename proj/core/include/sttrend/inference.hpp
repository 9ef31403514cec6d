#pragma once

// Hyperparameter mode search, CCD-style θ exploration and the Gaussian
// mixture posterior of the trend field β₀ + β(s) at mesh vertices.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sttrend/model.hpp"

namespace sttrend {

/// Objective over the internal θ vector; larger is better.
using Objective = std::function<double(const Eigen::VectorXd&)>;

struct ModeOptions {
  /// Convergence threshold on the spread of simplex values (log-posterior units).
  double tol = 1e-4;
  /// Edge length of the starting simplex.
  double initial_step = 0.5;
  int max_evaluations = 3000;
  /// Coordinate polish after the simplex; smallest step tried.
  double polish_min_step = 1e-3;
};

struct OptimResult {
  Eigen::VectorXd x;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
};

/// Nelder–Mead followed by a compass search. Deterministic given x0.
OptimResult maximize(const Objective& f, const Eigen::VectorXd& x0, const ModeOptions& options = {});

struct ModeResult {
  HyperParams theta;
  double log_post = 0.0;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
};

ModeResult find_mode(LatentModel& model, const HyperParams& init, const ModeOptions& options = {});

/// Central finite-difference Hessian with a common step.
Eigen::MatrixXd finite_difference_hessian(const Objective& f, const Eigen::VectorXd& x, double step,
                                          double f_at_x);

struct GridOptions {
  /// Finite-difference step for the Hessian; 0 gives a single-point grid at the mode.
  double hessian_step = 0.05;
  /// Design radius in standardized units is radius_factor · √d.
  double radius_factor = 1.1;
  /// Points whose normalized weight falls below this are dropped.
  double prune = 1e-6;
};

struct ThetaGrid {
  std::vector<HyperParams> points;
  std::vector<double> log_posteriors;
  /// Normalized: log-sum-exp is 0.
  std::vector<double> log_weights;
  /// Log integration weight of the design point before multiplying by the posterior.
  std::vector<double> design_log_weights;
  int mode_index = 0;
  /// Negative Hessian at the mode (empty for single-point grids).
  Eigen::MatrixXd precision;

  int size() const noexcept { return static_cast<int>(points.size()); }
  std::vector<double> weights() const;
};

/// Central point, 2d axial points and 2d points on coordinate-pair diagonals,
/// laid out in the eigenbasis of the negative Hessian at `mode`.
ThetaGrid explore_grid(const Objective& f, const Eigen::VectorXd& mode, const GridOptions& options = {});
ThetaGrid explore_grid(LatentModel& model, const HyperParams& mode, const GridOptions& options = {});

/// Posterior of the trend field at a set of vertices for each grid point.
struct TrendComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  /// Empty unless requested.
  Eigen::MatrixXd covariance;
};

struct TrendPosterior {
  std::vector<int> vertices;
  std::vector<TrendComponent> components;
};

/// `vertices` empty means all mesh vertices. The joint covariance, needed for
/// sampling, costs one solve per vertex.
TrendPosterior trend_posterior(LatentModel& model, const ThetaGrid& grid,
                               std::span<const int> vertices = {}, bool with_covariance = true);

/// The mixture of Ψ T at the rows of `projector` (columns index mesh vertices,
/// each of which must be in `posterior.vertices`). The result's `vertices`
/// are the row indices. Components must carry the joint covariance.
TrendPosterior project_trend(const TrendPosterior& posterior, const SparseMatrix& projector);

/// Per-location Gaussian mixture marginals.
class FieldMarginals {
 public:
  FieldMarginals() = default;
  /// means and sds are K × n (components × locations).
  FieldMarginals(std::vector<double> weights, Eigen::MatrixXd means, Eigen::MatrixXd sds);
  static FieldMarginals from(const TrendPosterior& posterior);

  int size() const noexcept { return static_cast<int>(means_.cols()); }
  int components() const noexcept { return static_cast<int>(weights_.size()); }
  double mean(int i) const;
  double sd(int i) const;
  Eigen::VectorXd mean_vector() const;
  Eigen::VectorXd sd_vector() const;
  double cdf(int i, double x) const;
  /// Bisection on the mixture CDF over mean ± 10 sd.
  double quantile(int i, double p) const;

  /// Marginals at a subset of locations.
  FieldMarginals subset(std::span<const int> indices) const;

 private:
  std::vector<double> weights_;
  Eigen::MatrixXd means_;
  Eigen::MatrixXd sds_;
};

FieldMarginals field_marginals(LatentModel& model, const ThetaGrid& grid);

/// N × n matrix of joint draws: pick a component by weight, then a Gaussian
/// draw from it. Deterministic per seed.
Eigen::MatrixXd sample_beta(const TrendPosterior& posterior, int count, std::uint64_t seed);

/// Seed for batch `index` derived from `root` (splitmix64).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

struct HyperSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
};

/// Summaries of noise_variance, phi, sigma2_beta, range_beta, sigma2_xi and
/// range_xi. Mean and sd are grid-weighted on the natural scale; quantiles
/// come from a Gaussian on the log (logit for φ) scale with the weighted mean
/// and sd there.
std::vector<HyperSummary> hyper_posteriors(const ThetaGrid& grid);

}  // namespace sttrend
