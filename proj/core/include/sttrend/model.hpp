#pragma once

// Latent Gaussian space-time trend model
//
//   y(s, t) = (β₀ + β(s)) t + τ(s, t) + ε(s, t),     ε ~ N(0, 1/prec)
//   τ(·, t) = φ τ(·, t−1) + ξ_t,                      ξ_t, β Matérn (SPDE)
//
// The latent vector is x = [β₀ | β̃ (G mesh weights) | τ̃ (G·m, time-major)].
// With a Gaussian likelihood the hyperparameter marginal is available in
// closed form from the prior and posterior precisions.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sttrend/mesh.hpp"
#include "sttrend/spde.hpp"
#include "sttrend/sparse.hpp"

namespace sttrend {

/// Hyperparameters on the unconstrained internal scale.
struct HyperParams {
  static constexpr int size = 6;

  double log_prec_eps = 0.0;   ///< log noise precision
  double phi_internal = 0.0;   ///< logit((φ + 1) / 2)
  double log_kappa_beta = 0.0;
  double log_tau_beta = 0.0;
  double log_kappa_xi = 0.0;
  double log_tau_xi = 0.0;

  double noise_precision() const;
  double phi() const;
  double kappa_beta() const;
  double tau_beta() const;
  double kappa_xi() const;
  double tau_xi() const;

  Eigen::VectorXd to_vector() const;
  static HyperParams from_vector(const Eigen::VectorXd& v);
  bool finite() const;

  static const std::array<std::string, size>& names();
};

/// The same parameters on the scale they are usually reported on.
struct NaturalParams {
  double noise_variance = 1.0;
  double phi = 0.0;
  double sigma2_beta = 1.0;
  double range_beta = 1.0;
  double sigma2_xi = 1.0;
  double range_xi = 1.0;
};

HyperParams to_internal(const NaturalParams& p);
NaturalParams to_natural(const HyperParams& h);

double phi_to_internal(double phi);
double phi_from_internal(double internal);

/// Index map of the latent vector.
struct LatentLayout {
  int vertices = 0;  ///< G
  int times = 0;     ///< m

  int beta0() const noexcept { return 0; }
  int beta(int g) const noexcept { return 1 + g; }
  int tau(int t, int g) const noexcept { return 1 + vertices + t * vertices + g; }
  int dim() const noexcept { return 1 + vertices + vertices * times; }
};

/// Panel of observations y(s_i, t_j) with a mask of observed entries.
struct ObservationPanel {
  std::vector<Point> locations;
  std::vector<double> times;               ///< covariate values, equally spaced
  Eigen::MatrixXd values;                  ///< n × m
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> observed;  ///< n × m

  int location_count() const noexcept { return static_cast<int>(locations.size()); }
  int time_count() const noexcept { return static_cast<int>(times.size()); }
  int observation_count() const;
  /// Throws InvalidInput if shapes disagree, times are not strictly
  /// increasing and equally spaced, or an observed value is not finite.
  void validate() const;

  /// Panel with every entry observed.
  static ObservationPanel complete(std::vector<Point> locations, std::vector<double> times,
                                   Eigen::MatrixXd values);
};

/// Independent Gaussian priors on the internal scale.
struct Priors {
  std::array<double, HyperParams::size> mean{};
  std::array<double, HyperParams::size> sd{};
  /// Fixed vague precision for β₀.
  double beta0_precision = 1e-6;

  /// log_prec_eps ~ N(0, 2²); phi_internal ~ N(0, 1.5²); log κ ~ N(log(√8/ρ₀), 1);
  /// log τ centred so the implied marginal variance has prior median 1.
  static Priors weakly_informative(double range0);

  double log_density(const HyperParams& theta) const;
};

/// Finite-element matrices plus the projector from mesh vertices to the
/// observation locations.
struct SpatialDesign {
  FemMatrices fem;
  Projector projector;

  static SpatialDesign from_mesh(const Mesh& mesh, std::span<const Point> locations);
  int vertex_count() const noexcept { return fem.mass.dim(); }
};

/// Observation design of the model: A x reproduces the linear predictor.
struct DesignSystem {
  SparseMatrix matrix;                        ///< N_obs × dim
  Eigen::VectorXd y;                          ///< observed values in row order
  std::vector<std::pair<int, int>> entries;   ///< (location, time) per row
};

/// Row for (i, t): t at β₀, t·ψ(s_i) at β̃ and ψ(s_i) at τ̃_t. Masked entries
/// are dropped.
DesignSystem assemble_design(const ObservationPanel& panel, const Projector& projector,
                             const LatentLayout& layout);

/// Conditional posterior of the latent vector given y and θ.
struct GaussianPosterior {
  LatentLayout layout;
  Eigen::VectorXd mean;
  CholeskyFactor factor;  ///< of the posterior precision
};

/// Posterior mean and covariance of (β₀, β̃) with τ̃ integrated out.
struct TrendMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// How log_marginal_likelihood and trend_moments are computed.
///
/// Sparse factorizes the full posterior precision. Spectral needs a panel
/// without missing values: rotating time into the eigenbasis of the AR(1)
/// precision and space into the eigenbasis of Ψ Q_ξ⁻¹ Ψᵀ makes the residual
/// blocks diagonal, leaving only a dense (1 + G)-dimensional trend block.
/// Automatic picks Spectral when the panel is complete and not too wide.
enum class EvaluationPath { Automatic, Sparse, Spectral };

/// Evaluates the model for a fixed panel and spatial design. Sparsity patterns
/// and their symbolic analyses are built once and shared by every θ.
///
/// Instances are not safe for concurrent evaluation; give each thread its own.
class LatentModel {
 public:
  LatentModel(ObservationPanel panel, SpatialDesign design, Priors priors,
              EvaluationPath path = EvaluationPath::Automatic);

  const LatentLayout& layout() const noexcept { return layout_; }
  const ObservationPanel& panel() const noexcept { return panel_; }
  const SpatialDesign& design() const noexcept { return design_; }
  const Priors& priors() const noexcept { return priors_; }
  const DesignSystem& design_system() const noexcept { return system_; }
  int observation_count() const noexcept { return static_cast<int>(system_.y.size()); }

  /// Block-diagonal prior precision: β₀ | Q_β | Q_AR(φ) ⊗ Q_ξ.
  SparseSymmetric prior_precision(const HyperParams& theta) const;
  /// Q_prior + prec · AᵀA.
  SparseSymmetric posterior_precision(const HyperParams& theta) const;

  /// log π(θ | y) up to the evidence constant; −∞ if a precision matrix is
  /// not positive definite or θ is not finite.
  double log_posterior(const HyperParams& theta);
  /// The Gaussian log marginal likelihood log π(y | θ), with normalising
  /// constants included. −∞ on failure.
  double log_marginal_likelihood(const HyperParams& theta);
  /// Throws NotPositiveDefinite if a precision fails to factorize.
  GaussianPosterior posterior(const HyperParams& theta);
  /// Throws NotPositiveDefinite if a precision fails to factorize.
  TrendMoments trend_moments(const HyperParams& theta);

  bool spectral() const noexcept { return spectral_; }

  /// log det Q_prior(θ) computed block-wise.
  double prior_log_det(const HyperParams& theta);

 private:
  ObservationPanel panel_;
  SpatialDesign design_;
  Priors priors_;
  LatentLayout layout_;
  DesignSystem system_;
  SpdeBasis spde_;
  Eigen::VectorXd aty_;  ///< Aᵀ y
  double yty_ = 0.0;

  SparseCombination posterior_terms_;
  SparseCombination prior_terms_;
  std::optional<SymbolicCholesky> spatial_analysis_;
  std::optional<SymbolicCholesky> posterior_analysis_;

  bool spectral_ = false;
  Eigen::MatrixXd psi_;      ///< n × G projector, dense
  Eigen::MatrixXd values_;   ///< n × m observations
  Eigen::VectorXd times_;

  std::vector<double> coefficients(const HyperParams& theta, bool with_likelihood) const;
  double spectral_evaluate(const HyperParams& theta, TrendMoments* moments);
  double sparse_evaluate(const HyperParams& theta);
  CholeskyFactor factorize_posterior(const HyperParams& theta);
  void add_terms(SparseCombination& combo, bool with_likelihood) const;
};

/// Free-function forms of the model operations.
SparseSymmetric prior_precision(const HyperParams& theta, const SpatialDesign& design,
                                int times, double beta0_precision = 1e-6);
double log_posterior_theta(const HyperParams& theta, const ObservationPanel& panel,
                           const SpatialDesign& design, const Priors& priors);
GaussianPosterior posterior_latent(const HyperParams& theta, const ObservationPanel& panel,
                                   const SpatialDesign& design, const Priors& priors);

}  // namespace sttrend
