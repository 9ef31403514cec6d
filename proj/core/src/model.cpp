#include "sttrend/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "sttrend/error.hpp"
#include "sttrend/timeseries.hpp"

namespace sttrend {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// log(1 − φ²) with φ = tanh(x/2), stable for large |x|.
double log_one_minus_phi2(double internal) {
  const double a = std::abs(internal);
  return std::log(4.0) - a - 2.0 * std::log1p(std::exp(-a));
}

double one_minus_phi2(double internal) { return std::exp(log_one_minus_phi2(internal)); }

double normal_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * kLog2Pi;
}

// Places `block` at diagonal offset `offset` in a dim × dim matrix.
SparseSymmetric embed(const SparseSymmetric& block, int offset, int dim) {
  std::vector<Triplet> t;
  for (const auto& e : block.entries()) t.emplace_back(e.row() + offset, e.col() + offset, e.value());
  return SparseSymmetric::from_triplets(dim, t);
}

// Time structure matrices of the AR(1) precision: end diagonal, interior
// diagonal and first off-diagonal, so Q_AR = E + (1+φ²) I − φ O.
struct TimeParts {
  SparseSymmetric ends, interior, off;
};

TimeParts time_parts(int m) {
  std::vector<Triplet> e, i, o;
  for (int t = 0; t < m; ++t) {
    if (t == 0 || t == m - 1)
      e.emplace_back(t, t, 1.0);
    else
      i.emplace_back(t, t, 1.0);
    if (t + 1 < m) o.emplace_back(t + 1, t, 1.0);
  }
  return {SparseSymmetric::from_triplets(m, e), SparseSymmetric::from_triplets(m, i),
          SparseSymmetric::from_triplets(m, o)};
}

}  // namespace

// ---------------------------------------------------------------------------
// HyperParams

double phi_from_internal(double internal) { return std::tanh(0.5 * internal); }

double phi_to_internal(double phi) {
  if (!(std::abs(phi) < 1.0))
    throw Error(ErrorCode::PhiOutOfRange, "|phi| must be < 1, got " + std::to_string(phi));
  return 2.0 * std::atanh(phi);
}

double HyperParams::noise_precision() const { return std::exp(log_prec_eps); }
double HyperParams::phi() const { return phi_from_internal(phi_internal); }
double HyperParams::kappa_beta() const { return std::exp(log_kappa_beta); }
double HyperParams::tau_beta() const { return std::exp(log_tau_beta); }
double HyperParams::kappa_xi() const { return std::exp(log_kappa_xi); }
double HyperParams::tau_xi() const { return std::exp(log_tau_xi); }

Eigen::VectorXd HyperParams::to_vector() const {
  Eigen::VectorXd v(size);
  v << log_prec_eps, phi_internal, log_kappa_beta, log_tau_beta, log_kappa_xi, log_tau_xi;
  return v;
}

HyperParams HyperParams::from_vector(const Eigen::VectorXd& v) {
  if (v.size() != size) throw Error(ErrorCode::DimensionMismatch, "hyperparameter vector length");
  return HyperParams{v[0], v[1], v[2], v[3], v[4], v[5]};
}

bool HyperParams::finite() const { return to_vector().allFinite(); }

const std::array<std::string, HyperParams::size>& HyperParams::names() {
  static const std::array<std::string, size> n{"log_prec_eps",   "phi_internal",
                                                "log_kappa_beta", "log_tau_beta",
                                                "log_kappa_xi",   "log_tau_xi"};
  return n;
}

HyperParams to_internal(const NaturalParams& p) {
  if (!(p.noise_variance > 0.0))
    throw Error(ErrorCode::NonPositiveParameter, "noise variance must be positive");
  const double kb = kappa_from(p.range_beta);
  const double kx = kappa_from(p.range_xi);
  return HyperParams{-std::log(p.noise_variance),       phi_to_internal(p.phi),
                     std::log(kb),                       std::log(tau_from(kb, p.sigma2_beta)),
                     std::log(kx),                       std::log(tau_from(kx, p.sigma2_xi))};
}

NaturalParams to_natural(const HyperParams& h) {
  return NaturalParams{1.0 / h.noise_precision(),
                       h.phi(),
                       sigma2_from(h.kappa_beta(), h.tau_beta()),
                       range_from(h.kappa_beta()),
                       sigma2_from(h.kappa_xi(), h.tau_xi()),
                       range_from(h.kappa_xi())};
}

// ---------------------------------------------------------------------------
// ObservationPanel

int ObservationPanel::observation_count() const {
  return static_cast<int>(observed.count());
}

void ObservationPanel::validate() const {
  const int n = location_count();
  const int m = time_count();
  if (n < 1 || m < 1) throw Error(ErrorCode::InvalidInput, "observation panel is empty");
  if (values.rows() != n || values.cols() != m)
    throw Error(ErrorCode::InvalidInput, "panel values must be locations x times");
  if (observed.rows() != n || observed.cols() != m)
    throw Error(ErrorCode::InvalidInput, "panel mask must be locations x times");
  if (m >= 2) {
    const double step = times[1] - times[0];
    if (!(step > 0.0)) throw Error(ErrorCode::InvalidInput, "times must be strictly increasing");
    for (int t = 1; t < m; ++t) {
      const double d = times[t] - times[t - 1];
      if (!(d > 0.0) || std::abs(d - step) > 1e-9 * std::max(1.0, std::abs(step)))
        throw Error(ErrorCode::InvalidInput, "times must be equally spaced");
    }
  }
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < m; ++t)
      if (observed(i, t) && !std::isfinite(values(i, t)))
        throw Error(ErrorCode::InvalidInput, "non-finite observed value at location " +
                                                 std::to_string(i) + ", time " + std::to_string(t));
}

ObservationPanel ObservationPanel::complete(std::vector<Point> locations, std::vector<double> times,
                                            Eigen::MatrixXd values) {
  ObservationPanel p;
  p.locations = std::move(locations);
  p.times = std::move(times);
  p.values = std::move(values);
  p.observed.setConstant(p.values.rows(), p.values.cols(), true);
  return p;
}

// ---------------------------------------------------------------------------
// Priors

Priors Priors::weakly_informative(double range0) {
  if (!(range0 > 0.0)) throw Error(ErrorCode::NonPositiveParameter, "prior range must be positive");
  const double log_kappa = std::log(kappa_from(range0));
  const double log_tau = -0.5 * std::log(4.0 * std::numbers::pi) - log_kappa;
  Priors p;
  p.mean = {0.0, 0.0, log_kappa, log_tau, log_kappa, log_tau};
  p.sd = {2.0, 1.5, 1.0, 1.0, 1.0, 1.0};
  return p;
}

double Priors::log_density(const HyperParams& theta) const {
  const Eigen::VectorXd v = theta.to_vector();
  double s = 0.0;
  for (int k = 0; k < HyperParams::size; ++k) s += normal_log_pdf(v[k], mean[k], sd[k]);
  return s;
}

// ---------------------------------------------------------------------------
// Design

SpatialDesign SpatialDesign::from_mesh(const Mesh& mesh, std::span<const Point> locations) {
  return SpatialDesign{fem_matrices(mesh), basis_projector(mesh, locations)};
}

DesignSystem assemble_design(const ObservationPanel& panel, const Projector& projector,
                             const LatentLayout& layout) {
  panel.validate();
  if (projector.rows() != panel.location_count())
    throw Error(ErrorCode::DimensionMismatch, "projector rows differ from location count");
  if (projector.cols() != layout.vertices || panel.time_count() != layout.times)
    throw Error(ErrorCode::DimensionMismatch, "projector or panel does not match the layout");

  // Row-major copy of the projector for cheap row access.
  const Eigen::SparseMatrix<double, Eigen::RowMajor, int> psi = projector.matrix;

  DesignSystem sys;
  const int rows = panel.observation_count();
  sys.y.resize(rows);
  sys.entries.reserve(rows);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(rows) * 7);
  int r = 0;
  for (int i = 0; i < panel.location_count(); ++i) {
    for (int j = 0; j < panel.time_count(); ++j) {
      if (!panel.observed(i, j)) continue;
      const double time = panel.times[j];
      if (time != 0.0) t.emplace_back(r, layout.beta0(), time);
      for (Eigen::SparseMatrix<double, Eigen::RowMajor, int>::InnerIterator it(psi, i); it; ++it) {
        if (it.value() == 0.0) continue;
        const int g = static_cast<int>(it.col());
        if (time != 0.0) t.emplace_back(r, layout.beta(g), time * it.value());
        t.emplace_back(r, layout.tau(j, g), it.value());
      }
      sys.y[r] = panel.values(i, j);
      sys.entries.emplace_back(i, j);
      ++r;
    }
  }
  sys.matrix = SparseMatrix(rows, layout.dim());
  sys.matrix.setFromTriplets(t.begin(), t.end());
  sys.matrix.makeCompressed();
  return sys;
}

// ---------------------------------------------------------------------------
// LatentModel

LatentModel::LatentModel(ObservationPanel panel, SpatialDesign design, Priors priors, EvaluationPath path)
    : panel_(std::move(panel)),
      design_(std::move(design)),
      priors_(priors),
      layout_{design_.vertex_count(), panel_.time_count()},
      posterior_terms_(0),
      prior_terms_(0) {
  system_ = assemble_design(panel_, design_.projector, layout_);
  spde_ = SpdeBasis::build(design_.fem.mass, design_.fem.stiffness);
  aty_ = system_.matrix.transpose() * system_.y;
  yty_ = system_.y.squaredNorm();

  posterior_terms_ = SparseCombination(layout_.dim());
  prior_terms_ = SparseCombination(layout_.dim());
  add_terms(posterior_terms_, true);
  add_terms(prior_terms_, false);
  posterior_terms_.finalize();
  prior_terms_.finalize();

  spatial_analysis_.emplace(spde_.precision(1.0, 1.0));

  const bool complete = panel_.observed.all();
  if (path == EvaluationPath::Spectral && !complete)
    throw Error(ErrorCode::InvalidInput, "the spectral evaluation path needs a panel without missing values");
  spectral_ = path == EvaluationPath::Spectral ||
              (path == EvaluationPath::Automatic && complete && panel_.location_count() <= 3000);
  if (spectral_) {
    psi_ = Eigen::MatrixXd(design_.projector.matrix);
    values_ = panel_.values;
    times_ = Eigen::Map<const Eigen::VectorXd>(panel_.times.data(), panel_.time_count());
  }
}

void LatentModel::add_terms(SparseCombination& combo, bool with_likelihood) const {
  const int dim = layout_.dim();
  const int m = layout_.times;

  combo.add_term(SparseSymmetric::from_triplets(dim, std::vector<Triplet>{{0, 0, 1.0}}));
  for (const auto* part : {&spde_.mass, &spde_.stiffness, &spde_.stiffness2})
    combo.add_term(embed(*part, layout_.beta(0), dim));

  const int tau0 = layout_.tau(0, 0);
  if (m == 1) {
    for (const auto* part : {&spde_.mass, &spde_.stiffness, &spde_.stiffness2})
      combo.add_term(embed(*part, tau0, dim));
  } else {
    const TimeParts tp = time_parts(m);
    for (const auto* time : {&tp.ends, &tp.interior, &tp.off})
      for (const auto* part : {&spde_.mass, &spde_.stiffness, &spde_.stiffness2})
        combo.add_term(embed(kron_precision(*time, *part), tau0, dim));
  }

  if (with_likelihood) {
    const SparseMatrix ata = (system_.matrix.transpose() * system_.matrix).pruned(0.0, 0.0);
    combo.add_term(SparseSymmetric::from_matrix(ata));
  }
}

std::vector<double> LatentModel::coefficients(const HyperParams& theta, bool with_likelihood) const {
  const double kb2 = std::exp(2.0 * theta.log_kappa_beta);
  const double tb2 = std::exp(2.0 * theta.log_tau_beta);
  const double kx2 = std::exp(2.0 * theta.log_kappa_xi);
  const double tx2 = std::exp(2.0 * theta.log_tau_xi);
  const double phi = theta.phi();

  std::vector<double> c;
  c.reserve(15);
  c.push_back(priors_.beta0_precision);
  c.push_back(tb2 * kb2 * kb2);
  c.push_back(2.0 * tb2 * kb2);
  c.push_back(tb2);

  const std::array<double, 3> spatial{tx2 * kx2 * kx2, 2.0 * tx2 * kx2, tx2};
  if (layout_.times == 1) {
    const double w = one_minus_phi2(theta.phi_internal);
    for (double s : spatial) c.push_back(w * s);
  } else {
    for (double w : {1.0, 1.0 + phi * phi, -phi})
      for (double s : spatial) c.push_back(w * s);
  }
  if (with_likelihood) c.push_back(theta.noise_precision());
  return c;
}

SparseSymmetric LatentModel::prior_precision(const HyperParams& theta) const {
  return prior_terms_.evaluate(coefficients(theta, false));
}

SparseSymmetric LatentModel::posterior_precision(const HyperParams& theta) const {
  return posterior_terms_.evaluate(coefficients(theta, true));
}

double LatentModel::prior_log_det(const HyperParams& theta) {
  const double ld_beta =
      spatial_analysis_->factorize(spde_.precision(theta.kappa_beta(), theta.tau_beta())).log_det();
  const double ld_xi =
      spatial_analysis_->factorize(spde_.precision(theta.kappa_xi(), theta.tau_xi())).log_det();
  return std::log(priors_.beta0_precision) + ld_beta +
         layout_.vertices * log_one_minus_phi2(theta.phi_internal) + layout_.times * ld_xi;
}

CholeskyFactor LatentModel::factorize_posterior(const HyperParams& theta) {
  const SparseSymmetric q = posterior_precision(theta);
  if (!posterior_analysis_) posterior_analysis_.emplace(q);
  return posterior_analysis_->factorize(q);
}

double LatentModel::sparse_evaluate(const HyperParams& theta) {
  const double prec = theta.noise_precision();
  const double n = observation_count();
  const double ld_prior = prior_log_det(theta);
  const CholeskyFactor f = factorize_posterior(theta);
  const Eigen::VectorXd b = prec * aty_;
  const Eigen::VectorXd mu = f.solve(b);
  const double quad = prec * yty_ - mu.dot(b);
  return 0.5 * ld_prior + 0.5 * n * theta.log_prec_eps - 0.5 * f.log_det() - 0.5 * quad -
         0.5 * n * kLog2Pi;
}

double LatentModel::spectral_evaluate(const HyperParams& theta, TrendMoments* moments) {
  const int n = panel_.location_count();
  const int m = panel_.time_count();
  const int g = layout_.vertices;
  const double noise_var = 1.0 / theta.noise_precision();

  // Time: Q_AR = U diag(lambda) Uᵀ.
  Eigen::MatrixXd q_ar = Eigen::MatrixXd::Zero(m, m);
  if (m == 1) {
    q_ar(0, 0) = one_minus_phi2(theta.phi_internal);
  } else {
    const double phi = theta.phi();
    for (int t = 0; t < m; ++t) {
      q_ar(t, t) = (t == 0 || t == m - 1) ? 1.0 : 1.0 + phi * phi;
      if (t + 1 < m) q_ar(t, t + 1) = q_ar(t + 1, t) = -phi;
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> time_eig(q_ar);
  const Eigen::VectorXd lambda = time_eig.eigenvalues();
  if (!(lambda.minCoeff() > 0.0)) throw Error(ErrorCode::NotPositiveDefinite, "AR(1) precision");
  const Eigen::MatrixXd& u = time_eig.eigenvectors();
  const Eigen::VectorXd c = u.transpose() * times_;

  // Space: Ψ Q_ξ⁻¹ Ψᵀ = V diag(d) Vᵀ.
  const CholeskyFactor f_xi =
      spatial_analysis_->factorize(spde_.precision(theta.kappa_xi(), theta.tau_xi()));
  const Eigen::MatrixXd k = psi_ * f_xi.solve(Eigen::MatrixXd(psi_.transpose()));
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> space_eig(0.5 * (k + k.transpose()));
  const Eigen::VectorXd d = space_eig.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd& v = space_eig.eigenvectors();

  // Rotated data; entry (j, k) has variance d_j / lambda_k + noise_var given the trend.
  const Eigen::MatrixXd w = v.transpose() * values_ * u;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd gv = Eigen::VectorXd::Zero(n);
  double ll = -0.5 * n * m * kLog2Pi;
  for (int kk = 0; kk < m; ++kk)
    for (int j = 0; j < n; ++j) {
      const double var = d[j] / lambda[kk] + noise_var;
      ll -= 0.5 * (std::log(var) + w(j, kk) * w(j, kk) / var);
      h[j] += c[kk] * c[kk] / var;
      gv[j] += c[kk] * w(j, kk) / var;
    }

  // Trend block (β₀, β̃) with design Vᵀ [1 | Ψ].
  Eigen::MatrixXd b(n, g + 1);
  b.col(0) = v.transpose() * Eigen::VectorXd::Ones(n);
  b.rightCols(g) = v.transpose() * psi_;
  const SparseSymmetric q_beta = spde_.precision(theta.kappa_beta(), theta.tau_beta());
  const double ld_prior = std::log(priors_.beta0_precision) + spatial_analysis_->factorize(q_beta).log_det();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(g + 1, g + 1);
  p(0, 0) = priors_.beta0_precision;
  p.bottomRightCorner(g, g) = q_beta.dense();
  p.noalias() += b.transpose() * h.asDiagonal() * b;
  const Eigen::LLT<Eigen::MatrixXd> llt(p);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotPositiveDefinite, "trend posterior precision");
  const Eigen::VectorXd rhs = b.transpose() * gv;
  const Eigen::VectorXd mu = llt.solve(rhs);
  const double ld_post = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  ll += 0.5 * ld_prior - 0.5 * ld_post + 0.5 * rhs.dot(mu);

  if (moments) {
    moments->mean = mu;
    moments->covariance = llt.solve(Eigen::MatrixXd::Identity(g + 1, g + 1));
  }
  return ll;
}

double LatentModel::log_marginal_likelihood(const HyperParams& theta) {
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  if (!theta.finite()) return neg_inf;
  try {
    const double v = spectral_ ? spectral_evaluate(theta, nullptr) : sparse_evaluate(theta);
    return std::isfinite(v) ? v : neg_inf;
  } catch (const Error&) {
    return neg_inf;
  }
}

TrendMoments LatentModel::trend_moments(const HyperParams& theta) {
  if (!theta.finite()) throw Error(ErrorCode::InvalidParameters, "non-finite hyperparameters");
  TrendMoments out;
  if (spectral_) {
    spectral_evaluate(theta, &out);
    return out;
  }
  const GaussianPosterior post = posterior(theta);
  std::vector<int> idx(layout_.vertices + 1);
  std::iota(idx.begin(), idx.end(), 0);
  out.mean = post.mean.head(layout_.vertices + 1);
  out.covariance = post.factor.covariance_block(idx);
  return out;
}

double LatentModel::log_posterior(const HyperParams& theta) {
  const double ll = log_marginal_likelihood(theta);
  if (!std::isfinite(ll)) return ll;
  return ll + priors_.log_density(theta);
}

GaussianPosterior LatentModel::posterior(const HyperParams& theta) {
  if (!theta.finite()) throw Error(ErrorCode::InvalidParameters, "non-finite hyperparameters");
  CholeskyFactor f = factorize_posterior(theta);
  Eigen::VectorXd mean = f.solve(Eigen::VectorXd(theta.noise_precision() * aty_));
  return GaussianPosterior{layout_, std::move(mean), std::move(f)};
}

// ---------------------------------------------------------------------------
// Free functions

SparseSymmetric prior_precision(const HyperParams& theta, const SpatialDesign& design, int times,
                                double beta0_precision) {
  const int g = design.vertex_count();
  const LatentLayout layout{g, times};
  const SparseSymmetric q_beta =
      spde_precision(theta.kappa_beta(), theta.tau_beta(), design.fem.mass, design.fem.stiffness);
  const SparseSymmetric q_xi =
      spde_precision(theta.kappa_xi(), theta.tau_xi(), design.fem.mass, design.fem.stiffness);
  const SparseSymmetric q_tau = kron_precision(ar1_precision({theta.phi(), times}), q_xi);

  std::vector<Triplet> t;
  t.emplace_back(0, 0, beta0_precision);
  for (const auto& e : q_beta.entries())
    t.emplace_back(e.row() + layout.beta(0), e.col() + layout.beta(0), e.value());
  for (const auto& e : q_tau.entries())
    t.emplace_back(e.row() + layout.tau(0, 0), e.col() + layout.tau(0, 0), e.value());
  return SparseSymmetric::from_triplets(layout.dim(), t);
}

double log_posterior_theta(const HyperParams& theta, const ObservationPanel& panel,
                           const SpatialDesign& design, const Priors& priors) {
  LatentModel model(panel, design, priors);
  return model.log_posterior(theta);
}

GaussianPosterior posterior_latent(const HyperParams& theta, const ObservationPanel& panel,
                                   const SpatialDesign& design, const Priors& priors) {
  LatentModel model(panel, design, priors);
  return model.posterior(theta);
}

}  // namespace sttrend
