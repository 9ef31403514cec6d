#include <doctest.h>

#include <cmath>
#include <random>

#include "dense_model.hpp"
#include "oracles.hpp"
#include "sttrend/error.hpp"
#include "sttrend/model.hpp"
#include "sttrend/spde.hpp"

using namespace sttrend;

namespace {

using oracle::Instance;
using oracle::Dense;
using oracle::random_instance;
using oracle::dense_model;
using oracle::dense_log_lik;

double normal_log_pdf(double x, double mean, double sd) {
  const double r = (x - mean) / sd;
  return -0.5 * r * r - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

}  // namespace

TEST_CASE("hyperparameter scales round trip") {
  const NaturalParams p{0.09, 0.4, 0.05, 5.0, 1.0, 15.0};
  const HyperParams h = to_internal(p);
  const NaturalParams back = to_natural(h);
  CHECK(back.noise_variance == doctest::Approx(p.noise_variance).epsilon(1e-14));
  CHECK(back.phi == doctest::Approx(p.phi).epsilon(1e-14));
  CHECK(back.sigma2_beta == doctest::Approx(p.sigma2_beta).epsilon(1e-14));
  CHECK(back.range_beta == doctest::Approx(p.range_beta).epsilon(1e-14));
  CHECK(back.sigma2_xi == doctest::Approx(p.sigma2_xi).epsilon(1e-14));
  CHECK(back.range_xi == doctest::Approx(p.range_xi).epsilon(1e-14));
  CHECK(h.kappa_beta() == doctest::Approx(std::sqrt(8.0) / 5.0));
  CHECK(sigma2_from(h.kappa_xi(), h.tau_xi()) == doctest::Approx(1.0));
  for (double x : {-30.0, -2.0, 0.0, 1.3, 30.0}) {
    CHECK(std::abs(phi_from_internal(x)) < 1.0);
    if (std::abs(x) < 20) CHECK(phi_to_internal(phi_from_internal(x)) == doctest::Approx(x).epsilon(1e-12));
  }
  CHECK(HyperParams::from_vector(h.to_vector()).to_vector() == h.to_vector());
}

TEST_CASE("prior density is a product of normals on the internal scale") {
  const Priors p = Priors::weakly_informative(3.0);
  CHECK(p.mean[2] == doctest::Approx(std::log(std::sqrt(8.0) / 3.0)));
  HyperParams h;
  h.log_prec_eps = 0.3;
  h.phi_internal = -0.4;
  h.log_kappa_beta = 0.1;
  h.log_tau_beta = -1.0;
  h.log_kappa_xi = 0.5;
  h.log_tau_xi = 0.2;
  const Eigen::VectorXd v = h.to_vector();
  double want = 0.0;
  for (int k = 0; k < HyperParams::size; ++k) want += normal_log_pdf(v[k], p.mean[k], p.sd[k]);
  CHECK(p.log_density(h) == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("layout and design rows") {
  const Mesh mesh = regular_mesh(0, 1, 0, 1, 1, 1);
  const ObservationPanel panel =
      ObservationPanel::complete({{0.25, 0.25}, {1.0, 1.0}}, {-1.0, 0.0, 1.0}, Eigen::MatrixXd::Ones(2, 3));
  const LatentLayout layout{4, 3};
  CHECK(layout.dim() == 1 + 4 + 12);
  CHECK(layout.tau(2, 3) == 1 + 4 + 2 * 4 + 3);
  const Projector proj = basis_projector(mesh, panel.locations);
  const DesignSystem sys = assemble_design(panel, proj, layout);
  CHECK(sys.matrix.rows() == 6);
  const Eigen::MatrixXd a(sys.matrix);
  // Each row sums to t (β₀) + t (Σψ = 1) + 1 (Σψ for τ̃).
  for (int r = 0; r < 6; ++r) {
    const double t = panel.times[sys.entries[r].second];
    CHECK(a.row(r).sum() == doctest::Approx(2.0 * t + 1.0));
  }
}

TEST_CASE("marginal likelihood and latent posterior match dense Gaussian algebra") {
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 20; ++rep) {
    const Instance in = random_instance(rng, rep % 2 == 0);
    const Dense d = dense_model(in);
    const Priors priors = Priors::weakly_informative(1.0);
    const SpatialDesign design = SpatialDesign::from_mesh(in.mesh, in.panel.locations);

    LatentModel model(in.panel, design, priors, EvaluationPath::Sparse);
    const double want = dense_log_lik(in, d);
    CHECK(std::abs(model.log_marginal_likelihood(in.theta) - want) < 1e-8 * std::max(1.0, std::abs(want)));
    CHECK(log_posterior_theta(in.theta, in.panel, design, priors) ==
          doctest::Approx(want + priors.log_density(in.theta)).epsilon(1e-10));
    CHECK((model.prior_precision(in.theta).dense() - d.q_prior).cwiseAbs().maxCoeff() <
          1e-10 * d.q_prior.cwiseAbs().maxCoeff());
    CHECK(model.prior_log_det(in.theta) == doctest::Approx(oracle::log_det(d.q_prior)).epsilon(1e-10));

    const double prec = in.theta.noise_precision();
    const Eigen::MatrixXd qpost = d.q_prior + prec * d.a.transpose() * d.a;
    const Eigen::VectorXd mean = qpost.ldlt().solve(prec * d.a.transpose() * d.y);
    const GaussianPosterior post = posterior_latent(in.theta, in.panel, design, priors);
    CHECK((post.mean - mean).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, mean.cwiseAbs().maxCoeff()));
    CHECK(post.factor.log_det() == doctest::Approx(oracle::log_det(qpost)).epsilon(1e-10));

    if (in.panel.observed.all()) {
      LatentModel spectral(in.panel, design, priors, EvaluationPath::Spectral);
      CHECK(spectral.spectral());
      CHECK(std::abs(spectral.log_marginal_likelihood(in.theta) - want) < 1e-8 * std::max(1.0, std::abs(want)));
      const TrendMoments tm = spectral.trend_moments(in.theta);
      const int k = 1 + in.mesh.vertex_count();
      const Eigen::MatrixXd cov = qpost.inverse();
      CHECK((tm.mean - mean.head(k)).cwiseAbs().maxCoeff() < 1e-7 * std::max(1.0, mean.cwiseAbs().maxCoeff()));
      CHECK((tm.covariance - cov.topLeftCorner(k, k)).cwiseAbs().maxCoeff() <
            1e-7 * cov.topLeftCorner(k, k).cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("spectral and sparse evaluation agree on a larger panel") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  std::vector<Point> locs;
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 5; ++i) locs.push_back({0.5 + i, 0.5 + j});
  std::vector<double> times;
  for (int t = 0; t < 12; ++t) times.push_back(-0.55 + 0.1 * t);
  Eigen::MatrixXd y(25, 12);
  for (int i = 0; i < 25; ++i)
    for (int t = 0; t < 12; ++t) y(i, t) = z(rng) + 0.3 * times[t];
  const Mesh mesh = regular_mesh(-1, 6, -1, 6, 9, 9);
  const ObservationPanel panel = ObservationPanel::complete(locs, times, y);
  const SpatialDesign design = SpatialDesign::from_mesh(mesh, locs);
  const Priors priors = Priors::weakly_informative(2.0);
  LatentModel sparse(panel, design, priors, EvaluationPath::Sparse);
  LatentModel spectral(panel, design, priors, EvaluationPath::Spectral);
  LatentModel automatic(panel, design, priors);
  CHECK(!sparse.spectral());
  CHECK(automatic.spectral());
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::VectorXd v(HyperParams::size);
    for (int k = 0; k < HyperParams::size; ++k) v[k] = 0.8 * z(rng);
    const HyperParams th = HyperParams::from_vector(v);
    const double a = sparse.log_posterior(th), b = spectral.log_posterior(th);
    CHECK(std::abs(a - b) < 1e-9 * std::abs(a));
    const TrendMoments ma = sparse.trend_moments(th), mb = spectral.trend_moments(th);
    CHECK((ma.mean - mb.mean).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((ma.covariance - mb.covariance).cwiseAbs().maxCoeff() < 1e-7 * ma.covariance.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("invalid hyperparameters and panels") {
  std::mt19937_64 rng(1);
  Instance in = random_instance(rng, false);
  const Priors priors = Priors::weakly_informative(1.0);
  LatentModel model(in.panel, SpatialDesign::from_mesh(in.mesh, in.panel.locations), priors);
  HyperParams bad = in.theta;
  bad.log_kappa_xi = std::nan("");
  CHECK(model.log_posterior(bad) == -std::numeric_limits<double>::infinity());

  ObservationPanel p = in.panel;
  if (p.time_count() > 1) {
    p.times.back() = p.times.front();
    CHECK_THROWS_AS(p.validate(), Error);
  }
  ObservationPanel holes = ObservationPanel::complete({{0.5, 0.5}, {1.0, 1.0}}, {0.0, 1.0}, Eigen::MatrixXd::Zero(2, 2));
  holes.observed(0, 0) = false;
  try {
    LatentModel forced(holes, SpatialDesign::from_mesh(in.mesh, holes.locations), priors, EvaluationPath::Spectral);
    FAIL("spectral path accepted missing values");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidInput);
  }
}
