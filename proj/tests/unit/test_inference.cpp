#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include <boost/math/distributions/normal.hpp>

#include "oracles.hpp"
#include "sttrend/data.hpp"
#include "sttrend/error.hpp"
#include "sttrend/inference.hpp"

using namespace sttrend;

namespace {

struct Quadratic {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd precision;

  Quadratic() : mean(6), cov(Eigen::MatrixXd::Identity(6, 6)) {
    mean << 1.0, -1.0, 0.5, 0.0, 2.0, 0.3;
    cov.diagonal() << 0.5, 1.0, 2.0, 0.1, 0.3, 1.0;
    cov(0, 1) = cov(1, 0) = 0.3;
    cov(2, 4) = cov(4, 2) = -0.2;
    precision = cov.inverse();
  }
  double operator()(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd r = x - mean;
    return -0.5 * r.dot(precision * r);
  }
};

}  // namespace

TEST_CASE("maximize finds the optimum of a smooth objective") {
  const Quadratic q;
  const OptimResult r = maximize(std::cref(q), Eigen::VectorXd::Zero(6));
  CHECK(r.converged);
  CHECK((r.x - q.mean).cwiseAbs().maxCoeff() < 0.02);
  CHECK(r.value > -1e-3);

  // Banana-shaped 2-D surface.
  const Objective rosen = [](const Eigen::VectorXd& x) {
    return -(std::pow(1.0 - x[0], 2) + 10.0 * std::pow(x[1] - x[0] * x[0], 2));
  };
  ModeOptions o;
  o.tol = 1e-10;
  o.polish_min_step = 1e-6;
  const OptimResult b = maximize(rosen, Eigen::Vector2d(-1.0, 2.0), o);
  CHECK(b.x[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(b.x[1] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("maximize is deterministic and survives infinite regions") {
  const Objective f = [](const Eigen::VectorXd& x) {
    return x[0] > 2.0 ? -std::numeric_limits<double>::infinity() : -(x[0] - 1.5) * (x[0] - 1.5) - x[1] * x[1];
  };
  const OptimResult a = maximize(f, Eigen::Vector2d(0.0, 1.0));
  const OptimResult b = maximize(f, Eigen::Vector2d(0.0, 1.0));
  CHECK(a.x == b.x);
  CHECK(a.evaluations == b.evaluations);
  CHECK(a.x[0] == doctest::Approx(1.5).epsilon(0.01));
}

TEST_CASE("finite-difference Hessian of a quadratic is exact") {
  const Quadratic q;
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(6, 0.2);
  const Eigen::MatrixXd h = finite_difference_hessian(std::cref(q), x, 0.05, q(x));
  CHECK((h + q.precision).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("grid reproduces the moments of a Gaussian posterior") {
  const Quadratic q;
  const ThetaGrid g = explore_grid(std::cref(q), q.mean, {});
  CHECK(g.size() == 1 + 2 * 6 + 4 * 3);
  CHECK(g.mode_index == 0);
  const auto w = g.weights();
  double total = 0.0;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(6);
  for (int k = 0; k < g.size(); ++k) {
    total += w[k];
    m += w[k] * g.points[k].to_vector();
  }
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(6, 6);
  for (int k = 0; k < g.size(); ++k) {
    const Eigen::VectorXd r = g.points[k].to_vector() - m;
    s += w[k] * r * r.transpose();
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((m - q.mean).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((s - q.cov).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((g.precision - q.precision).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("flat directions get the curvature floor and single-point grids") {
  const Objective flat = [](const Eigen::VectorXd& x) { return -0.5 * x.head(5).squaredNorm(); };
  const ThetaGrid g = explore_grid(flat, Eigen::VectorXd::Zero(6), {});
  double var = 0.0;
  const auto w = g.weights();
  for (int k = 0; k < g.size(); ++k) var += w[k] * std::pow(g.points[k].log_tau_xi, 2);
  // sd 2 on the flat axis; its weights are unpenalized there, so the second
  // moment exceeds the design value of 4 but stays finite.
  CHECK(var >= 4.0);
  CHECK(std::isfinite(var));

  GridOptions one;
  one.hessian_step = 0.0;
  const ThetaGrid s = explore_grid(flat, Eigen::VectorXd::Constant(6, 0.1), one);
  CHECK(s.size() == 1);
  CHECK(s.weights()[0] == 1.0);
  CHECK(s.precision.size() == 0);
}

TEST_CASE("mixture marginals") {
  std::vector<double> w{0.3, 0.7};
  Eigen::MatrixXd means(2, 2), sds(2, 2);
  means << 0.0, 1.0, 2.0, 1.0;
  sds << 1.0, 0.5, 0.5, 0.5;
  const FieldMarginals f(w, means, sds);
  CHECK(f.mean(0) == doctest::Approx(1.4));
  CHECK(f.sd(0) == doctest::Approx(std::sqrt(0.3 * 1.0 + 0.7 * 0.25 + 0.3 * 1.96 + 0.7 * 0.36)));
  CHECK(f.sd(1) == doctest::Approx(0.5));
  for (double p : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999}) {
    CHECK(f.cdf(0, f.quantile(0, p)) == doctest::Approx(p).epsilon(1e-7));
    const boost::math::normal n(1.0, 0.5);
    CHECK(f.quantile(1, p) == doctest::Approx(boost::math::quantile(n, p)).epsilon(1e-8));
  }
  const FieldMarginals s = f.subset(std::vector<int>{1});
  CHECK(s.size() == 1);
  CHECK(s.mean(0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(FieldMarginals({1.0}, Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1)), Error);
}

TEST_CASE("joint draws follow the mixture") {
  TrendPosterior tp;
  tp.vertices = {0, 1};
  TrendComponent a, b;
  a.weight = 0.25;
  a.mean = Eigen::Vector2d(-1.0, 0.0);
  a.covariance = Eigen::Matrix2d{{1.0, 0.8}, {0.8, 1.0}};
  a.variance = a.covariance.diagonal();
  b.weight = 0.75;
  b.mean = Eigen::Vector2d(1.0, 0.0);
  b.covariance = Eigen::Matrix2d{{0.5, 0.0}, {0.0, 0.5}};
  b.variance = b.covariance.diagonal();
  tp.components = {a, b};
  const int n = 40000;
  const Eigen::MatrixXd x = sample_beta(tp, n, 77);
  CHECK(x.rows() == n);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  CHECK(mean[0] == doctest::Approx(0.5).epsilon(0.03));
  CHECK(std::abs(mean[1]) < 0.03);
  const double cov01 = ((x.col(0).array() - mean[0]) * (x.col(1).array() - mean[1])).mean();
  // Mixture covariance: 0.25·0.8 + 0.75·0 (means share the second coordinate).
  CHECK(cov01 == doctest::Approx(0.2).epsilon(0.1));
  const bool same = sample_beta(tp, 500, 77) == sample_beta(tp, 500, 77);
  const bool other = sample_beta(tp, 500, 78) == sample_beta(tp, 500, 77);
  CHECK(same);
  CHECK_FALSE(other);
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(derive_seed(42, i));
  CHECK(seeds.size() == 1000);
}

TEST_CASE("projected trend is a linear map of the vertex mixture") {
  TrendPosterior tp;
  tp.vertices = {2, 5};
  TrendComponent c;
  c.mean = Eigen::Vector2d(1.0, 3.0);
  c.covariance = Eigen::Matrix2d{{1.0, 0.5}, {0.5, 2.0}};
  c.variance = c.covariance.diagonal();
  tp.components = {c};
  SparseMatrix w(2, 6);
  w.insert(0, 2) = 0.25;
  w.insert(0, 5) = 0.75;
  w.insert(1, 5) = 1.0;
  const TrendPosterior p = project_trend(tp, w);
  CHECK(p.components[0].mean[0] == doctest::Approx(2.5));
  CHECK(p.components[0].variance[0] == doctest::Approx(0.0625 + 2 * 0.25 * 0.75 * 0.5 + 0.5625 * 2.0));
  CHECK(p.components[0].covariance(0, 1) == doctest::Approx(0.25 * 0.5 + 0.75 * 2.0));
  SparseMatrix bad(1, 6);
  bad.insert(0, 0) = 1.0;
  CHECK_THROWS_AS(project_trend(tp, bad), Error);
}

TEST_CASE("trend posterior matches the latent posterior at each grid point") {
  std::vector<Point> locs{{0.2, 0.3}, {1.5, 0.4}, {0.9, 1.1}, {1.8, 1.7}};
  std::vector<double> times{-0.2, -0.1, 0.0, 0.1, 0.2};
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z;
  Eigen::MatrixXd y(4, 5);
  for (int i = 0; i < 4; ++i)
    for (int t = 0; t < 5; ++t) y(i, t) = z(rng) + 2.0 * times[t];
  ObservationPanel panel = ObservationPanel::complete(locs, times, y);
  panel.observed(1, 3) = false;
  const Mesh mesh = regular_mesh(0, 2, 0, 2, 2, 2);
  LatentModel model(panel, SpatialDesign::from_mesh(mesh, locs), Priors::weakly_informative(1.0));
  ThetaGrid grid;
  grid.points = {to_internal({0.5, 0.3, 0.2, 1.0, 1.0, 2.0}), to_internal({0.4, 0.1, 0.3, 1.5, 0.8, 1.0})};
  grid.log_posteriors = {0.0, 0.0};
  grid.log_weights = {std::log(0.6), std::log(0.4)};
  const TrendPosterior tp = trend_posterior(model, grid);
  const TrendPosterior diag = trend_posterior(model, grid, {}, false);
  REQUIRE(tp.components.size() == 2);
  for (int k = 0; k < 2; ++k) {
    const GaussianPosterior post = model.posterior(grid.points[k]);
    const Eigen::MatrixXd cov = post.factor.solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(post.mean.size(), post.mean.size())));
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      const int b = model.layout().beta(v);
      CHECK(tp.components[k].mean[v] == doctest::Approx(post.mean[0] + post.mean[b]).epsilon(1e-9));
      const double var = cov(0, 0) + 2 * cov(0, b) + cov(b, b);
      CHECK(tp.components[k].variance[v] == doctest::Approx(var).epsilon(1e-8));
      CHECK(diag.components[k].variance[v] == doctest::Approx(var).epsilon(1e-8));
    }
    CHECK(tp.components[k].weight == doctest::Approx(k == 0 ? 0.6 : 0.4));
  }
}

TEST_CASE("mode search on a small synthetic panel") {
  const Mesh mesh = regular_mesh(-2, 6, -2, 6, 6, 6);
  std::vector<Point> locs;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) locs.push_back({1.0 * i, 1.0 * j});
  std::vector<int> years;
  for (int y = 1990; y < 2010; ++y) years.push_back(y);
  const HyperParams truth = to_internal({0.1, 0.5, 0.1, 3.0, 1.0, 4.0});
  const SimulationResult sim = simulate(truth, mesh, locs, decade_covariate(years), 9);
  LatentModel model(sim.panel, SpatialDesign::from_mesh(mesh, locs), Priors::weakly_informative(1.0));
  const ModeResult r = find_mode(model, HyperParams{}, {});
  CHECK(r.converged);
  // No coordinate step of the polish size improves the optimum.
  for (int i = 0; i < HyperParams::size; ++i)
    for (double s : {-0.01, 0.01}) {
      Eigen::VectorXd v = r.theta.to_vector();
      v[i] += s;
      CHECK(model.log_posterior(HyperParams::from_vector(v)) <= r.log_post + 1e-3);
    }
  const ThetaGrid g = explore_grid(model, r.theta, {});
  CHECK(g.mode_index == 0);
  const auto hs = hyper_posteriors(g);
  REQUIRE(hs.size() == 6);
  CHECK(hs[1].name == "phi");
  for (const auto& h : hs) {
    CHECK(h.q05 <= h.q50);
    CHECK(h.q50 <= h.q95);
    CHECK(h.sd > 0.0);
  }
}

TEST_CASE("hyperparameter summaries of a single point") {
  ThetaGrid g;
  const NaturalParams p{0.09, 0.4, 0.05, 5.0, 1.0, 15.0};
  g.points = {to_internal(p)};
  g.log_posteriors = {0.0};
  g.log_weights = {0.0};
  const auto hs = hyper_posteriors(g);
  CHECK(hs[0].mean == doctest::Approx(0.09));
  CHECK(hs[1].q50 == doctest::Approx(0.4));
  CHECK(hs[5].mean == doctest::Approx(15.0));
  CHECK(hs[5].sd == doctest::Approx(0.0));
}
