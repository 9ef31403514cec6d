// Acceptance checks AC1-AC8. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. Pass criterion names on the command line to run
// a subset, e.g. `acceptance AC3 AC6`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../unit/dense_model.hpp"
#include "sttrend/config.hpp"
#include "sttrend/data.hpp"
#include "sttrend/excursions.hpp"
#include "sttrend/inference.hpp"
#include "sttrend/pipeline.hpp"
#include "sttrend/spde.hpp"
#include "sttrend/timeseries.hpp"

using namespace sttrend;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome ac1() {
  const double s = sigma2_from(1.0, 1.0);
  const double r = range_from(1.0);
  const double es = std::abs(s - 1.0 / (4.0 * std::numbers::pi));
  const double er = std::abs(r - std::sqrt(8.0));
  return {es <= 1e-12 && er <= 1e-12, fmt("sigma2 err %.2e, range err %.2e", es, er)};
}

Outcome ac2() {
  double worst = 0.0;
  std::string d;
  for (double kappa : {0.1, 1.0, 3.7}) {
    const double c = matern_corr(std::sqrt(8.0) / kappa, kappa);
    worst = std::max(worst, std::abs(c - 0.13));
    d = fmt("corr %.5f", c);
  }
  return {worst <= 0.015, d + fmt(", |corr - 0.13| <= %.5f", worst)};
}

Outcome ac3() {
  const double range = 2.5, h = 0.25, ext = 4.0;
  const double kappa = kappa_from(range);
  const int cells = static_cast<int>(std::lround((10.0 + 2 * ext) / h));
  const Mesh mesh = regular_mesh(-ext, 10.0 + ext, -ext, 10.0 + ext, cells, cells);
  const FemMatrices fem = fem_matrices(mesh);
  const CholeskyFactor f = factorize(spde_precision(kappa, tau_from(kappa, 1.0), fem.mass, fem.stiffness));

  const int side = cells + 1;
  const int lo = static_cast<int>(std::lround(ext / h));
  const int hi = lo + static_cast<int>(std::lround(10.0 / h));
  auto vertex = [&](int ix, int iy) { return iy * side + ix; };

  struct Lag {
    int dx, dy;
  };
  std::vector<Lag> lags{{0, 0}};
  for (int k = 1; k * h <= range + 1e-12; ++k) {
    lags.push_back({k, 0});
    lags.push_back({0, k});
    if (k * h * std::sqrt(2.0) <= range + 1e-12) lags.push_back({k, k});
    if (k * h * std::sqrt(5.0) <= range + 1e-12) lags.push_back({2 * k, k});
  }
  // Pairs of interior vertices at each lag.
  std::vector<std::vector<std::pair<int, int>>> pairs(lags.size());
  for (std::size_t l = 0; l < lags.size(); ++l)
    for (int iy = lo; iy + lags[l].dy <= hi; iy += 2)
      for (int ix = lo; ix + lags[l].dx <= hi; ix += 2)
        pairs[l].push_back({vertex(ix, iy), vertex(ix + lags[l].dx, iy + lags[l].dy)});

  const int total = 20000, batch = 1000;
  std::vector<double> acc(lags.size(), 0.0);
  for (int b = 0; b < total / batch; ++b) {
    const Eigen::MatrixXd x = f.sample(batch, 1000 + b);
    for (std::size_t l = 0; l < lags.size(); ++l)
      for (const auto& [i, j] : pairs[l]) acc[l] += x.row(i).dot(x.row(j));
  }
  double worst = 0.0;
  for (std::size_t l = 0; l < lags.size(); ++l) {
    const double emp = acc[l] / (static_cast<double>(total) * pairs[l].size());
    const double d = h * std::hypot(lags[l].dx, lags[l].dy);
    const double want = matern_cov(d, {1.0, kappa});
    worst = std::max(worst, std::abs(emp - want) / want);
  }
  return {worst <= 0.10, fmt("%zu lags up to one range, %d vertices, worst relative error %.4f", lags.size(),
                             mesh.vertex_count(), worst)};
}

Outcome ac4() {
  std::mt19937_64 rng(4);
  double worst_ll = 0.0, worst_mean = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const oracle::Instance in = oracle::random_instance(rng, rep % 2 == 0);
    const oracle::Dense d = oracle::dense_model(in);
    const Priors priors = Priors::weakly_informative(1.0);
    const SpatialDesign design = SpatialDesign::from_mesh(in.mesh, in.panel.locations);

    const double want = oracle::dense_log_lik(in, d) + priors.log_density(in.theta);
    const double got = log_posterior_theta(in.theta, in.panel, design, priors);
    worst_ll = std::max(worst_ll, std::abs(got - want) / std::max(1.0, std::abs(want)));

    const double prec = in.theta.noise_precision();
    const Eigen::MatrixXd q = d.q_prior + prec * d.a.transpose() * d.a;
    const Eigen::VectorXd mean = q.ldlt().solve(prec * d.a.transpose() * d.y);
    const GaussianPosterior post = posterior_latent(in.theta, in.panel, design, priors);
    worst_mean = std::max(worst_mean, (post.mean - mean).cwiseAbs().maxCoeff() /
                                          std::max(1.0, mean.cwiseAbs().maxCoeff()));
  }
  return {worst_ll <= 1e-8 && worst_mean <= 1e-8,
          fmt("20 instances, log posterior err %.2e, latent mean err %.2e", worst_ll, worst_mean)};
}

Outcome ac5() {
  double worst = 0.0;
  for (double phi : {-0.9, 0.0, 0.5, 0.9}) {
    const Eigen::MatrixXd cov = ar1_precision({phi, 20}).dense().inverse();
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j)
        worst = std::max(worst, std::abs(cov(i, j) - std::pow(phi, std::abs(i - j)) / (1.0 - phi * phi)));
  }
  return {worst <= 1e-10, fmt("max abs err %.2e", worst)};
}

Outcome ac6() {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z;
  auto normals = [&](int n, int g) {
    Eigen::MatrixXd x(n, g);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < g; ++j) x(i, j) = z(rng);
    return x;
  };
  const double alpha = 0.05;
  const double want = 0.5 * (1.0 - std::pow(1.0 - alpha, 0.25));
  const FieldMarginals four({1.0}, Eigen::MatrixXd::Zero(1, 4), Eigen::MatrixXd::Ones(1, 4));
  const double rho4 = simultaneous_band(normals(50000, 4), four, alpha).band_rho;
  const FieldMarginals one({1.0}, Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Ones(1, 1));
  const double rho1 = simultaneous_band(normals(50000, 1), one, alpha).band_rho;

  // Correlated fields with mixed signal: avoid sets nest inside reject sets.
  bool nested = true;
  int simultaneous = 0, pointwise = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const int g = 40;
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(g, g);
    for (int i = 0; i < g; ++i)
      for (int j = 0; j <= i; ++j) l(i, j) = std::exp(-0.2 * (i - j));
    l = (l * l.transpose()).llt().matrixL();
    for (int i = 0; i < g; ++i) l.row(i).normalize();
    Eigen::MatrixXd means(1, g), sds(1, g);
    for (int j = 0; j < g; ++j) {
      means(0, j) = 4.0 * std::sin(0.3 * j + rep);
      sds(0, j) = 1.0;
    }
    const Eigen::MatrixXd x = (normals(20000, g) * l.transpose()).rowwise() + means.row(0);
    const FieldMarginals f({1.0}, means, sds);
    const BandResult pw = pointwise_band(f, alpha);
    const BandResult sim = simultaneous_band(x, f, alpha);
    for (int j = 0; j < g; ++j) {
      nested = nested && (!sim.avoid[j] || pw.avoid[j]);
      simultaneous += sim.avoid[j];
      pointwise += pw.avoid[j];
    }
  }
  const bool ok = std::abs(rho4 - want) <= 0.0015 && rho1 == alpha / 2 && nested && simultaneous > 0;
  return {ok, fmt("G=4 rho %.5f (want %.5f), G=1 rho %.5f, avoid %d of %d rejects nested: %s", rho4, want, rho1,
                  simultaneous, pointwise, nested ? "yes" : "no")};
}

// ---------------------------------------------------------------------------

struct Fit {
  Mesh mesh;
  std::vector<HyperSummary> hyper;
  FieldMarginals trend;
};

Fit fit_panel(const ObservationPanel& panel) {
  const Config defaults;
  const double range0 = default_range0(panel.locations);
  Mesh mesh = build_mesh(panel.locations, mesh_options(defaults, panel.locations));
  const Priors priors = Priors::weakly_informative(range0);
  LatentModel model(panel, SpatialDesign::from_mesh(mesh, panel.locations), priors);
  const HyperParams init = HyperParams::from_vector(Eigen::Map<const Eigen::VectorXd>(priors.mean.data(), HyperParams::size));
  const ModeResult mode = find_mode(model, init, defaults.mode);
  const ThetaGrid grid = explore_grid(model, mode.theta, defaults.grid);
  return {std::move(mesh), hyper_posteriors(grid), FieldMarginals::from(trend_posterior(model, grid, {}, false))};
}

double find(const std::vector<HyperSummary>& h, const std::string& name, double HyperSummary::*field) {
  for (const auto& s : h)
    if (s.name == name) return s.*field;
  throw Error(ErrorCode::InvalidInput, "no summary for " + name);
}

Outcome ac7() {
  const NaturalParams truth{0.09, 0.4, 0.05, 5.0, 1.0, 15.0};
  std::vector<Point> locs;
  for (int j = 0; j < 10; ++j)
    for (int i = 0; i < 10; ++i) locs.push_back({double(i), double(j)});
  std::vector<int> years;
  for (int y = 1950; y <= 2014; ++y) years.push_back(y);
  const std::vector<double> times = decade_covariate(years);
  // Same mesh the fit builds for these locations.
  const Mesh sim_mesh = build_mesh(locs, mesh_options(Config{}, locs));

  int correlated = 0, cover_phi = 0, cover_rb = 0, cover_rx = 0, decreases = 0;
  double min_corr = 1.0;
  for (int seed = 1; seed <= 10; ++seed) {
    const SimulationResult sim = simulate(to_internal(truth), sim_mesh, locs, times, seed);
    const Fit fine = fit_panel(sim.panel);
    const Eigen::VectorXd est = basis_projector(fine.mesh, locs).matrix * fine.trend.mean_vector();
    const Eigen::VectorXd a = est.array() - est.mean();
    const Eigen::VectorXd b = sim.trend_locations.array() - sim.trend_locations.mean();
    const double corr = a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
    min_corr = std::min(min_corr, corr);
    correlated += corr >= 0.7;

    auto covers = [&](const std::string& name, double value) {
      return find(fine.hyper, name, &HyperSummary::q05) <= value && value <= find(fine.hyper, name, &HyperSummary::q95);
    };
    cover_phi += covers("phi", truth.phi);
    cover_rb += covers("range_beta", truth.range_beta);
    cover_rx += covers("range_xi", truth.range_xi);

    AnomalyPanel anomalies;
    anomalies.panel.locations = locs;
    anomalies.panel.years = years;
    anomalies.panel.values = sim.panel.values;
    anomalies.panel.observed = sim.panel.observed;
    anomalies.constants.assign(locs.size(), CellConstants{});
    const Fit coarse = fit_panel(upscale(anomalies, 2).observations());
    decreases += find(coarse.hyper, "phi", &HyperSummary::mean) < find(fine.hyper, "phi", &HyperSummary::mean);
  }
  const bool ok = correlated >= 8 && cover_phi >= 7 && cover_rb >= 7 && cover_rx >= 7 && decreases >= 7;
  return {ok, fmt("corr>=0.7 %d/10 (min %.3f), 90%% cover phi %d range_beta %d range_xi %d, phi decreases %d/10",
                  correlated, min_corr, cover_phi, cover_rb, cover_rx, decreases)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome ac8() {
  const fs::path root = fs::temp_directory_path() / "sttrend_acceptance_repro";
  fs::remove_all(root);
  const std::string ini =
      "[simulate]\nnx = 8\nny = 8\nfirst_year = 1975\nlast_year = 2014\nbeta0_sd = 0.3\n"
      "[bands]\nalpha = 0.05, 0.1\nsamples = 25000\n[run]\nseed = 21\n";
  std::vector<std::map<std::string, std::string>> outputs;
  for (const char* run : {"a", "b"}) {
    Config c = parse_config(ini);
    c.out = (root / run).string();
    run_simulate(c);
    run_fit(c);
    run_bands(c);
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(c.out))
      if (e.path().extension() == ".csv") files[e.path().filename().string()] = slurp(e.path());
    outputs.push_back(std::move(files));
  }
  fs::remove_all(root);
  const bool ok = outputs[0].size() >= 8 && outputs[0] == outputs[1];
  return {ok, fmt("%zu CSV files compared, identical: %s", outputs[0].size(), outputs[0] == outputs[1] ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria{
      {"AC1", ac1, 1e-3},  {"AC2", ac2, 1e-3}, {"AC3", ac3, 60.0},  {"AC4", ac4, 10.0},
      {"AC5", ac5, 1.0},   {"AC6", ac6, 30.0}, {"AC7", ac7, 900.0}, {"AC8", ac8, 120.0},
  };
  const std::set<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.contains(c.name)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s %s %s; %.3f s (limit %g s%s)\n", c.name, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                c.budget_seconds, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
