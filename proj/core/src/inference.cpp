#include "sttrend/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "sttrend/error.hpp"

namespace sttrend {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
  static const boost::math::normal standard;
  return boost::math::quantile(standard, p);
}

double log_sum_exp(const std::vector<double>& v) {
  double m = -kInf;
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

struct Simplex {
  std::vector<Eigen::VectorXd> x;
  std::vector<double> f;
};

}  // namespace

// ---------------------------------------------------------------------------
// Mode search

OptimResult maximize(const Objective& objective, const Eigen::VectorXd& x0, const ModeOptions& options) {
  const int d = static_cast<int>(x0.size());
  if (d < 1) throw Error(ErrorCode::InvalidInput, "empty parameter vector");
  if (!x0.allFinite()) throw Error(ErrorCode::InvalidParameters, "non-finite starting point");

  // Nelder–Mead minimizes g = −f; failed evaluations become +inf worst points.
  OptimResult out;
  auto g = [&](const Eigen::VectorXd& x) {
    ++out.evaluations;
    const double v = objective(x);
    return std::isnan(v) ? kInf : -v;
  };

  Simplex s;
  s.x.push_back(x0);
  s.f.push_back(g(x0));
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd v = x0;
    v[i] += options.initial_step;
    s.x.push_back(v);
    s.f.push_back(g(v));
  }

  std::vector<int> order(d + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return s.f[a] < s.f[b]; });
    Simplex sorted;
    for (int k : order) {
      sorted.x.push_back(s.x[k]);
      sorted.f.push_back(s.f[k]);
    }
    s = std::move(sorted);
  };

  bool converged = false;
  while (out.evaluations < options.max_evaluations) {
    sort_simplex();
    double size = 0.0;
    for (int k = 1; k <= d; ++k) size = std::max(size, (s.x[k] - s.x[0]).lpNorm<Eigen::Infinity>());
    if (std::isfinite(s.f[d]) && s.f[d] - s.f[0] < options.tol && size < 10.0 * options.polish_min_step) {
      converged = true;
      break;
    }
    ++out.iterations;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int k = 0; k < d; ++k) centroid += s.x[k];
    centroid /= d;

    const Eigen::VectorXd xr = centroid + (centroid - s.x[d]);
    const double fr = g(xr);
    if (fr < s.f[0]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - s.x[d]);
      const double fe = g(xe);
      if (fe < fr) {
        s.x[d] = xe;
        s.f[d] = fe;
      } else {
        s.x[d] = xr;
        s.f[d] = fr;
      }
      continue;
    }
    if (fr < s.f[d - 1]) {
      s.x[d] = xr;
      s.f[d] = fr;
      continue;
    }
    const bool outside = fr < s.f[d];
    const Eigen::VectorXd xc =
        outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid)) : Eigen::VectorXd(centroid + 0.5 * (s.x[d] - centroid));
    const double fc = g(xc);
    if (fc < (outside ? fr : s.f[d])) {
      s.x[d] = xc;
      s.f[d] = fc;
      continue;
    }
    for (int k = 1; k <= d; ++k) {
      s.x[k] = s.x[0] + 0.5 * (s.x[k] - s.x[0]);
      s.f[k] = g(s.x[k]);
    }
  }
  sort_simplex();

  // Compass polish around the best vertex.
  Eigen::VectorXd best = s.x[0];
  double fbest = s.f[0];
  double step = std::max(options.polish_min_step, 0.05);
  while (step >= options.polish_min_step && out.evaluations < options.max_evaluations) {
    bool improved = false;
    for (int i = 0; i < d; ++i) {
      for (double sign : {1.0, -1.0}) {
        Eigen::VectorXd trial = best;
        trial[i] += sign * step;
        const double ft = g(trial);
        if (ft < fbest - 0.1 * options.tol) {
          best = trial;
          fbest = ft;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }

  out.x = best;
  out.value = -fbest;
  out.converged = converged && std::isfinite(fbest);
  return out;
}

ModeResult find_mode(LatentModel& model, const HyperParams& init, const ModeOptions& options) {
  const Objective f = [&](const Eigen::VectorXd& v) {
    return model.log_posterior(HyperParams::from_vector(v));
  };
  const OptimResult r = maximize(f, init.to_vector(), options);
  if (!std::isfinite(r.value))
    throw Error(ErrorCode::NoConvergence, "log posterior is not finite anywhere the search went");
  return ModeResult{HyperParams::from_vector(r.x), r.value, r.converged, r.iterations, r.evaluations};
}

Eigen::MatrixXd finite_difference_hessian(const Objective& f, const Eigen::VectorXd& x, double step,
                                          double f_at_x) {
  const int d = static_cast<int>(x.size());
  Eigen::MatrixXd h(d, d);
  const double h2 = step * step;
  auto at = [&](int i, double si, int j, double sj) {
    Eigen::VectorXd y = x;
    y[i] += si * step;
    if (j >= 0) y[j] += sj * step;
    return f(y);
  };
  for (int i = 0; i < d; ++i) h(i, i) = (at(i, 1, -1, 0) - 2.0 * f_at_x + at(i, -1, -1, 0)) / h2;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const double v =
          (at(i, 1, j, 1) - at(i, 1, j, -1) - at(i, -1, j, 1) + at(i, -1, j, -1)) / (4.0 * h2);
      h(i, j) = v;
      h(j, i) = v;
    }
  return h;
}

// ---------------------------------------------------------------------------
// Grid

std::vector<double> ThetaGrid::weights() const {
  std::vector<double> w(log_weights.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::exp(log_weights[k]);
  return w;
}

ThetaGrid explore_grid(const Objective& f, const Eigen::VectorXd& mode, const GridOptions& options) {
  const int d = static_cast<int>(mode.size());
  const double f_mode = f(mode);
  if (!std::isfinite(f_mode)) throw Error(ErrorCode::InvalidParameters, "objective not finite at the mode");

  ThetaGrid grid;
  auto finish = [&](const std::vector<Eigen::VectorXd>& xs, const std::vector<double>& fs,
                    const std::vector<double>& design) {
    std::vector<double> lw(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k)
      lw[k] = std::isfinite(fs[k]) ? design[k] + fs[k] - f_mode : -kInf;
    double norm = log_sum_exp(lw);
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < xs.size(); ++k)
      if (std::exp(lw[k] - norm) >= options.prune) keep.push_back(k);
    std::vector<double> kept;
    for (auto k : keep) kept.push_back(lw[k]);
    norm = log_sum_exp(kept);
    for (auto k : keep) {
      grid.points.push_back(HyperParams::from_vector(xs[k]));
      grid.log_posteriors.push_back(fs[k]);
      grid.log_weights.push_back(lw[k] - norm);
      grid.design_log_weights.push_back(design[k]);
    }
    grid.mode_index = static_cast<int>(
        std::max_element(grid.log_posteriors.begin(), grid.log_posteriors.end()) -
        grid.log_posteriors.begin());
  };

  if (options.hessian_step <= 0.0) {
    finish({mode}, {f_mode}, {0.0});
    return grid;
  }

  const Eigen::MatrixXd precision = -finite_difference_hessian(f, mode, options.hessian_step, f_mode);
  grid.precision = precision;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (precision + precision.transpose()));
  // Curvature floor: a flat or non-concave direction gets a standard
  // deviation of at most 2 internal units.
  const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.25);
  const Eigen::MatrixXd scale = eig.eigenvectors() * lambda.cwiseInverse().cwiseSqrt().asDiagonal();

  const double r = options.radius_factor * std::sqrt(static_cast<double>(d));
  // Under a standard Gaussian the centre carries mass 1 − 1/f0² and each of
  // the 4d outer points 1/(4r²), which reproduces unit second moments.
  const double center_w = std::log(1.0 - 1.0 / (options.radius_factor * options.radius_factor));
  const double outer_w = 0.5 * r * r - std::log(4.0 * r * r);

  std::vector<Eigen::VectorXd> zs{Eigen::VectorXd::Zero(d)};
  std::vector<double> design{center_w};
  for (int i = 0; i < d; ++i)
    for (double sgn : {1.0, -1.0}) {
      Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
      z[i] = sgn * r;
      zs.push_back(z);
      design.push_back(outer_w);
    }
  const double c = r / std::numbers::sqrt2;
  for (int j = 0; j + 1 < d; j += 2)
    for (double si : {1.0, -1.0})
      for (double sj : {1.0, -1.0}) {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
        z[j] = si * c;
        z[j + 1] = sj * c;
        zs.push_back(z);
        design.push_back(outer_w);
      }
  if (d % 2 == 1 && d > 1)
    for (double s : {1.0, -1.0}) {
      Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
      z[d - 1] = s * c;
      z[0] = s * c;
      zs.push_back(z);
      design.push_back(outer_w);
    }

  std::vector<Eigen::VectorXd> xs;
  std::vector<double> fs;
  for (const auto& z : zs) {
    xs.push_back(mode + scale * z);
    fs.push_back(xs.size() == 1 ? f_mode : f(xs.back()));
  }
  finish(xs, fs, design);
  return grid;
}

ThetaGrid explore_grid(LatentModel& model, const HyperParams& mode, const GridOptions& options) {
  const Objective f = [&](const Eigen::VectorXd& v) {
    return model.log_posterior(HyperParams::from_vector(v));
  };
  return explore_grid(f, mode.to_vector(), options);
}

// ---------------------------------------------------------------------------
// Trend field

TrendPosterior trend_posterior(LatentModel& model, const ThetaGrid& grid, std::span<const int> vertices,
                               bool with_covariance) {
  const LatentLayout& layout = model.layout();
  TrendPosterior out;
  if (vertices.empty()) {
    out.vertices.resize(layout.vertices);
    std::iota(out.vertices.begin(), out.vertices.end(), 0);
  } else {
    out.vertices.assign(vertices.begin(), vertices.end());
  }
  const int n = static_cast<int>(out.vertices.size());
  for (int v : out.vertices)
    if (v < 0 || v >= layout.vertices) throw Error(ErrorCode::IndexOutOfRange, "vertex index");

  std::vector<int> idx{layout.beta0()};
  for (int v : out.vertices) idx.push_back(layout.beta(v));

  const auto w = grid.weights();
  for (int k = 0; k < grid.size(); ++k) {
    TrendComponent c;
    c.weight = w[k];
    c.mean.resize(n);
    if (model.spectral() || with_covariance) {
      // Moments of (β₀, β̃) are indexed like the layout minus the τ̃ block.
      const TrendMoments mom = model.trend_moments(grid.points[k]);
      const Eigen::MatrixXd& s = mom.covariance;
      for (int i = 0; i < n; ++i) c.mean[i] = mom.mean[idx[0]] + mom.mean[idx[i + 1]];
      c.variance.resize(n);
      for (int i = 0; i < n; ++i)
        c.variance[i] = s(0, 0) + 2.0 * s(0, idx[i + 1]) + s(idx[i + 1], idx[i + 1]);
      if (with_covariance) {
        c.covariance.resize(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            c.covariance(i, j) = s(0, 0) + s(0, idx[j + 1]) + s(idx[i + 1], 0) + s(idx[i + 1], idx[j + 1]);
      }
    } else {
      const GaussianPosterior post = model.posterior(grid.points[k]);
      for (int i = 0; i < n; ++i) c.mean[i] = post.mean[idx[0]] + post.mean[idx[i + 1]];
      // Var(β₀ + β_g) needs Cov(β₀, β_g): the β₀ column of the inverse.
      Eigen::VectorXd e0 = Eigen::VectorXd::Zero(layout.dim());
      e0[idx[0]] = 1.0;
      const Eigen::VectorXd col0 = post.factor.solve(e0);
      const Eigen::VectorXd diag = post.factor.marginal_variances(std::span<const int>(idx).subspan(1));
      c.variance.resize(n);
      for (int i = 0; i < n; ++i) c.variance[i] = col0[idx[0]] + 2.0 * col0[idx[i + 1]] + diag[i];
    }
    out.components.push_back(std::move(c));
  }
  return out;
}

TrendPosterior project_trend(const TrendPosterior& posterior, const SparseMatrix& projector) {
  std::vector<int> position(projector.cols(), -1);
  for (int i = 0; i < static_cast<int>(posterior.vertices.size()); ++i) {
    const int v = posterior.vertices[i];
    if (v < 0 || v >= projector.cols()) throw Error(ErrorCode::IndexOutOfRange, "vertex index");
    position[v] = i;
  }
  const int rows = static_cast<int>(projector.rows());
  const int n = static_cast<int>(posterior.vertices.size());
  std::vector<Eigen::Triplet<double>> t;
  for (int col = 0; col < projector.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(projector, col); it; ++it) {
      if (it.value() == 0.0) continue;
      if (position[col] < 0)
        throw Error(ErrorCode::IndexOutOfRange, "projector vertex " + std::to_string(col) + " has no trend");
      t.emplace_back(it.row(), position[col], it.value());
    }
  SparseMatrix w(rows, n);
  w.setFromTriplets(t.begin(), t.end());

  TrendPosterior out;
  out.vertices.resize(rows);
  std::iota(out.vertices.begin(), out.vertices.end(), 0);
  for (const auto& c : posterior.components) {
    TrendComponent p;
    p.weight = c.weight;
    p.mean = w * c.mean;
    if (c.covariance.rows() != n)
      throw Error(ErrorCode::InvalidInput, "projecting the trend needs the joint covariance");
    const Eigen::MatrixXd wc = w * c.covariance;
    p.covariance = wc * w.transpose();
    p.variance = p.covariance.diagonal();
    out.components.push_back(std::move(p));
  }
  return out;
}

FieldMarginals::FieldMarginals(std::vector<double> weights, Eigen::MatrixXd means, Eigen::MatrixXd sds)
    : weights_(std::move(weights)), means_(std::move(means)), sds_(std::move(sds)) {
  if (weights_.empty()) throw Error(ErrorCode::InvalidInput, "mixture needs at least one component");
  if (means_.rows() != static_cast<Eigen::Index>(weights_.size()) || sds_.rows() != means_.rows() ||
      sds_.cols() != means_.cols())
    throw Error(ErrorCode::DimensionMismatch, "mixture component shapes");
  if ((sds_.array() <= 0.0).any()) throw Error(ErrorCode::InvalidInput, "component sd must be positive");
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  for (double& w : weights_) w /= total;
}

FieldMarginals FieldMarginals::from(const TrendPosterior& posterior) {
  const int k = static_cast<int>(posterior.components.size());
  const int n = static_cast<int>(posterior.vertices.size());
  std::vector<double> w(k);
  Eigen::MatrixXd means(k, n), sds(k, n);
  for (int c = 0; c < k; ++c) {
    const auto& comp = posterior.components[c];
    w[c] = comp.weight;
    means.row(c) = comp.mean.transpose();
    sds.row(c) = comp.variance.cwiseMax(0.0).cwiseSqrt().transpose();
  }
  return FieldMarginals(std::move(w), std::move(means), std::move(sds));
}

double FieldMarginals::mean(int i) const {
  double m = 0.0;
  for (int c = 0; c < components(); ++c) m += weights_[c] * means_(c, i);
  return m;
}

double FieldMarginals::sd(int i) const {
  const double m = mean(i);
  double second = 0.0;
  for (int c = 0; c < components(); ++c)
    second += weights_[c] * (sds_(c, i) * sds_(c, i) + means_(c, i) * means_(c, i));
  return std::sqrt(std::max(second - m * m, 0.0));
}

Eigen::VectorXd FieldMarginals::mean_vector() const {
  Eigen::VectorXd v(size());
  for (int i = 0; i < size(); ++i) v[i] = mean(i);
  return v;
}

Eigen::VectorXd FieldMarginals::sd_vector() const {
  Eigen::VectorXd v(size());
  for (int i = 0; i < size(); ++i) v[i] = sd(i);
  return v;
}

double FieldMarginals::cdf(int i, double x) const {
  double p = 0.0;
  for (int c = 0; c < components(); ++c) p += weights_[c] * normal_cdf((x - means_(c, i)) / sds_(c, i));
  return p;
}

double FieldMarginals::quantile(int i, double p) const {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidParameters, "quantile level must be in (0, 1)");
  if (components() == 1) return means_(0, i) + sds_(0, i) * normal_quantile(p);
  const double m = mean(i);
  const double s = sd(i);
  double lo = m - 10.0 * s;
  double hi = m + 10.0 * s;
  for (int c = 0; c < components(); ++c) {
    lo = std::min(lo, means_(c, i) - 10.0 * sds_(c, i));
    hi = std::max(hi, means_(c, i) + 10.0 * sds_(c, i));
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = cdf(i, mid);
    if (f == p || hi - lo < 1e-14 * std::max(1.0, std::abs(mid))) return mid;
    if (f < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

FieldMarginals FieldMarginals::subset(std::span<const int> indices) const {
  const int n = static_cast<int>(indices.size());
  Eigen::MatrixXd m(components(), n), s(components(), n);
  for (int j = 0; j < n; ++j) {
    if (indices[j] < 0 || indices[j] >= size()) throw Error(ErrorCode::IndexOutOfRange, "marginal index");
    m.col(j) = means_.col(indices[j]);
    s.col(j) = sds_.col(indices[j]);
  }
  return FieldMarginals(weights_, std::move(m), std::move(s));
}

FieldMarginals field_marginals(LatentModel& model, const ThetaGrid& grid) {
  return FieldMarginals::from(trend_posterior(model, grid, {}, false));
}

// ---------------------------------------------------------------------------
// Sampling

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Eigen::MatrixXd sample_beta(const TrendPosterior& posterior, int count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorCode::InvalidParameters, "sample count must be positive");
  const int n = static_cast<int>(posterior.vertices.size());
  const int k = static_cast<int>(posterior.components.size());
  if (k == 0) throw Error(ErrorCode::InvalidInput, "trend posterior has no components");

  std::vector<Eigen::MatrixXd> roots;
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& c : posterior.components) {
    if (c.covariance.rows() != n)
      throw Error(ErrorCode::InvalidInput, "sampling needs the joint trend covariance");
    Eigen::LLT<Eigen::MatrixXd> llt(c.covariance);
    if (llt.info() == Eigen::Success) {
      roots.push_back(llt.matrixL());
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c.covariance);
      roots.push_back(eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal());
    }
    total += c.weight;
    cumulative.push_back(total);
  }

  constexpr int batch = 1024;
  Eigen::MatrixXd out(count, n);
  for (int start = 0, b = 0; start < count; start += batch, ++b) {
    const int len = std::min(batch, count - start);
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    std::uniform_real_distribution<double> unif(0.0, total);
    std::normal_distribution<double> normal;
    std::vector<int> label(len);
    for (int j = 0; j < len; ++j) {
      const double u = unif(rng);
      label[j] = static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
      label[j] = std::min(label[j], k - 1);
      while (posterior.components[label[j]].weight <= 0.0 && label[j] > 0) --label[j];
    }
    Eigen::MatrixXd z(n, len);
    for (int j = 0; j < len; ++j)
      for (int i = 0; i < n; ++i) z(i, j) = normal(rng);
    for (int c = 0; c < k; ++c) {
      std::vector<int> cols;
      for (int j = 0; j < len; ++j)
        if (label[j] == c) cols.push_back(j);
      if (cols.empty()) continue;
      Eigen::MatrixXd zc(n, static_cast<Eigen::Index>(cols.size()));
      for (std::size_t q = 0; q < cols.size(); ++q) zc.col(q) = z.col(cols[q]);
      const Eigen::MatrixXd x = (roots[c] * zc).colwise() + posterior.components[c].mean;
      for (std::size_t q = 0; q < cols.size(); ++q) out.row(start + cols[q]) = x.col(q).transpose();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hyperparameter summaries

std::vector<HyperSummary> hyper_posteriors(const ThetaGrid& grid) {
  if (grid.size() == 0) throw Error(ErrorCode::InvalidInput, "empty grid");
  const auto w = grid.weights();
  const double log_sqrt8 = 0.5 * std::log(8.0);
  const double log_4pi = std::log(4.0 * std::numbers::pi);

  struct Transform {
    const char* name;
    double (*scale)(const HyperParams&, double, double);  // transformed scale, linear in θ
    double (*back)(double);
  };
  auto exp_back = +[](double s) { return std::exp(s); };
  auto phi_back = +[](double s) { return phi_from_internal(s); };
  const Transform transforms[] = {
      {"noise_variance", +[](const HyperParams& h, double, double) { return -h.log_prec_eps; }, exp_back},
      {"phi", +[](const HyperParams& h, double, double) { return h.phi_internal; }, phi_back},
      {"sigma2_beta",
       +[](const HyperParams& h, double, double l4) { return -l4 - 2.0 * h.log_kappa_beta - 2.0 * h.log_tau_beta; },
       exp_back},
      {"range_beta", +[](const HyperParams& h, double l8, double) { return l8 - h.log_kappa_beta; }, exp_back},
      {"sigma2_xi",
       +[](const HyperParams& h, double, double l4) { return -l4 - 2.0 * h.log_kappa_xi - 2.0 * h.log_tau_xi; },
       exp_back},
      {"range_xi", +[](const HyperParams& h, double l8, double) { return l8 - h.log_kappa_xi; }, exp_back},
  };

  const double z95 = normal_quantile(0.95);
  std::vector<HyperSummary> out;
  for (const auto& t : transforms) {
    double m_nat = 0, s2_nat = 0, m_t = 0, s2_t = 0;
    for (int k = 0; k < grid.size(); ++k) {
      const double v = t.scale(grid.points[k], log_sqrt8, log_4pi);
      m_t += w[k] * v;
      m_nat += w[k] * t.back(v);
    }
    for (int k = 0; k < grid.size(); ++k) {
      const double v = t.scale(grid.points[k], log_sqrt8, log_4pi);
      s2_t += w[k] * (v - m_t) * (v - m_t);
      s2_nat += w[k] * (t.back(v) - m_nat) * (t.back(v) - m_nat);
    }
    const double s_t = std::sqrt(s2_t);
    out.push_back(HyperSummary{t.name, m_nat, std::sqrt(s2_nat), t.back(m_t - z95 * s_t), t.back(m_t),
                               t.back(m_t + z95 * s_t)});
  }
  return out;
}

}  // namespace sttrend
