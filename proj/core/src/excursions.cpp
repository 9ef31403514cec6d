#include "sttrend/excursions.hpp"

#include <algorithm>
#include <cmath>

#include "sttrend/error.hpp"

namespace sttrend {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::InvalidParameters, "alpha must be in (0, 1)");
}

BandResult quantile_band(const FieldMarginals& marginals, double rho, double alpha, double u,
                         BandMethod method) {
  BandResult b;
  b.method = method;
  b.alpha = alpha;
  b.band_rho = rho;
  b.level = u;
  const int n = marginals.size();
  b.lower.resize(n);
  b.upper.resize(n);
  b.avoid.resize(n);
  for (int i = 0; i < n; ++i) {
    b.lower[i] = marginals.quantile(i, rho);
    b.upper[i] = marginals.quantile(i, 1.0 - rho);
    b.avoid[i] = b.upper[i] < u || b.lower[i] > u;
  }
  return b;
}

}  // namespace

std::string_view to_string(BandMethod m) noexcept {
  switch (m) {
    case BandMethod::Pointwise: return "pointwise";
    case BandMethod::Simultaneous: return "simultaneous";
    case BandMethod::Bonferroni: return "bonferroni";
  }
  return "unknown";
}

BandResult pointwise_band(const FieldMarginals& marginals, double alpha, double u) {
  require_alpha(alpha);
  return quantile_band(marginals, 0.5 * alpha, alpha, u, BandMethod::Pointwise);
}

BandResult bonferroni_band(const FieldMarginals& marginals, double alpha, int n_cells, double u) {
  require_alpha(alpha);
  if (n_cells < 1) throw Error(ErrorCode::InvalidParameters, "n_cells must be >= 1");
  return quantile_band(marginals, 0.5 * alpha / n_cells, alpha, u, BandMethod::Bonferroni);
}

BandResult simultaneous_band(const Eigen::MatrixXd& samples, const FieldMarginals& marginals, double alpha,
                             double u, const SimultaneousOptions& options) {
  require_alpha(alpha);
  const int n = static_cast<int>(samples.rows());
  const int g = marginals.size();
  if (samples.cols() != g) throw Error(ErrorCode::DimensionMismatch, "sample columns differ from locations");
  if (n < options.min_samples || n * options.tol * options.tol < alpha * (1.0 - alpha))
    throw Error(ErrorCode::InsufficientSamples,
                std::to_string(n) + " samples cannot resolve coverage to " + std::to_string(options.tol));

  // A draw lies inside the ρ-band everywhere iff its smallest tail
  // probability over locations exceeds ρ.
  std::vector<double> tail(n, 1.0);
  for (int s = 0; s < g; ++s)
    for (int k = 0; k < n; ++k) {
      const double f = marginals.cdf(s, samples(k, s));
      tail[k] = std::min(tail[k], std::min(f, 1.0 - f));
    }
  std::sort(tail.begin(), tail.end());
  auto coverage = [&](double rho) {
    const auto above = tail.end() - std::upper_bound(tail.begin(), tail.end(), rho);
    return static_cast<double>(above) / n;
  };

  const double target = 1.0 - alpha;
  double hi = 0.5 * alpha;
  double rho = hi;
  // One location: the joint band is the pointwise band.
  if (g > 1 && coverage(hi) < target) {
    double lo = alpha / (20.0 * g);
    int widen = 0;
    while (coverage(lo) < target) {
      if (++widen > 3) throw Error(ErrorCode::NoConvergence, "band level bracket does not reach the target coverage");
      lo /= 10.0;
    }
    for (int it = 0; it < 200 && hi / lo - 1.0 > 1e-12; ++it) {
      const double mid = std::sqrt(lo * hi);
      if (coverage(mid) >= target)
        lo = mid;
      else
        hi = mid;
    }
    rho = lo;
  }

  BandResult b = quantile_band(marginals, rho, alpha, u, BandMethod::Simultaneous);
  b.coverage = coverage(rho);
  b.coverage_se = std::sqrt(b.coverage * (1.0 - b.coverage) / n);
  return b;
}

std::vector<int> avoidance_set(const BandResult& band, double u) {
  std::vector<int> out;
  for (int i = 0; i < band.size(); ++i)
    if (band.upper[i] < u || band.lower[i] > u) out.push_back(i);
  return out;
}

BandResult project_band(const BandResult& band, const SparseMatrix& projector,
                        const std::vector<int>& vertex_index) {
  BandResult out = band;
  const int cells = static_cast<int>(projector.rows());
  out.lower = Eigen::VectorXd::Zero(cells);
  out.upper = Eigen::VectorXd::Zero(cells);
  out.avoid.assign(cells, false);
  for (int col = 0; col < projector.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(projector, col); it; ++it) {
      if (it.value() == 0.0) continue;
      const int pos = col < static_cast<int>(vertex_index.size()) ? vertex_index[col] : -1;
      if (pos < 0 || pos >= band.size())
        throw Error(ErrorCode::IndexOutOfRange, "projector vertex " + std::to_string(col) + " has no band value");
      out.lower[it.row()] += it.value() * band.lower[pos];
      out.upper[it.row()] += it.value() * band.upper[pos];
    }
  for (int i = 0; i < cells; ++i) out.avoid[i] = out.upper[i] < band.level || out.lower[i] > band.level;
  return out;
}

}  // namespace sttrend
