#include "sttrend/spde.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sttrend/error.hpp"

namespace sttrend {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw Error(ErrorCode::NonPositiveParameter, std::string(name) + " must be positive and finite");
}

}  // namespace

double matern_corr(double dist, double kappa) {
  if (dist <= 0.0) return 1.0;
  const double x = kappa * dist;
  // x K₁(x) underflows to zero far in the tail; std::cyl_bessel_k reports a
  // range error there instead of returning 0.
  if (x > 700.0) return 0.0;
  return x * std::cyl_bessel_k(1.0, x);
}

double matern_cov(double dist, const MaternParams& p) {
  return p.sigma2 * matern_corr(dist, p.kappa);
}

double sigma2_from(double kappa, double tau) {
  require_positive(kappa, "kappa");
  require_positive(tau, "tau");
  return 1.0 / (4.0 * std::numbers::pi * kappa * kappa * tau * tau);
}

double tau_from(double kappa, double sigma2) {
  require_positive(kappa, "kappa");
  require_positive(sigma2, "sigma2");
  return 1.0 / (2.0 * kappa * std::sqrt(std::numbers::pi * sigma2));
}

double range_from(double kappa) {
  require_positive(kappa, "kappa");
  return std::sqrt(8.0 * MaternParams::nu) / kappa;
}

double kappa_from(double range_rho) {
  require_positive(range_rho, "range");
  return std::sqrt(8.0 * MaternParams::nu) / range_rho;
}

SpdeBasis SpdeBasis::build(const SparseSymmetric& mass, const SparseSymmetric& stiffness) {
  if (mass.dim() != stiffness.dim())
    throw Error(ErrorCode::DimensionMismatch, "mass and stiffness dimensions differ");
  const int n = mass.dim();
  Eigen::VectorXd inv_c(n);
  for (int i = 0; i < n; ++i) {
    const double c = mass.coeff(i, i);
    require_positive(c, "lumped mass entry");
    inv_c[i] = 1.0 / c;
  }
  const SparseMatrix g = stiffness.full();
  const SparseMatrix g2 = (g * inv_c.asDiagonal() * g).pruned(0.0, 0.0);

  // Put all three on the union pattern so any combination keeps one pattern.
  std::vector<Triplet> zeros;
  for (const auto& t : mass.entries()) zeros.emplace_back(t.row(), t.col(), 0.0);
  for (const auto& t : stiffness.entries()) zeros.emplace_back(t.row(), t.col(), 0.0);
  const auto g2_sym = SparseSymmetric::from_matrix(g2);
  for (const auto& t : g2_sym.entries()) zeros.emplace_back(t.row(), t.col(), 0.0);

  auto expand = [&](const SparseSymmetric& m) {
    std::vector<Triplet> all = zeros;
    const auto e = m.entries();
    all.insert(all.end(), e.begin(), e.end());
    return SparseSymmetric::from_triplets(n, all);
  };
  return SpdeBasis{expand(mass), expand(stiffness), expand(g2_sym)};
}

SparseSymmetric SpdeBasis::precision(double kappa, double tau) const {
  require_positive(kappa, "kappa");
  require_positive(tau, "tau");
  const double t2 = tau * tau;
  const double k2 = kappa * kappa;
  SparseMatrix q = t2 * (k2 * k2) * mass.lower() + (t2 * 2.0 * k2) * stiffness.lower() +
                   t2 * stiffness2.lower();
  return SparseSymmetric::from_matrix(q);
}

SparseSymmetric spde_precision(double kappa, double tau, const SparseSymmetric& mass,
                               const SparseSymmetric& stiffness) {
  return SpdeBasis::build(mass, stiffness).precision(kappa, tau);
}

}  // namespace sttrend
