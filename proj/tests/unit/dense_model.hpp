#pragma once

// Dense assembly of the latent model for random small instances, used as an
// oracle for the sparse and spectral evaluation paths.

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "sttrend/mesh.hpp"
#include "sttrend/model.hpp"

namespace oracle {

using namespace sttrend;

struct Instance {
  Mesh mesh;
  ObservationPanel panel;
  HyperParams theta;
};

inline Instance random_instance(std::mt19937_64& rng, bool complete) {
  std::uniform_int_distribution<int> cells(1, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z;
  Instance in;
  const int nx = cells(rng), ny = nx == 3 ? 1 : cells(rng) % 2 + 1;  // G = (nx+1)(ny+1) <= 8
  in.mesh = regular_mesh(0.0, 2.0, 0.0, 1.5, nx, ny);
  const int n = std::uniform_int_distribution<int>(1, 8)(rng);
  const int m = std::uniform_int_distribution<int>(1, 5)(rng);
  std::vector<Point> locs;
  for (int i = 0; i < n; ++i) locs.push_back({2.0 * u(rng), 1.5 * u(rng)});
  std::vector<double> times;
  for (int t = 0; t < m; ++t) times.push_back(-0.3 + 0.25 * t);
  Eigen::MatrixXd y(n, m);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < m; ++t) y(i, t) = z(rng);
  in.panel = ObservationPanel::complete(locs, times, y);
  if (!complete)
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < m; ++t)
        if (u(rng) < 0.25 && in.panel.observation_count() > 1) in.panel.observed(i, t) = false;
  Eigen::VectorXd v(HyperParams::size);
  for (int k = 0; k < HyperParams::size; ++k) v[k] = 0.6 * z(rng);
  in.theta = HyperParams::from_vector(v);
  return in;
}

// Independent dense assembly of the model.
struct Dense {
  Eigen::MatrixXd q_prior;
  Eigen::MatrixXd a;
  Eigen::VectorXd y;
};

inline Dense dense_model(const Instance& in) {
  const int g = in.mesh.vertex_count();
  const int m = in.panel.time_count();
  const int n = in.panel.location_count();
  const FemMatrices fem = fem_matrices(in.mesh);
  const Eigen::MatrixXd c = fem.mass.dense(), s = fem.stiffness.dense();
  auto q_spde = [&](double kappa, double tau) {
    return Eigen::MatrixXd(tau * tau * (std::pow(kappa, 4) * c + 2 * kappa * kappa * s + s * c.inverse() * s));
  };
  const double phi = in.theta.phi();
  const Eigen::MatrixXd q_ar = oracle::ar1_covariance(phi, m).inverse();

  Dense d;
  const int dim = 1 + g + g * m;
  d.q_prior = Eigen::MatrixXd::Zero(dim, dim);
  d.q_prior(0, 0) = 1e-6;
  d.q_prior.block(1, 1, g, g) = q_spde(in.theta.kappa_beta(), in.theta.tau_beta());
  d.q_prior.block(1 + g, 1 + g, g * m, g * m) = oracle::kron(q_ar, q_spde(in.theta.kappa_xi(), in.theta.tau_xi()));

  const Eigen::MatrixXd psi(basis_projector(in.mesh, in.panel.locations).matrix);
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> ys;
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < m; ++t) {
      if (!in.panel.observed(i, t)) continue;
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(dim);
      const double time = in.panel.times[t];
      r[0] = time;
      r.segment(1, g) = time * psi.row(i);
      r.segment(1 + g + t * g, g) = psi.row(i);
      rows.push_back(r);
      ys.push_back(in.panel.values(i, t));
    }
  d.a.resize(static_cast<int>(rows.size()), dim);
  for (std::size_t k = 0; k < rows.size(); ++k) d.a.row(static_cast<int>(k)) = rows[k];
  d.y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<int>(ys.size()));
  return d;
}

inline double dense_log_lik(const Instance& in, const Dense& d) {
  const double noise = 1.0 / in.theta.noise_precision();
  const Eigen::MatrixXd cov =
      d.a * d.q_prior.inverse() * d.a.transpose() + noise * Eigen::MatrixXd::Identity(d.y.size(), d.y.size());
  return oracle::mvn_log_density(d.y, Eigen::VectorXd::Zero(d.y.size()), cov);
}

}  // namespace oracle
