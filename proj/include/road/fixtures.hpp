#pragma once

// Randomized fixtures shared by the validation CLI and the test suite.

#include <random>

#include "road/mdp.hpp"
#include "road/theory.hpp"

namespace road {

inline Mdp random_mdp(int n_states, int n_actions, double discount, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  std::vector<std::vector<Eigen::VectorXd>> p(
      static_cast<std::size_t>(n_states),
      std::vector<Eigen::VectorXd>(static_cast<std::size_t>(n_actions)));
  Eigen::MatrixXd r(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      Eigen::VectorXd row(n_states);
      for (int s2 = 0; s2 < n_states; ++s2) row(s2) = unif(rng);
      row /= row.sum();
      p[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] = row;
      r(s, a) = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    }
  }
  Eigen::VectorXd mu(n_states);
  for (int s = 0; s < n_states; ++s) mu(s) = unif(rng);
  mu /= mu.sum();
  return Mdp(std::move(p), std::move(r), std::move(mu), discount,
             std::vector<bool>(static_cast<std::size_t>(n_states), false));
}

inline Policy random_policy(int n_states, int n_actions, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  Policy pi;
  pi.probs.resize(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) pi.probs(s, a) = unif(rng);
    pi.probs.row(s) /= pi.probs.row(s).sum();
  }
  return pi;
}

// Full-column-rank feature matrix with p < S*A columns.
inline Eigen::MatrixXd random_features(int n_pairs, int n_features, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (true) {
    Eigen::MatrixXd phi(n_pairs, n_features);
    for (int i = 0; i < n_pairs; ++i) {
      for (int j = 0; j < n_features; ++j) phi(i, j) = gauss(rng);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
    qr.setThreshold(1e-10);
    if (qr.rank() == n_features) return phi;
  }
}

struct GradientFixture {
  Mdp mdp;
  Eigen::MatrixXd phi;
  Eigen::VectorXd targets;
  OccupancyMeasure d_off;
  OccupancyMeasure d_on;
  double m = 0.5;
  double beta = 1.0;
};

inline GradientFixture random_gradient_fixture(Rng& rng) {
  std::uniform_int_distribution<int> pick_s(3, 6);
  std::uniform_int_distribution<int> pick_a(2, 3);
  const int S = pick_s(rng);
  const int A = pick_a(rng);
  const int n_pairs = S * A;
  std::uniform_int_distribution<int> pick_p(2, n_pairs - 2);

  GradientFixture fx{random_mdp(S, A, 0.9, rng),
                     random_features(n_pairs, pick_p(rng), rng),
                     Eigen::VectorXd(n_pairs),
                     {},
                     {},
                     std::uniform_real_distribution<double>(0.2, 0.8)(rng),
                     std::uniform_real_distribution<double>(0.5, 2.0)(rng)};
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < n_pairs; ++i) fx.targets(i) = gauss(rng);
  fx.d_off = exact_occupancy(fx.mdp, random_policy(S, A, rng));
  fx.d_on = exact_occupancy(fx.mdp, random_policy(S, A, rng));
  return fx;
}

}  // namespace road
