#pragma once

// Numerical validation of the bi-level machinery on linear-feature
// Q-functions: weighted least-squares fitted-Q solves, the exact analytic
// gradient of the outer objective with respect to the mixing ratio, and
// Monte Carlo checks of the overestimation-bias / signal-to-noise theory.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "road/agent.hpp"
#include "road/mdp.hpp"

namespace road {

// Feature matrix over flattened (s,a) pairs, p < |S|*|A| columns.
struct LinearQ {
  Eigen::MatrixXd features;  // (S*A, p), full column rank
  Eigen::VectorXd weights;   // (p)

  static LinearQ from_features(Eigen::MatrixXd phi) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
    qr.setThreshold(1e-10);
    if (qr.rank() < phi.cols()) {
      throw std::invalid_argument("feature matrix is rank deficient");
    }
    LinearQ out;
    out.weights = Eigen::VectorXd::Zero(phi.cols());
    out.features = std::move(phi);
    return out;
  }
};

inline Eigen::Index flat_index(int s, int a, int n_actions) {
  return static_cast<Eigen::Index>(s) * n_actions + a;
}

inline Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, int n_states, int n_actions) {
  Eigen::MatrixXd out(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) out(s, a) = v(flat_index(s, a, n_actions));
  }
  return out;
}

inline Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
  Eigen::VectorXd out(m.rows() * m.cols());
  for (int s = 0; s < m.rows(); ++s) {
    for (int a = 0; a < m.cols(); ++a) out(flat_index(s, a, static_cast<int>(m.cols()))) = m(s, a);
  }
  return out;
}

// w* = (Phi' D_m Phi + ridge I)^{-1} Phi' D_m y.
inline Eigen::VectorXd weighted_fqi_solve(const Eigen::MatrixXd& phi,
                                          const Eigen::VectorXd& targets,
                                          const Eigen::VectorXd& mix_weights, double ridge) {
  if (ridge < 0.0) throw std::invalid_argument("ridge must be >= 0");
  if (phi.rows() != targets.size() || phi.rows() != mix_weights.size()) {
    throw std::invalid_argument("weighted_fqi_solve shape mismatch");
  }
  if (mix_weights.minCoeff() < 0.0) {
    throw std::invalid_argument("mix weights must be nonnegative");
  }
  const Eigen::MatrixXd weighted = mix_weights.asDiagonal() * phi;
  const Eigen::MatrixXd normal =
      phi.transpose() * weighted +
      ridge * Eigen::MatrixXd::Identity(phi.cols(), phi.cols());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  const double d_max = ldlt.vectorD().cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || ldlt.isNegative() ||
      ldlt.vectorD().minCoeff() <= 1e-12 * d_max) {
    throw std::runtime_error(
        "singular weighted normal equations; increase ridge regularization");
  }
  const Eigen::VectorXd w = ldlt.solve(phi.transpose() * (mix_weights.asDiagonal() * targets));
  if (!w.allFinite() ||
      (normal * w - phi.transpose() * (mix_weights.asDiagonal() * targets)).norm() >
          1e-6 * std::max(1.0, targets.norm())) {
    throw std::runtime_error(
        "singular weighted normal equations; increase ridge regularization");
  }
  return w;
}

// J_out = sum_{s,a} d^{softmax(beta f)}(s,a) f(s,a) with f = Phi w.
inline double outer_objective(const Mdp& mdp, const Eigen::MatrixXd& phi,
                              const Eigen::VectorXd& w, double beta) {
  const Eigen::MatrixXd f = unflatten(phi * w, mdp.n_states(), mdp.n_actions());
  const Policy pi = softmax_policy(f, beta);
  const OccupancyMeasure occ = exact_occupancy(mdp, pi);
  return (occ.density.array() * f.array()).sum();
}

namespace detail {

// Exact gradient of J_out with respect to the flattened Q values, through
// both the direct term and the softmax-occupancy dependence. Uses the
// adjoint of the occupancy linear system, no policy-gradient approximation.
inline Eigen::VectorXd outer_objective_grad_f(const Mdp& mdp, const Eigen::MatrixXd& f,
                                              double beta) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  const Policy pi = softmax_policy(f, beta);
  const Eigen::MatrixXd P_pi = policy_transition_matrix(mdp, pi);
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(S, S) - mdp.discount() * P_pi;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu_t(M.transpose());
  const Eigen::VectorXd d_state = (1.0 - mdp.discount()) * lu_t.solve(mdp.initial_dist());

  Eigen::VectorXd v(S);  // v(s) = E_{a~pi}[f(s,a)]
  for (int s = 0; s < S; ++s) v(s) = pi.probs.row(s).dot(f.row(s));

  // Adjoint for the occupancy dependence: lambda = (I - gamma P_pi)^{-1} v.
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  const Eigen::VectorXd lambda = lu.solve(v);

  // (P lambda)(s,a) = E_{s'|s,a}[lambda(s')].
  Eigen::MatrixXd p_lambda(S, A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) p_lambda(s, a) = mdp.next_state_dist(s, a).dot(lambda);
  }

  Eigen::VectorXd grad(S * A);
  for (int s = 0; s < S; ++s) {
    const double pl_mean = pi.probs.row(s).dot(p_lambda.row(s));
    for (int a = 0; a < A; ++a) {
      const double direct = pi.probs(s, a);
      const double through_policy = beta * pi.probs(s, a) * (f(s, a) - v(s));
      const double through_occupancy =
          mdp.discount() * beta * pi.probs(s, a) * (p_lambda(s, a) - pl_mean);
      grad(flat_index(s, a, A)) =
          d_state(s) * (direct + through_policy + through_occupancy);
    }
  }
  return grad;
}

}  // namespace detail

// Exact dJ_out/dm for the linear mixing d_m = m d_off + (1-m) d_on via the
// implicit-function derivative of the ridge-regularized weighted solve
// composed with the exact softmax-occupancy gradient.
inline double outer_gradient_m(const Mdp& mdp, const Eigen::MatrixXd& phi,
                               const Eigen::VectorXd& targets,
                               const OccupancyMeasure& d_off, const OccupancyMeasure& d_on,
                               double m, double beta, double ridge) {
  if (m <= 0.0 || m >= 1.0) throw std::invalid_argument("m must lie in (0,1)");
  const Eigen::VectorXd off = flatten(d_off.density);
  const Eigen::VectorXd on = flatten(d_on.density);
  const Eigen::VectorXd d_m = m * off + (1.0 - m) * on;
  if (d_m.minCoeff() <= 0.0 && ridge <= 0.0) {
    throw std::invalid_argument("d_m has zero support; use ridge > 0");
  }

  const Eigen::VectorXd w = weighted_fqi_solve(phi, targets, d_m, ridge);

  // dw/dm = A^{-1} Phi' diag(d_off - d_on) (y - Phi w), A = Phi' D_m Phi + ridge I.
  const Eigen::VectorXd d_prime = off - on;
  const Eigen::MatrixXd normal =
      phi.transpose() * (d_m.asDiagonal() * phi) +
      ridge * Eigen::MatrixXd::Identity(phi.cols(), phi.cols());
  const Eigen::VectorXd residual = targets - phi * w;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  const Eigen::VectorXd dw_dm =
      ldlt.solve(phi.transpose() * (d_prime.asDiagonal() * residual));

  const Eigen::MatrixXd f = unflatten(phi * w, mdp.n_states(), mdp.n_actions());
  const Eigen::VectorXd grad_f = detail::outer_objective_grad_f(mdp, f, beta);
  return grad_f.dot(phi * dw_dm);
}

// --- Overestimation-bias Monte Carlo ---------------------------------------

struct NoiseModel {
  Eigen::MatrixXd kernel;  // covariance over actions, symmetric PSD
  double amplitude = 1.0;  // scales the covariance

  void validate() const {
    if (amplitude < 0.0) throw std::invalid_argument("amplitude must be >= 0");
    if (kernel.rows() != kernel.cols()) throw std::invalid_argument("kernel must be square");
    if ((kernel - kernel.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw std::invalid_argument("kernel must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kernel);
    if (es.eigenvalues().minCoeff() < -1e-10) {
      throw std::invalid_argument("kernel must be positive semidefinite");
    }
  }
};

struct BiasReport {
  double empirical_bias = 0.0;
  double empirical_bias_se = 0.0;
  double predicted_bias = 0.0;
  double empirical_true_advantage = 0.0;
  double empirical_true_advantage_se = 0.0;
  double predicted_true_advantage = 0.0;
  double snr = 0.0;
  bool policy_clipped = false;  // perturbed policy left the simplex and was renormalized
};

namespace detail {

// Square root of a PSD kernel via eigendecomposition, tiny negatives clamped.
inline Eigen::MatrixXd kernel_sqrt(const Eigen::MatrixXd& kernel) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kernel);
  const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clamped.cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace detail

// Policy-gradient perturbation pi(a) ~ pi_k(a) (1 + beta (fhat(a) - Vhat)),
// clipped to the simplex when beta is too large.
inline BiasReport bias_monte_carlo(const Eigen::VectorXd& f_true, const NoiseModel& noise,
                                   const Eigen::VectorXd& base_policy, double beta_pg,
                                   int n_draws, Rng& rng) {
  noise.validate();
  const Eigen::Index A = f_true.size();
  if (base_policy.size() != A || noise.kernel.rows() != A) {
    throw std::invalid_argument("bias_monte_carlo shape mismatch");
  }
  if (n_draws < 1) throw std::invalid_argument("n_draws must be >= 1");
  const Eigen::MatrixXd root = detail::kernel_sqrt(noise.amplitude * noise.kernel);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double v_true = base_policy.dot(f_true);
  double bias_sum = 0.0, bias_sq = 0.0;
  double adv_sum = 0.0, adv_sq = 0.0;
  double var_eps_sum = 0.0;
  bool clipped = false;

  for (int i = 0; i < n_draws; ++i) {
    Eigen::VectorXd z(A);
    for (Eigen::Index a = 0; a < A; ++a) z(a) = gauss(rng);
    const Eigen::VectorXd eps = root * z;
    const Eigen::VectorXd f_hat = f_true + eps;
    const double v_hat = base_policy.dot(f_hat);

    Eigen::VectorXd pi =
        base_policy.array() * (1.0 + beta_pg * (f_hat.array() - v_hat));
    if (pi.minCoeff() < 0.0) {
      pi = pi.cwiseMax(0.0);
      clipped = true;
    }
    pi /= pi.sum();

    const double bias = pi.dot(eps);
    bias_sum += bias;
    bias_sq += bias * bias;

    const double adv = pi.dot(f_true) - v_true;
    adv_sum += adv;
    adv_sq += adv * adv;

    const double mean_eps = base_policy.dot(eps);
    var_eps_sum += base_policy.dot(eps.cwiseProduct(eps)) - mean_eps * mean_eps;
  }

  const double n = static_cast<double>(n_draws);
  BiasReport report;
  report.empirical_bias = bias_sum / n;
  report.empirical_bias_se =
      std::sqrt(std::max(0.0, bias_sq / n - report.empirical_bias * report.empirical_bias) / n);
  report.predicted_bias = beta_pg * var_eps_sum / n;
  report.empirical_true_advantage = adv_sum / n;
  report.empirical_true_advantage_se = std::sqrt(
      std::max(0.0, adv_sq / n -
                        report.empirical_true_advantage * report.empirical_true_advantage) /
      n);
  const double var_f = base_policy.dot(f_true.cwiseProduct(f_true)) - v_true * v_true;
  report.predicted_true_advantage = beta_pg * var_f;
  report.snr = report.empirical_true_advantage != 0.0
                   ? report.empirical_bias / report.empirical_true_advantage
                   : std::numeric_limits<double>::infinity();
  report.policy_clipped = clipped;
  return report;
}

// lambda = ||values|| / ||central-difference gradient|| on a 1-D grid.
// A flat function has zero gradient norm and reports the +inf sentinel.
inline double characteristic_length(const Eigen::VectorXd& values,
                                    const Eigen::VectorXd& grid) {
  if (values.size() < 3 || values.size() != grid.size()) {
    throw std::invalid_argument("characteristic_length needs a grid of >= 3 points");
  }
  double val_sq = 0.0;
  double grad_sq = 0.0;
  for (Eigen::Index i = 1; i + 1 < values.size(); ++i) {
    const double g = (values(i + 1) - values(i - 1)) / (grid(i + 1) - grid(i - 1));
    val_sq += values(i) * values(i);
    grad_sq += g * g;
  }
  if (grad_sq == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(val_sq / grad_sq);
}

// Characteristic length of a random field from its covariance kernel on the
// grid: sqrt(E[eps^2] / E[|grad eps|^2]) with central-difference variances.
inline double noise_characteristic_length(const NoiseModel& noise,
                                          const Eigen::VectorXd& grid) {
  const Eigen::MatrixXd& K = noise.kernel;
  if (K.rows() != grid.size() || grid.size() < 3) {
    throw std::invalid_argument("kernel/grid size mismatch");
  }
  double amp_sq = 0.0;
  double grad_sq = 0.0;
  for (Eigen::Index i = 1; i + 1 < grid.size(); ++i) {
    const double h = grid(i + 1) - grid(i - 1);
    amp_sq += K(i, i);
    grad_sq += (K(i + 1, i + 1) + K(i - 1, i - 1) - 2.0 * K(i + 1, i - 1)) / (h * h);
  }
  if (grad_sq <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(amp_sq / grad_sq);
}

// rho ~= (E[eps^2] / ||f||^2) * (lambda_f / lambda_eps)^2, amplitudes taken
// as mean squares over the grid. Infinite lambda_eps (flat noise) gives 0;
// infinite lambda_f (flat signal) gives +inf.
inline double snr_prediction(const Eigen::VectorXd& f_true, const NoiseModel& noise,
                             const Eigen::VectorXd& grid) {
  noise.validate();
  const double lambda_f = characteristic_length(f_true, grid);
  const double lambda_eps = noise_characteristic_length(noise, grid);
  const double eps_sq = noise.amplitude * noise.kernel.diagonal().mean();
  if (eps_sq == 0.0) return 0.0;
  if (std::isinf(lambda_eps)) return 0.0;
  if (std::isinf(lambda_f)) return std::numeric_limits<double>::infinity();
  const double f_sq = f_true.squaredNorm() / static_cast<double>(f_true.size());
  return (eps_sq / f_sq) * (lambda_f / lambda_eps) * (lambda_f / lambda_eps);
}

}  // namespace road
