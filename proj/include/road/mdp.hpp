#pragma once

// Finite tabular MDPs with exact dynamic-programming utilities:
// linear-solve policy evaluation, discounted occupancy measures,
// Bellman backups, and sampling rollouts.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace road {

using Rng = std::mt19937_64;

struct Transition {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  int next_state = 0;
  bool done = false;
};

// Row-stochastic policy matrix, probs(s, a).
struct Policy {
  Eigen::MatrixXd probs;

  int n_states() const { return static_cast<int>(probs.rows()); }
  int n_actions() const { return static_cast<int>(probs.cols()); }
};

// Normalized discounted state-action visitation, sums to 1.
struct OccupancyMeasure {
  Eigen::MatrixXd density;  // (s, a)
};

struct Trajectory {
  std::vector<Transition> steps;
  double discounted_return = 0.0;
};

class Mdp {
 public:
  // transition[s][a] is a distribution over next states.
  Mdp(std::vector<std::vector<Eigen::VectorXd>> transition, Eigen::MatrixXd reward,
      Eigen::VectorXd initial_dist, double discount, std::vector<bool> terminal)
      : transition_(std::move(transition)),
        reward_(std::move(reward)),
        initial_dist_(std::move(initial_dist)),
        discount_(discount),
        terminal_(std::move(terminal)) {
    validate();
  }

  int n_states() const { return static_cast<int>(transition_.size()); }
  int n_actions() const { return static_cast<int>(transition_.front().size()); }
  double discount() const { return discount_; }
  const Eigen::VectorXd& initial_dist() const { return initial_dist_; }
  const Eigen::MatrixXd& reward() const { return reward_; }
  bool is_terminal(int s) const { return terminal_.at(static_cast<std::size_t>(s)); }
  const Eigen::VectorXd& next_state_dist(int s, int a) const {
    check_indices(s, a);
    return transition_[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
  }

  void check_indices(int s, int a) const {
    if (s < 0 || s >= n_states() || a < 0 || a >= n_actions()) {
      throw std::out_of_range("state/action index out of range");
    }
  }

 private:
  void validate() const {
    if (transition_.empty() || transition_.front().empty()) {
      throw std::invalid_argument("empty transition tensor");
    }
    if (discount_ <= 0.0 || discount_ >= 1.0) {
      throw std::invalid_argument("discount must lie in (0,1)");
    }
    const int S = n_states();
    const int A = n_actions();
    if (reward_.rows() != S || reward_.cols() != A) {
      throw std::invalid_argument("reward shape mismatch");
    }
    if (initial_dist_.size() != S || static_cast<int>(terminal_.size()) != S) {
      throw std::invalid_argument("initial_dist/terminal shape mismatch");
    }
    if (std::abs(initial_dist_.sum() - 1.0) > 1e-12 || initial_dist_.minCoeff() < 0.0) {
      throw std::invalid_argument("initial_dist is not a distribution");
    }
    for (int s = 0; s < S; ++s) {
      if (static_cast<int>(transition_[s].size()) != A) {
        throw std::invalid_argument("ragged transition tensor");
      }
      for (int a = 0; a < A; ++a) {
        const auto& row = transition_[s][a];
        if (row.size() != S) throw std::invalid_argument("transition row length mismatch");
        if (std::abs(row.sum() - 1.0) > 1e-12 || row.minCoeff() < 0.0) {
          throw std::invalid_argument("transition row is not a distribution");
        }
        if (terminal_[static_cast<std::size_t>(s)]) {
          if (std::abs(row(s) - 1.0) > 1e-12 || reward_(s, a) != 0.0) {
            throw std::invalid_argument("terminal states must self-loop with reward 0");
          }
        }
      }
    }
  }

  std::vector<std::vector<Eigen::VectorXd>> transition_;
  Eigen::MatrixXd reward_;
  Eigen::VectorXd initial_dist_;
  double discount_;
  std::vector<bool> terminal_;
};

// Deterministic corridor: action 0 advances one cell, action 1 advances two
// (clamped at the terminal cell). Arrival at the terminal cell pays
// goal_reward, every other step pays step_reward.
inline Mdp build_chain_mdp(int n_cells, double step_reward, double goal_reward,
                           double discount) {
  if (n_cells < 3) throw std::invalid_argument("chain needs at least 3 cells");
  if (discount <= 0.0 || discount >= 1.0) {
    throw std::invalid_argument("discount must lie in (0,1)");
  }
  const int S = n_cells;
  const int A = 2;
  const int goal = n_cells - 1;
  std::vector<std::vector<Eigen::VectorXd>> p(
      static_cast<std::size_t>(S),
      std::vector<Eigen::VectorXd>(static_cast<std::size_t>(A), Eigen::VectorXd::Zero(S)));
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(S, A);
  std::vector<bool> terminal(static_cast<std::size_t>(S), false);
  terminal[static_cast<std::size_t>(goal)] = true;

  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      if (s == goal) {
        p[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)](s) = 1.0;
        continue;
      }
      const int next = std::min(s + a + 1, goal);
      p[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)](next) = 1.0;
      r(s, a) = (next == goal) ? goal_reward : step_reward;
    }
  }
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(S);
  mu(0) = 1.0;
  return Mdp(std::move(p), std::move(r), std::move(mu), discount, std::move(terminal));
}

inline int sample_index(const Eigen::VectorXd& probs, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  double acc = 0.0;
  for (int i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (u <= acc) return i;
  }
  return static_cast<int>(probs.size()) - 1;  // guard against rounding
}

inline Transition step(const Mdp& mdp, int state, int action, Rng& rng) {
  mdp.check_indices(state, action);
  if (mdp.is_terminal(state)) {
    return Transition{state, action, 0.0, state, true};
  }
  const int next = sample_index(mdp.next_state_dist(state, action), rng);
  return Transition{state, action, mdp.reward()(state, action), next, mdp.is_terminal(next)};
}

inline Trajectory rollout(const Mdp& mdp, const Policy& policy, int max_steps, Rng& rng) {
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  Trajectory traj;
  int s = sample_index(mdp.initial_dist(), rng);
  double gamma_t = 1.0;
  for (int t = 0; t < max_steps; ++t) {
    if (mdp.is_terminal(s)) break;
    const int a = sample_index(policy.probs.row(s).transpose(), rng);
    Transition tr = step(mdp, s, a, rng);
    traj.discounted_return += gamma_t * tr.reward;
    gamma_t *= mdp.discount();
    traj.steps.push_back(tr);
    s = tr.next_state;
    if (tr.done) break;
  }
  return traj;
}

inline Eigen::MatrixXd policy_transition_matrix(const Mdp& mdp, const Policy& policy) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(S, S);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      P.row(s) += policy.probs(s, a) * mdp.next_state_dist(s, a).transpose();
    }
  }
  return P;
}

// Exact J(pi) = mu' (I - gamma P_pi)^{-1} r_pi.
inline double policy_return(const Mdp& mdp, const Policy& policy) {
  const int S = mdp.n_states();
  const Eigen::MatrixXd P = policy_transition_matrix(mdp, policy);
  Eigen::VectorXd r_pi(S);
  for (int s = 0; s < S; ++s) {
    r_pi(s) = policy.probs.row(s).dot(mdp.reward().row(s));
  }
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(S, S) - mdp.discount() * P;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  const Eigen::VectorXd v = lu.solve(r_pi);
  if (!v.allFinite()) throw std::runtime_error("singular policy evaluation system");
  return mdp.initial_dist().dot(v);
}

// Normalized discounted occupancy d(s,a) = (1-gamma) sum_t gamma^t Pr(s_t, a_t).
inline OccupancyMeasure exact_occupancy(const Mdp& mdp, const Policy& policy) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  const Eigen::MatrixXd P = policy_transition_matrix(mdp, policy);
  const Eigen::MatrixXd M =
      Eigen::MatrixXd::Identity(S, S) - mdp.discount() * P.transpose();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  const Eigen::VectorXd d_state = (1.0 - mdp.discount()) * lu.solve(mdp.initial_dist());
  if (!d_state.allFinite()) throw std::runtime_error("singular occupancy system");
  OccupancyMeasure occ;
  occ.density = d_state.asDiagonal() * policy.probs;
  return occ;
}

inline Eigen::MatrixXd bellman_backup(const Mdp& mdp, const Eigen::MatrixXd& q) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  if (q.rows() != S || q.cols() != A) throw std::invalid_argument("q shape mismatch");
  Eigen::VectorXd vmax(S);
  for (int s = 0; s < S; ++s) vmax(s) = q.row(s).maxCoeff();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(S, A);
  for (int s = 0; s < S; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (int a = 0; a < A; ++a) {
      out(s, a) = mdp.reward()(s, a) + mdp.discount() * mdp.next_state_dist(s, a).dot(vmax);
    }
  }
  return out;
}

inline Eigen::MatrixXd value_iteration(const Mdp& mdp, double tol = 1e-12,
                                       int max_iters = 100000) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(mdp.n_states(), mdp.n_actions());
  for (int i = 0; i < max_iters; ++i) {
    Eigen::MatrixXd next = bellman_backup(mdp, q);
    const double diff = (next - q).cwiseAbs().maxCoeff();
    q = std::move(next);
    if (diff < tol) break;
  }
  return q;
}

// --- JSON round trip -------------------------------------------------------

inline nlohmann::json mdp_to_json(const Mdp& mdp) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  nlohmann::json j;
  j["n_states"] = S;
  j["n_actions"] = A;
  j["discount"] = mdp.discount();
  auto transition = nlohmann::json::array();
  auto reward = nlohmann::json::array();
  for (int s = 0; s < S; ++s) {
    auto trow = nlohmann::json::array();
    auto rrow = nlohmann::json::array();
    for (int a = 0; a < A; ++a) {
      const auto& dist = mdp.next_state_dist(s, a);
      trow.push_back(std::vector<double>(dist.data(), dist.data() + dist.size()));
      rrow.push_back(mdp.reward()(s, a));
    }
    transition.push_back(std::move(trow));
    reward.push_back(std::move(rrow));
  }
  j["transition"] = std::move(transition);
  j["reward"] = std::move(reward);
  const auto& mu = mdp.initial_dist();
  j["initial_dist"] = std::vector<double>(mu.data(), mu.data() + mu.size());
  std::vector<bool> term;
  for (int s = 0; s < S; ++s) term.push_back(mdp.is_terminal(s));
  j["terminal"] = term;
  return j;
}

inline Mdp mdp_from_json(const nlohmann::json& j) {
  const int S = j.at("n_states").get<int>();
  const int A = j.at("n_actions").get<int>();
  std::vector<std::vector<Eigen::VectorXd>> p(
      static_cast<std::size_t>(S),
      std::vector<Eigen::VectorXd>(static_cast<std::size_t>(A)));
  Eigen::MatrixXd r(S, A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const auto row = j.at("transition").at(static_cast<std::size_t>(s))
                           .at(static_cast<std::size_t>(a)).get<std::vector<double>>();
      p[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] =
          Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size()));
      r(s, a) = j.at("reward").at(static_cast<std::size_t>(s))
                    .at(static_cast<std::size_t>(a)).get<double>();
    }
  }
  const auto mu_vec = j.at("initial_dist").get<std::vector<double>>();
  Eigen::VectorXd mu =
      Eigen::Map<const Eigen::VectorXd>(mu_vec.data(), static_cast<Eigen::Index>(mu_vec.size()));
  const auto terminal = j.at("terminal").get<std::vector<bool>>();
  return Mdp(std::move(p), std::move(r), std::move(mu), j.at("discount").get<double>(),
             terminal);
}

}  // namespace road
