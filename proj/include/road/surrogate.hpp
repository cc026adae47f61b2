#pragma once

// Surrogate bandit reward R_q = Delta_off - kappa * Delta_on, computed from
// the current Q-table, the current policy, and batches from both sources.

#include <stdexcept>
#include <vector>

#include "road/agent.hpp"
#include "road/mdp.hpp"
#include "road/replay.hpp"

namespace road {

enum class ActionExpectation { Exact, Sampled };

struct SurrogateConfig {
  double kappa = 1.0;
  int batch_size = 256;
  ActionExpectation action_expectation = ActionExpectation::Exact;

  void validate() const {
    if (kappa < 0.0) throw std::invalid_argument("kappa must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  }
};

struct SurrogateStats {
  double delta_off = 0.0;
  double delta_on = 0.0;
  double r_q = 0.0;
};

namespace detail {

// E_{a~pi}[q(s,a)] averaged over batch states minus mean of q over batch pairs.
inline double perceived_improvement(const Eigen::MatrixXd& q, const Policy& policy,
                                    const std::vector<Transition>& batch,
                                    ActionExpectation mode, Rng& rng) {
  double policy_term = 0.0;
  double data_term = 0.0;
  for (const auto& t : batch) {
    if (mode == ActionExpectation::Exact) {
      policy_term += policy.probs.row(t.state).dot(q.row(t.state));
    } else {
      const int a = sample_index(policy.probs.row(t.state).transpose(), rng);
      policy_term += q(t.state, a);
    }
    data_term += q(t.state, t.action);
  }
  const double n = static_cast<double>(batch.size());
  return (policy_term - data_term) / n;
}

}  // namespace detail

inline SurrogateStats compute_rq(const Eigen::MatrixXd& q, const Policy& policy,
                                 const std::vector<Transition>& offline_batch,
                                 const std::vector<Transition>& online_batch,
                                 const SurrogateConfig& cfg, Rng& rng) {
  cfg.validate();
  if (offline_batch.empty() || online_batch.empty()) {
    throw std::invalid_argument("compute_rq requires non-empty batches");
  }
  SurrogateStats out;
  out.delta_off =
      detail::perceived_improvement(q, policy, offline_batch, cfg.action_expectation, rng);
  out.delta_on =
      detail::perceived_improvement(q, policy, online_batch, cfg.action_expectation, rng);
  out.r_q = out.delta_off - cfg.kappa * out.delta_on;
  if (!std::isfinite(out.r_q)) throw std::runtime_error("non-finite surrogate reward");
  return out;
}

// Period-end reward for the bandit: one batch from each source.
inline SurrogateStats period_reward(const Eigen::MatrixXd& q, const Policy& policy,
                                    const OfflineDataset& offline, const OnlineBuffer& online,
                                    const SurrogateConfig& cfg, Rng& rng) {
  if (online.empty()) throw std::runtime_error("period_reward: online buffer is empty");
  std::vector<Transition> off_batch;
  std::vector<Transition> on_batch;
  off_batch.reserve(static_cast<std::size_t>(cfg.batch_size));
  on_batch.reserve(static_cast<std::size_t>(cfg.batch_size));
  std::uniform_int_distribution<std::size_t> pick_off(0, offline.transitions.size() - 1);
  std::uniform_int_distribution<int> pick_on(0, online.size() - 1);
  for (int i = 0; i < cfg.batch_size; ++i) {
    off_batch.push_back(offline.transitions[pick_off(rng)]);
    on_batch.push_back(online.at(pick_on(rng)));
  }
  return compute_rq(q, policy, off_batch, on_batch, cfg, rng);
}

}  // namespace road
