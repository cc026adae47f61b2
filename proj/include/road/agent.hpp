#pragma once

// Tabular learners: incremental Q-learning, batch fitted-Q updates, policy
// extraction, and behavior-mixture dataset generation.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "road/mdp.hpp"

namespace road {

struct AgentConfig {
  double learning_rate = 1e-3;
  double discount = 0.9;
  double inv_temperature = 1.0;  // softmax beta
  double epsilon = 0.1;

  void validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be > 0");
    if (discount <= 0.0 || discount >= 1.0) throw std::invalid_argument("discount in (0,1)");
    if (inv_temperature <= 0.0) throw std::invalid_argument("inv_temperature must be > 0");
    if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon in [0,1]");
  }
};

struct OfflineDataset {
  std::vector<Transition> transitions;
  std::string behavior_label;
};

inline void q_learning_update_inplace(Eigen::MatrixXd& q, const Transition& t,
                                      const AgentConfig& cfg) {
  const double next_max = t.done ? 0.0 : q.row(t.next_state).maxCoeff();
  const double target = t.reward + cfg.discount * next_max;
  const double updated = q(t.state, t.action) +
                         cfg.learning_rate * (target - q(t.state, t.action));
  if (!std::isfinite(updated)) throw std::runtime_error("non-finite Q update");
  q(t.state, t.action) = updated;
}

inline Eigen::MatrixXd q_learning_update(const Eigen::MatrixXd& q, const Transition& t,
                                         const AgentConfig& cfg) {
  Eigen::MatrixXd out = q;
  q_learning_update_inplace(out, t, cfg);
  return out;
}

// One exact fitted-Q step on visited entries: each (s,a) in the batch is set
// to the mean of its Bellman targets; unseen entries keep previous values.
inline Eigen::MatrixXd fqi_batch_update(const Eigen::MatrixXd& q_prev,
                                        const std::vector<Transition>& batch,
                                        const AgentConfig& cfg) {
  if (batch.empty()) throw std::invalid_argument("empty FQI batch");
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(q_prev.rows(), q_prev.cols());
  Eigen::MatrixXd count = Eigen::MatrixXd::Zero(q_prev.rows(), q_prev.cols());
  for (const auto& t : batch) {
    const double next_max = t.done ? 0.0 : q_prev.row(t.next_state).maxCoeff();
    sum(t.state, t.action) += t.reward + cfg.discount * next_max;
    count(t.state, t.action) += 1.0;
  }
  Eigen::MatrixXd out = q_prev;
  for (int s = 0; s < q_prev.rows(); ++s) {
    for (int a = 0; a < q_prev.cols(); ++a) {
      if (count(s, a) > 0.0) out(s, a) = sum(s, a) / count(s, a);
    }
  }
  return out;
}

inline Policy softmax_policy(const Eigen::MatrixXd& q, double beta) {
  if (beta <= 0.0) throw std::invalid_argument("beta must be > 0");
  Policy pi;
  pi.probs.resize(q.rows(), q.cols());
  for (int s = 0; s < q.rows(); ++s) {
    const Eigen::VectorXd logits = beta * (q.row(s).array() - q.row(s).maxCoeff()).matrix();
    const Eigen::VectorXd expd = logits.array().exp();
    pi.probs.row(s) = expd.transpose() / expd.sum();
  }
  return pi;
}

// Ties split evenly among argmaxes.
inline Policy epsilon_greedy_policy(const Eigen::MatrixXd& q, double epsilon) {
  if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon in [0,1]");
  const int A = static_cast<int>(q.cols());
  Policy pi;
  pi.probs = Eigen::MatrixXd::Constant(q.rows(), A, epsilon / A);
  for (int s = 0; s < q.rows(); ++s) {
    const double best = q.row(s).maxCoeff();
    std::vector<int> winners;
    for (int a = 0; a < A; ++a) {
      if (q(s, a) == best) winners.push_back(a);
    }
    for (int a : winners) {
      pi.probs(s, a) += (1.0 - epsilon) / static_cast<double>(winners.size());
    }
  }
  return pi;
}

// Lowest-index argmax, deterministic across platforms.
inline int greedy_action(const Eigen::MatrixXd& q, int state) {
  int best = 0;
  for (int a = 1; a < q.cols(); ++a) {
    if (q(state, a) > q(state, best)) best = a;
  }
  return best;
}

inline Policy greedy_policy(const Eigen::MatrixXd& q) {
  Policy pi;
  pi.probs = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  for (int s = 0; s < q.rows(); ++s) pi.probs(s, greedy_action(q, s)) = 1.0;
  return pi;
}

// Episodes are generated by drawing a policy per episode from the mixture
// until n_steps transitions have been collected.
inline OfflineDataset generate_offline_dataset(
    const Mdp& mdp, const std::vector<std::pair<Policy, double>>& policies, int n_steps,
    Rng& rng, std::string behavior_label = {}, int max_episode_steps = 200) {
  if (policies.empty()) throw std::invalid_argument("empty policy mixture");
  double wsum = 0.0;
  for (const auto& [pi, w] : policies) {
    if (w < 0.0) throw std::invalid_argument("negative mixture weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to 1");

  Eigen::VectorXd weights(static_cast<Eigen::Index>(policies.size()));
  for (std::size_t i = 0; i < policies.size(); ++i) {
    weights(static_cast<Eigen::Index>(i)) = policies[i].second;
  }

  OfflineDataset out;
  out.behavior_label = std::move(behavior_label);
  while (static_cast<int>(out.transitions.size()) < n_steps) {
    const int which = sample_index(weights, rng);
    Trajectory traj = rollout(mdp, policies[static_cast<std::size_t>(which)].first,
                              max_episode_steps, rng);
    for (const auto& t : traj.steps) {
      out.transitions.push_back(t);
      if (static_cast<int>(out.transitions.size()) == n_steps) break;
    }
  }
  return out;
}

// --- CSV + sidecar metadata ------------------------------------------------

inline void save_offline_dataset(const OfflineDataset& data, const std::string& csv_path,
                                 std::uint64_t seed) {
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write " + csv_path);
  csv << "state,action,reward,next_state,done\n";
  for (const auto& t : data.transitions) {
    csv << t.state << ',' << t.action << ',';
    std::ostringstream r;
    r.precision(17);
    r << t.reward;
    csv << r.str() << ',' << t.next_state << ',' << (t.done ? 1 : 0) << '\n';
  }
  nlohmann::json meta;
  meta["behavior_label"] = data.behavior_label;
  meta["seed"] = seed;
  meta["n_transitions"] = data.transitions.size();
  std::ofstream side(csv_path + ".meta.json");
  side << meta.dump(2) << '\n';
}

inline OfflineDataset load_offline_dataset(const std::string& csv_path) {
  std::ifstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot read " + csv_path);
  OfflineDataset out;
  std::string line;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    Transition t;
    char comma;
    int done_int;
    std::istringstream ss(line);
    ss >> t.state >> comma >> t.action >> comma >> t.reward >> comma >> t.next_state >>
        comma >> done_int;
    t.done = done_int != 0;
    out.transitions.push_back(t);
  }
  std::ifstream side(csv_path + ".meta.json");
  if (side) {
    nlohmann::json meta = nlohmann::json::parse(side);
    out.behavior_label = meta.value("behavior_label", std::string{});
  }
  return out;
}

}  // namespace road
