#pragma once

// Sliding-window UCB over a discrete candidate set of mixing ratios,
// with a growing-window mode for sparse-reward settings.

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace road {

struct ArmStats {
  std::optional<double> mean;  // empty when count == 0
  int count = 0;
};

struct BanditState {
  std::vector<double> arms;      // candidate ratio set
  std::optional<int> window;     // empty encodes the growing window tau = k
  double exploration = 2.0;      // c
  std::deque<std::pair<int, double>> history;  // (arm_index, reward), FIFO
  int period = 0;                // k, completed periods

  static BanditState sliding(std::vector<double> arms, int window, double c = 2.0) {
    if (arms.empty()) throw std::invalid_argument("empty arm set");
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    if (c < 0.0) throw std::invalid_argument("exploration must be >= 0");
    return BanditState{std::move(arms), window, c, {}, 0};
  }

  static BanditState growing(std::vector<double> arms, double c = 2.0) {
    if (arms.empty()) throw std::invalid_argument("empty arm set");
    if (c < 0.0) throw std::invalid_argument("exploration must be >= 0");
    return BanditState{std::move(arms), std::nullopt, c, {}, 0};
  }
};

inline std::vector<ArmStats> window_means(const BanditState& state) {
  std::vector<double> sum(state.arms.size(), 0.0);
  std::vector<int> count(state.arms.size(), 0);
  for (const auto& [arm, reward] : state.history) {
    sum[static_cast<std::size_t>(arm)] += reward;
    ++count[static_cast<std::size_t>(arm)];
  }
  std::vector<ArmStats> out(state.arms.size());
  for (std::size_t i = 0; i < state.arms.size(); ++i) {
    out[i].count = count[i];
    if (count[i] > 0) out[i].mean = sum[i] / count[i];
  }
  return out;
}

inline std::vector<double> ucb_values(const BanditState& state) {
  const auto stats = window_means(state);
  const int k = std::max(state.period, 1);
  const int effective = state.window ? std::min(k, *state.window) : k;
  const double log_term = std::log(static_cast<double>(effective));
  std::vector<double> out(state.arms.size());
  for (std::size_t i = 0; i < state.arms.size(); ++i) {
    if (stats[i].count == 0) {
      out[i] = std::numeric_limits<double>::infinity();
    } else {
      out[i] = *stats[i].mean +
               std::sqrt(state.exploration * log_term / static_cast<double>(stats[i].count));
    }
  }
  return out;
}

// Argmax of windowed mean + exploration bonus; unpulled arms first,
// ties broken toward the lowest arm index. Does not mutate state.
inline double select_arm(const BanditState& state) {
  if (state.arms.empty()) throw std::invalid_argument("empty arm set");
  const auto ucb = ucb_values(state);
  std::size_t best = 0;
  for (std::size_t i = 1; i < ucb.size(); ++i) {
    if (ucb[i] > ucb[best]) best = i;
  }
  return state.arms[best];
}

inline int arm_index(const BanditState& state, double arm) {
  for (std::size_t i = 0; i < state.arms.size(); ++i) {
    if (state.arms[i] == arm) return static_cast<int>(i);
  }
  throw std::invalid_argument("arm not in candidate set");
}

inline void record(BanditState& state, double arm, double reward) {
  if (!std::isfinite(reward)) throw std::invalid_argument("non-finite bandit reward");
  const int idx = arm_index(state, arm);
  state.history.emplace_back(idx, reward);
  if (state.window && static_cast<int>(state.history.size()) > *state.window) {
    state.history.pop_front();
  }
  ++state.period;
}

}  // namespace road
