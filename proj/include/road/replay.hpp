#pragma once

// Online ring buffer, the linearized mixed sampler, and the baseline mixing
// strategy family (Fixed, Decreasing, Uniform, tabular Balanced Replay).

#include <deque>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "road/agent.hpp"
#include "road/bandit.hpp"
#include "road/mdp.hpp"

namespace road {

class OnlineBuffer {
 public:
  explicit OnlineBuffer(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw std::invalid_argument("capacity must be >= 1");
  }

  void push(const Transition& t) {
    storage_.push_back(t);
    if (static_cast<int>(storage_.size()) > capacity_) storage_.pop_front();
    ++total_inserted_;
  }

  int size() const { return static_cast<int>(storage_.size()); }
  bool empty() const { return storage_.empty(); }
  int capacity() const { return capacity_; }
  std::uint64_t total_inserted() const { return total_inserted_; }
  const Transition& at(int i) const { return storage_.at(static_cast<std::size_t>(i)); }

 private:
  int capacity_;
  std::deque<Transition> storage_;
  std::uint64_t total_inserted_ = 0;
};

enum class SampleSource { Offline, Online };

struct TaggedTransition {
  Transition t;
  SampleSource source;
};

// Each element independently comes from the offline set with probability m,
// else uniformly from the online buffer.
inline std::vector<TaggedTransition> sample_mixed(const OfflineDataset& offline,
                                                  const OnlineBuffer& online, double m,
                                                  int batch_size, Rng& rng) {
  if (m < 0.0 || m > 1.0) throw std::invalid_argument("mixing ratio must lie in [0,1]");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (m > 0.0 && offline.transitions.empty()) {
    throw std::runtime_error("sample_mixed: offline dataset is empty");
  }
  if (m < 1.0 && online.empty()) {
    throw std::runtime_error("sample_mixed: online buffer is empty");
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<TaggedTransition> batch;
  batch.reserve(static_cast<std::size_t>(batch_size));
  for (int i = 0; i < batch_size; ++i) {
    if (unif(rng) < m) {
      std::uniform_int_distribution<std::size_t> pick(0, offline.transitions.size() - 1);
      batch.push_back({offline.transitions[pick(rng)], SampleSource::Offline});
    } else {
      std::uniform_int_distribution<int> pick(0, online.size() - 1);
      batch.push_back({online.at(pick(rng)), SampleSource::Online});
    }
  }
  return batch;
}

// Either a scalar ratio m or per-sample weights over offline+online union.
struct MixingDirective {
  std::optional<double> ratio;
  std::vector<double> weights;  // Balanced Replay case
};

struct FixedStrategy {
  double m;
};
struct DecreasingStrategy {
  double m_high;
  double m_low;
  int total_periods;
};
struct UniformStrategy {
  std::vector<double> arms;
};
struct BalancedReplayStrategy {
  double smoothing = 1e-3;
};
struct RoadStrategy {
  BanditState bandit;
};

struct StrategyState {
  std::variant<FixedStrategy, DecreasingStrategy, UniformStrategy, BalancedReplayStrategy,
               RoadStrategy>
      kind;
};

// Balanced Replay weights from exact tabular counts: weight of a sample at
// (s,a) is proportional to (d_pi + smoothing) / (empirical + smoothing).
inline std::vector<double> br_weights(const std::vector<Transition>& union_samples,
                                      const OccupancyMeasure& online_policy_occupancy,
                                      double smoothing) {
  if (smoothing <= 0.0) throw std::invalid_argument("smoothing must be > 0");
  if (union_samples.empty()) return {};
  const auto& d = online_policy_occupancy.density;
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(d.rows(), d.cols());
  for (const auto& t : union_samples) counts(t.state, t.action) += 1.0;
  const Eigen::MatrixXd empirical = counts / static_cast<double>(union_samples.size());
  // Normalize the occupancy defensively so scaled inputs give identical weights.
  const Eigen::MatrixXd d_norm = d / d.sum();

  std::vector<double> w;
  w.reserve(union_samples.size());
  double total = 0.0;
  for (const auto& t : union_samples) {
    const double raw = (d_norm(t.state, t.action) + smoothing) /
                       (empirical(t.state, t.action) + smoothing);
    w.push_back(raw);
    total += raw;
  }
  for (auto& x : w) x /= total;
  return w;
}

inline double decreasing_ratio(const DecreasingStrategy& s, int period_index) {
  if (period_index < 0 || period_index >= s.total_periods) {
    throw std::out_of_range("period_index beyond Decreasing schedule");
  }
  if (s.total_periods == 1) return s.m_high;
  // Convex-combination form hits both endpoints exactly.
  const double span = static_cast<double>(s.total_periods - 1);
  return (s.m_high * (span - period_index) + s.m_low * period_index) / span;
}

// Balanced Replay directives are produced by the harness, which owns the
// sample union; here it reports an empty directive to be filled by caller.
inline MixingDirective next_directive(StrategyState& state, int period_index, Rng& rng) {
  MixingDirective out;
  std::visit(
      [&](auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FixedStrategy>) {
          out.ratio = s.m;
        } else if constexpr (std::is_same_v<T, DecreasingStrategy>) {
          out.ratio = decreasing_ratio(s, period_index);
        } else if constexpr (std::is_same_v<T, UniformStrategy>) {
          if (s.arms.empty()) throw std::invalid_argument("Uniform strategy needs arms");
          std::uniform_int_distribution<std::size_t> pick(0, s.arms.size() - 1);
          out.ratio = s.arms[pick(rng)];
        } else if constexpr (std::is_same_v<T, RoadStrategy>) {
          out.ratio = select_arm(s.bandit);
        } else {
          // BalancedReplay: per-sample weights computed by the caller.
        }
      },
      state.kind);
  return out;
}

}  // namespace road
