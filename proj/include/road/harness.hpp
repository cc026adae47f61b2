#pragma once

// Config-driven experiment orchestration: offline pretraining, online
// fine-tuning under a mixing strategy, per-period metrics, multi-seed
// aggregation, and CSV/JSON export.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "road/agent.hpp"
#include "road/bandit.hpp"
#include "road/mdp.hpp"
#include "road/replay.hpp"
#include "road/surrogate.hpp"

namespace road {

struct MdpSpec {
  // Either an inline chain description or a path to a serialized MDP.
  std::optional<std::string> file;
  int n_cells = 10;
  double step_reward = -1.0;
  double goal_reward = 10.0;
  double discount = 0.9;
};

struct OfflinePolicyMix {
  std::string policy;  // "suboptimal" | "optimal" | "uniform"
  double weight = 1.0;
};

struct OfflineDataSpec {
  std::vector<OfflinePolicyMix> mixture;
  int n_steps = 1000;
};

struct PeriodSpec {
  bool per_episode = true;
  int steps = 0;  // used when per_episode is false
};

struct StrategySpec {
  std::string kind;  // fixed | decreasing | uniform | balanced_replay | road
  double m = 0.5;                       // fixed
  double m_high = 0.5, m_low = 0.1;     // decreasing
  std::vector<double> arms = {0.1, 0.2, 0.3, 0.4, 0.5};
  double smoothing = 1e-3;              // balanced_replay
  double exploration = 2.0;             // road
  std::optional<int> window = 1000;     // road; empty = growing
};

struct EvalSpec {
  int rollouts = 20;
  int interval = 1;  // in periods
};

struct ExperimentConfig {
  MdpSpec mdp;
  OfflineDataSpec offline_data;
  int offline_pretrain_steps = 1000;
  int online_steps = 1000;
  PeriodSpec period;
  StrategySpec strategy;
  AgentConfig agent;
  SurrogateConfig surrogate;
  int train_batch_size = 32;
  int buffer_capacity = 10000;
  EvalSpec eval;
  int max_episode_steps = 100;
  std::vector<std::uint64_t> seeds = {0};
  std::string out_dir = "out";
  std::string name = "experiment";
};

struct PeriodRow {
  int period = 0;
  double selected_m = 0.0;
  double delta_off = 0.0;
  double delta_on = 0.0;
  double r_q = 0.0;
  double offline_fraction = 0.0;
  double eval_return = 0.0;
};

struct RunRecord {
  std::uint64_t seed = 0;
  std::vector<PeriodRow> rows;
  double final_score = 0.0;  // mean of the last 10 evaluations
  double wall_time_s = 0.0;
};

// --- Config parsing --------------------------------------------------------

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      throw std::invalid_argument("unknown config key '" + it.key() + "' in " + where);
    }
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  detail::reject_unknown_keys(
      j,
      {"mdp", "offline_data", "offline_pretrain_steps", "online_steps", "period", "strategy",
       "agent", "surrogate", "train_batch_size", "buffer_capacity", "eval",
       "max_episode_steps", "seeds", "out_dir", "name"},
      "config");
  ExperimentConfig cfg;
  if (j.contains("mdp")) {
    const auto& m = j.at("mdp");
    detail::reject_unknown_keys(
        m, {"file", "n_cells", "step_reward", "goal_reward", "discount"}, "mdp");
    if (m.contains("file")) cfg.mdp.file = m.at("file").get<std::string>();
    cfg.mdp.n_cells = m.value("n_cells", cfg.mdp.n_cells);
    cfg.mdp.step_reward = m.value("step_reward", cfg.mdp.step_reward);
    cfg.mdp.goal_reward = m.value("goal_reward", cfg.mdp.goal_reward);
    cfg.mdp.discount = m.value("discount", cfg.mdp.discount);
  }
  if (j.contains("offline_data")) {
    const auto& d = j.at("offline_data");
    detail::reject_unknown_keys(d, {"mixture", "n_steps"}, "offline_data");
    cfg.offline_data.n_steps = d.value("n_steps", cfg.offline_data.n_steps);
    if (d.contains("mixture")) {
      cfg.offline_data.mixture.clear();
      for (const auto& entry : d.at("mixture")) {
        detail::reject_unknown_keys(entry, {"policy", "weight"}, "mixture entry");
        cfg.offline_data.mixture.push_back(
            {entry.at("policy").get<std::string>(), entry.value("weight", 1.0)});
      }
    }
  }
  if (cfg.offline_data.mixture.empty()) {
    cfg.offline_data.mixture = {{"suboptimal", 1.0}};
  }
  cfg.offline_pretrain_steps = j.value("offline_pretrain_steps", cfg.offline_pretrain_steps);
  cfg.online_steps = j.value("online_steps", cfg.online_steps);
  if (j.contains("period")) {
    const auto& p = j.at("period");
    detail::reject_unknown_keys(p, {"kind", "steps"}, "period");
    const std::string kind = p.value("kind", std::string("episode"));
    if (kind == "episode") {
      cfg.period.per_episode = true;
    } else if (kind == "steps") {
      cfg.period.per_episode = false;
      cfg.period.steps = p.at("steps").get<int>();
      if (cfg.period.steps < 1) throw std::invalid_argument("period steps must be >= 1");
    } else {
      throw std::invalid_argument("period kind must be 'episode' or 'steps'");
    }
  }
  if (j.contains("strategy")) {
    const auto& s = j.at("strategy");
    detail::reject_unknown_keys(
        s, {"kind", "m", "m_high", "m_low", "arms", "smoothing", "exploration", "window"},
        "strategy");
    cfg.strategy.kind = s.at("kind").get<std::string>();
    cfg.strategy.m = s.value("m", cfg.strategy.m);
    cfg.strategy.m_high = s.value("m_high", cfg.strategy.m_high);
    cfg.strategy.m_low = s.value("m_low", cfg.strategy.m_low);
    if (s.contains("arms")) cfg.strategy.arms = s.at("arms").get<std::vector<double>>();
    cfg.strategy.smoothing = s.value("smoothing", cfg.strategy.smoothing);
    cfg.strategy.exploration = s.value("exploration", cfg.strategy.exploration);
    if (s.contains("window")) {
      if (s.at("window").is_string()) {
        if (s.at("window").get<std::string>() != "growing") {
          throw std::invalid_argument("window must be an integer or 'growing'");
        }
        cfg.strategy.window.reset();
      } else {
        cfg.strategy.window = s.at("window").get<int>();
      }
    }
  } else {
    cfg.strategy.kind = "fixed";
  }
  if (j.contains("agent")) {
    const auto& a = j.at("agent");
    detail::reject_unknown_keys(
        a, {"learning_rate", "discount", "inv_temperature", "epsilon"}, "agent");
    cfg.agent.learning_rate = a.value("learning_rate", cfg.agent.learning_rate);
    cfg.agent.discount = a.value("discount", cfg.agent.discount);
    cfg.agent.inv_temperature = a.value("inv_temperature", cfg.agent.inv_temperature);
    cfg.agent.epsilon = a.value("epsilon", cfg.agent.epsilon);
  }
  cfg.agent.validate();
  if (j.contains("surrogate")) {
    const auto& s = j.at("surrogate");
    detail::reject_unknown_keys(s, {"kappa", "batch_size", "action_expectation"},
                                "surrogate");
    cfg.surrogate.kappa = s.value("kappa", cfg.surrogate.kappa);
    cfg.surrogate.batch_size = s.value("batch_size", cfg.surrogate.batch_size);
    const std::string mode = s.value("action_expectation", std::string("exact"));
    if (mode == "exact") {
      cfg.surrogate.action_expectation = ActionExpectation::Exact;
    } else if (mode == "sampled") {
      cfg.surrogate.action_expectation = ActionExpectation::Sampled;
    } else {
      throw std::invalid_argument("action_expectation must be 'exact' or 'sampled'");
    }
  }
  cfg.surrogate.validate();
  cfg.train_batch_size = j.value("train_batch_size", cfg.train_batch_size);
  cfg.buffer_capacity = j.value("buffer_capacity", cfg.buffer_capacity);
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    detail::reject_unknown_keys(e, {"rollouts", "interval"}, "eval");
    cfg.eval.rollouts = e.value("rollouts", cfg.eval.rollouts);
    cfg.eval.interval = e.value("interval", cfg.eval.interval);
  }
  cfg.max_episode_steps = j.value("max_episode_steps", cfg.max_episode_steps);
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.name = j.value("name", cfg.name);
  if (cfg.online_steps < 1) throw std::invalid_argument("online_steps must be >= 1");
  if (cfg.offline_pretrain_steps < 0) {
    throw std::invalid_argument("offline_pretrain_steps must be >= 0");
  }
  if (cfg.train_batch_size < 1) throw std::invalid_argument("train_batch_size must be >= 1");
  if (cfg.seeds.empty()) throw std::invalid_argument("at least one seed required");
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path);
  return parse_config(nlohmann::json::parse(in));
}

// --- Experiment internals --------------------------------------------------

namespace detail {

inline Mdp build_mdp(const MdpSpec& spec) {
  if (spec.file) {
    std::ifstream in(*spec.file);
    if (!in) throw std::runtime_error("cannot read MDP file " + *spec.file);
    return mdp_from_json(nlohmann::json::parse(in));
  }
  return build_chain_mdp(spec.n_cells, spec.step_reward, spec.goal_reward, spec.discount);
}

inline Policy named_behavior_policy(const Mdp& mdp, const std::string& name) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  Policy pi;
  if (name == "uniform") {
    pi.probs = Eigen::MatrixXd::Constant(S, A, 1.0 / A);
  } else if (name == "suboptimal") {
    pi.probs = Eigen::MatrixXd::Zero(S, A);
    pi.probs.col(0).setOnes();
  } else if (name == "optimal") {
    const Eigen::MatrixXd q_star = value_iteration(mdp);
    pi = greedy_policy(q_star);
  } else {
    throw std::invalid_argument("unknown behavior policy '" + name + "'");
  }
  return pi;
}

inline OfflineDataset build_offline_data(const Mdp& mdp, const ExperimentConfig& cfg,
                                         Rng& rng) {
  std::vector<std::pair<Policy, double>> mixture;
  std::string label;
  for (const auto& entry : cfg.offline_data.mixture) {
    mixture.emplace_back(named_behavior_policy(mdp, entry.policy), entry.weight);
    if (!label.empty()) label += "+";
    label += entry.policy;
  }
  return generate_offline_dataset(mdp, mixture, cfg.offline_data.n_steps, rng, label,
                                  cfg.max_episode_steps);
}

inline StrategyState build_strategy(const StrategySpec& spec, int total_periods_hint) {
  StrategyState state;
  if (spec.kind == "fixed") {
    state.kind = FixedStrategy{spec.m};
  } else if (spec.kind == "decreasing") {
    state.kind = DecreasingStrategy{spec.m_high, spec.m_low, total_periods_hint};
  } else if (spec.kind == "uniform") {
    state.kind = UniformStrategy{spec.arms};
  } else if (spec.kind == "balanced_replay") {
    state.kind = BalancedReplayStrategy{spec.smoothing};
  } else if (spec.kind == "road") {
    state.kind = RoadStrategy{spec.window
                                  ? BanditState::sliding(spec.arms, *spec.window,
                                                         spec.exploration)
                                  : BanditState::growing(spec.arms, spec.exploration)};
  } else {
    throw std::invalid_argument("unknown strategy kind '" + spec.kind + "'");
  }
  return state;
}

inline double greedy_eval(const Mdp& mdp, const Eigen::MatrixXd& q, int rollouts,
                          int max_steps, Rng& rng) {
  const Policy pi = greedy_policy(q);
  double sum = 0.0;
  for (int i = 0; i < rollouts; ++i) {
    sum += rollout(mdp, pi, max_steps, rng).discounted_return;
  }
  return sum / rollouts;
}

}  // namespace detail

inline RunRecord run_single_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(seed);
  const Mdp mdp = detail::build_mdp(cfg.mdp);
  const OfflineDataset offline = detail::build_offline_data(mdp, cfg, rng);

  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(mdp.n_states(), mdp.n_actions());

  // Offline phase: uniform batches from the static dataset.
  std::uniform_int_distribution<std::size_t> pick_off(0, offline.transitions.size() - 1);
  for (int step_i = 0; step_i < cfg.offline_pretrain_steps; ++step_i) {
    for (int b = 0; b < cfg.train_batch_size; ++b) {
      q_learning_update_inplace(q, offline.transitions[pick_off(rng)], cfg.agent);
    }
  }

  const int periods_hint =
      cfg.period.per_episode ? cfg.online_steps
                             : (cfg.online_steps + cfg.period.steps - 1) / cfg.period.steps;
  StrategyState strategy = detail::build_strategy(cfg.strategy, periods_hint);
  const bool is_road = std::holds_alternative<RoadStrategy>(strategy.kind);
  const bool is_br = std::holds_alternative<BalancedReplayStrategy>(strategy.kind);

  OnlineBuffer buffer(cfg.buffer_capacity);
  RunRecord record;
  record.seed = seed;

  int env_steps = 0;
  int period_index = 0;
  int state = sample_index(mdp.initial_dist(), rng);
  int episode_steps = 0;

  while (env_steps < cfg.online_steps) {
    // One directive governs every batch of the period.
    MixingDirective directive = next_directive(strategy, period_index, rng);
    std::vector<Transition> br_union;
    std::vector<double> br_w;
    if (is_br) {
      br_union = offline.transitions;
      for (int i = 0; i < buffer.size(); ++i) br_union.push_back(buffer.at(i));
      const Policy explore = epsilon_greedy_policy(q, cfg.agent.epsilon);
      br_w = br_weights(br_union, exact_occupancy(mdp, explore), cfg.strategy.smoothing);
    }

    std::uint64_t offline_draws = 0;
    std::uint64_t total_draws = 0;
    bool period_done = false;
    int period_steps = 0;

    while (!period_done && env_steps < cfg.online_steps) {
      const Policy explore = epsilon_greedy_policy(q, cfg.agent.epsilon);
      const int a = sample_index(explore.probs.row(state).transpose(), rng);
      const Transition tr = step(mdp, state, a, rng);
      buffer.push(tr);
      ++env_steps;
      ++episode_steps;
      ++period_steps;

      // One replay-trained batch per environment step.
      if (directive.ratio) {
        const auto batch =
            sample_mixed(offline, buffer, *directive.ratio, cfg.train_batch_size, rng);
        for (const auto& tagged : batch) {
          q_learning_update_inplace(q, tagged.t, cfg.agent);
          if (tagged.source == SampleSource::Offline) ++offline_draws;
          ++total_draws;
        }
      } else {
        // Balanced Replay: weighted draws over the union snapshot.
        std::discrete_distribution<std::size_t> pick(br_w.begin(), br_w.end());
        for (int b = 0; b < cfg.train_batch_size; ++b) {
          const std::size_t idx = pick(rng);
          q_learning_update_inplace(q, br_union[idx], cfg.agent);
          if (idx < offline.transitions.size()) ++offline_draws;
          ++total_draws;
        }
      }

      if (tr.done || episode_steps >= cfg.max_episode_steps) {
        state = sample_index(mdp.initial_dist(), rng);
        episode_steps = 0;
        if (cfg.period.per_episode) period_done = true;
      } else {
        state = tr.next_state;
      }
      if (!cfg.period.per_episode && period_steps >= cfg.period.steps) period_done = true;
    }

    const Policy pi = softmax_policy(q, cfg.agent.inv_temperature);
    const SurrogateStats stats = period_reward(q, pi, offline, buffer, cfg.surrogate, rng);
    if (is_road) {
      road::record(std::get<RoadStrategy>(strategy.kind).bandit, directive.ratio.value(),
                   stats.r_q);
    }

    PeriodRow row;
    row.period = period_index;
    row.selected_m = directive.ratio ? *directive.ratio
                                     : (total_draws ? static_cast<double>(offline_draws) /
                                                          static_cast<double>(total_draws)
                                                    : 0.0);
    row.delta_off = stats.delta_off;
    row.delta_on = stats.delta_on;
    row.r_q = stats.r_q;
    row.offline_fraction = total_draws ? static_cast<double>(offline_draws) /
                                             static_cast<double>(total_draws)
                                       : 0.0;
    if (period_index % cfg.eval.interval == 0 || env_steps >= cfg.online_steps) {
      row.eval_return =
          detail::greedy_eval(mdp, q, cfg.eval.rollouts, cfg.max_episode_steps, rng);
    } else {
      row.eval_return = record.rows.empty() ? 0.0 : record.rows.back().eval_return;
    }
    record.rows.push_back(row);
    ++period_index;
  }

  const int tail = std::min<int>(10, static_cast<int>(record.rows.size()));
  double acc = 0.0;
  for (int i = 0; i < tail; ++i) {
    acc += record.rows[record.rows.size() - 1 - static_cast<std::size_t>(i)].eval_return;
  }
  record.final_score = tail ? acc / tail : 0.0;
  record.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return record;
}

inline std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
  std::vector<RunRecord> records;
  records.reserve(cfg.seeds.size());
  for (const auto seed : cfg.seeds) records.push_back(run_single_seed(cfg, seed));
  return records;
}

// --- Export ----------------------------------------------------------------

namespace detail {

inline std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Return of the return-minimizing policy, for score normalization.
inline double pessimal_return(const Mdp& mdp) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(mdp.n_states(), mdp.n_actions());
  for (int iter = 0; iter < 100000; ++iter) {
    Eigen::VectorXd vmin(mdp.n_states());
    for (int s = 0; s < mdp.n_states(); ++s) vmin(s) = q.row(s).minCoeff();
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(mdp.n_states(), mdp.n_actions());
    for (int s = 0; s < mdp.n_states(); ++s) {
      if (mdp.is_terminal(s)) continue;
      for (int a = 0; a < mdp.n_actions(); ++a) {
        next(s, a) = mdp.reward()(s, a) + mdp.discount() * mdp.next_state_dist(s, a).dot(vmin);
      }
    }
    const double diff = (next - q).cwiseAbs().maxCoeff();
    q = std::move(next);
    if (diff < 1e-12) break;
  }
  Policy worst;
  worst.probs = Eigen::MatrixXd::Zero(mdp.n_states(), mdp.n_actions());
  for (int s = 0; s < mdp.n_states(); ++s) {
    int arg = 0;
    for (int a = 1; a < mdp.n_actions(); ++a) {
      if (q(s, a) < q(s, arg)) arg = a;
    }
    worst.probs(s, arg) = 1.0;
  }
  return policy_return(mdp, worst);
}

}  // namespace detail

inline void export_metrics(const std::vector<RunRecord>& records,
                           const ExperimentConfig& cfg, const std::string& out_dir) {
  if (records.empty()) throw std::invalid_argument("no records to export");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  std::ofstream curves(fs::path(out_dir) / "curves.csv");
  if (!curves) throw std::runtime_error("cannot write curves.csv in " + out_dir);
  curves << "seed,period,eval_return,delta_off,delta_on,r_q,selected_m\n";
  for (const auto& rec : records) {
    for (const auto& row : rec.rows) {
      curves << rec.seed << ',' << row.period << ',' << detail::fmt_double(row.eval_return)
             << ',' << detail::fmt_double(row.delta_off) << ','
             << detail::fmt_double(row.delta_on) << ',' << detail::fmt_double(row.r_q) << ','
             << detail::fmt_double(row.selected_m) << '\n';
    }
  }

  // Selection-count heatmap: period buckets x arms.
  const auto& arms = cfg.strategy.arms;
  constexpr int kBuckets = 10;
  std::size_t max_periods = 0;
  for (const auto& rec : records) max_periods = std::max(max_periods, rec.rows.size());
  const std::size_t bucket_width = std::max<std::size_t>(1, (max_periods + kBuckets - 1) / kBuckets);
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> counts;
  for (const auto& rec : records) {
    for (const auto& row : rec.rows) {
      const std::size_t bucket = static_cast<std::size_t>(row.period) / bucket_width;
      std::size_t arm = arms.size();  // off-grid sentinel column
      for (std::size_t i = 0; i < arms.size(); ++i) {
        if (std::abs(row.selected_m - arms[i]) < 1e-12) {
          arm = i;
          break;
        }
      }
      ++counts[{bucket, arm}];
    }
  }
  std::ofstream heatmap(fs::path(out_dir) / "heatmap.csv");
  heatmap << "period_bucket";
  for (const auto arm : arms) heatmap << ",arm_" << detail::fmt_double(arm);
  heatmap << ",other\n";
  const std::size_t n_buckets = (max_periods + bucket_width - 1) / bucket_width;
  for (std::size_t b = 0; b < n_buckets; ++b) {
    heatmap << b;
    for (std::size_t i = 0; i <= arms.size(); ++i) {
      const auto it = counts.find({b, i});
      heatmap << ',' << (it == counts.end() ? 0 : it->second);
    }
    heatmap << '\n';
  }

  std::vector<double> finals;
  for (const auto& rec : records) finals.push_back(rec.final_score);
  const double mean = std::accumulate(finals.begin(), finals.end(), 0.0) / finals.size();
  double var = 0.0;
  for (const auto f : finals) var += (f - mean) * (f - mean);
  const double stddev = finals.size() > 1 ? std::sqrt(var / (finals.size() - 1)) : 0.0;

  nlohmann::json summary;
  summary["name"] = cfg.name;
  summary["strategy"] = cfg.strategy.kind;
  summary["n_seeds"] = records.size();
  summary["final_score_mean"] = mean;
  summary["final_score_std"] = stddev;
  // Raw discounted returns plus a [0,100] normalization against the
  // enumerated worst/best policies of the environment.
  const Mdp mdp = detail::build_mdp(cfg.mdp);
  const double best = policy_return(mdp, greedy_policy(value_iteration(mdp)));
  const double worst = detail::pessimal_return(mdp);
  if (best > worst) {
    summary["final_score_norm_mean"] = 100.0 * (mean - worst) / (best - worst);
    summary["final_score_norm_std"] = 100.0 * stddev / (best - worst);
  }
  std::ofstream sfile(fs::path(out_dir) / "summary.json");
  sfile << summary.dump(2) << '\n';
}

struct StrategyResult {
  std::string name;
  std::string kind;
  double mean = 0.0;
  double stddev = 0.0;
  bool best_fixed = false;
};

inline std::vector<StrategyResult> compare_strategies(
    const std::vector<ExperimentConfig>& cfgs) {
  if (cfgs.empty()) throw std::invalid_argument("no configs to compare");
  std::vector<StrategyResult> table;
  for (const auto& cfg : cfgs) {
    const auto records = run_experiment(cfg);
    std::vector<double> finals;
    for (const auto& rec : records) finals.push_back(rec.final_score);
    StrategyResult res;
    res.name = cfg.name;
    res.kind = cfg.strategy.kind;
    res.mean = std::accumulate(finals.begin(), finals.end(), 0.0) / finals.size();
    double var = 0.0;
    for (const auto f : finals) var += (f - res.mean) * (f - res.mean);
    res.stddev = finals.size() > 1 ? std::sqrt(var / (finals.size() - 1)) : 0.0;
    table.push_back(res);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& res : table) {
    if (res.kind == "fixed") best = std::max(best, res.mean);
  }
  for (auto& res : table) res.best_fixed = res.kind == "fixed" && res.mean == best;
  return table;
}

}  // namespace road
