// road: experiment workbench CLI for bandit-adaptive offline/online replay
// mixing on tabular MDPs, plus numerical validation subcommands.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "road/fixtures.hpp"
#include "road/road.hpp"

namespace {

void apply_seed_override(road::ExperimentConfig& cfg) {
  if (const char* env = std::getenv("ROAD_SEED")) {
    cfg.seeds = {static_cast<std::uint64_t>(std::stoull(env))};
  }
}

int fail(const std::string& message) {
  nlohmann::json err;
  err["error"] = message;
  std::cerr << err.dump() << '\n';
  return 1;
}

int cmd_run(const std::string& config_path, int seeds_override, const std::string& out_dir) {
  road::ExperimentConfig cfg = road::load_config(config_path);
  if (seeds_override > 0) {
    cfg.seeds.clear();
    for (int i = 0; i < seeds_override; ++i) cfg.seeds.push_back(static_cast<std::uint64_t>(i));
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  apply_seed_override(cfg);
  const auto records = road::run_experiment(cfg);
  road::export_metrics(records, cfg, cfg.out_dir);
  std::cout << "wrote " << cfg.out_dir << "/curves.csv, heatmap.csv, summary.json\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& config_paths, const std::string& out_path) {
  std::vector<road::ExperimentConfig> cfgs;
  for (const auto& path : config_paths) {
    cfgs.push_back(road::load_config(path));
    apply_seed_override(cfgs.back());
  }
  const auto table = road::compare_strategies(cfgs);
  nlohmann::json j = nlohmann::json::array();
  for (const auto& row : table) {
    j.push_back({{"name", row.name},
                 {"strategy", row.kind},
                 {"final_score_mean", row.mean},
                 {"final_score_std", row.stddev},
                 {"best_fixed", row.best_fixed}});
  }
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::ofstream out(out_path);
    out << j.dump(2) << '\n';
    std::cout << "wrote " << out_path << '\n';
  }
  return 0;
}

int cmd_grad_check(int fixtures, std::uint64_t seed, const std::string& out_path) {
  road::Rng rng(seed);
  constexpr double kRidge = 1e-8;
  constexpr double kStep = 1e-5;
  nlohmann::json rows = nlohmann::json::array();
  double worst = 0.0;
  for (int i = 0; i < fixtures; ++i) {
    const auto fx = road::random_gradient_fixture(rng);
    const double analytic = road::outer_gradient_m(fx.mdp, fx.phi, fx.targets, fx.d_off,
                                                   fx.d_on, fx.m, fx.beta, kRidge);
    const auto objective_at = [&](double m) {
      const Eigen::VectorXd d_m = m * road::flatten(fx.d_off.density) +
                                  (1.0 - m) * road::flatten(fx.d_on.density);
      const Eigen::VectorXd w = road::weighted_fqi_solve(fx.phi, fx.targets, d_m, kRidge);
      return road::outer_objective(fx.mdp, fx.phi, w, fx.beta);
    };
    const double fd = (objective_at(fx.m + kStep) - objective_at(fx.m - kStep)) / (2 * kStep);
    const double rel = std::abs(analytic - fd) / std::max(std::abs(fd), 1e-8);
    worst = std::max(worst, rel);
    rows.push_back({{"fixture", i},
                    {"analytic", analytic},
                    {"finite_difference", fd},
                    {"relative_error", rel}});
  }
  nlohmann::json report;
  report["fixtures"] = rows;
  report["worst_relative_error"] = worst;
  report["pass"] = worst <= 1e-4;
  if (out_path.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    std::ofstream out(out_path);
    out << report.dump(2) << '\n';
    std::cout << "wrote " << out_path << '\n';
  }
  return report["pass"].get<bool>() ? 0 : 1;
}

int cmd_bias_check(int draws, std::uint64_t seed, const std::string& out_path) {
  road::Rng rng(seed);
  const int A = 4;
  road::NoiseModel noise{Eigen::MatrixXd::Identity(A, A), 1.0};
  const Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(A, 0.0, 1.0);
  const Eigen::VectorXd pi = Eigen::VectorXd::Constant(A, 1.0 / A);
  const auto report = road::bias_monte_carlo(f, noise, pi, 0.01, draws, rng);
  nlohmann::json j;
  j["empirical_bias"] = report.empirical_bias;
  j["empirical_bias_se"] = report.empirical_bias_se;
  j["predicted_bias"] = report.predicted_bias;
  j["closed_form_bias"] = 0.01 * (1.0 - 1.0 / A);
  j["empirical_true_advantage"] = report.empirical_true_advantage;
  j["predicted_true_advantage"] = report.predicted_true_advantage;
  j["snr"] = report.snr;
  j["policy_clipped"] = report.policy_clipped;
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::ofstream out(out_path);
    out << j.dump(2) << '\n';
    std::cout << "wrote " << out_path << '\n';
  }
  return 0;
}

// Rebuild summary.json from an existing run directory's curves.csv.
int cmd_export(const std::string& run_dir) {
  namespace fs = std::filesystem;
  std::ifstream curves(fs::path(run_dir) / "curves.csv");
  if (!curves) return fail("cannot read " + run_dir + "/curves.csv");
  std::string line;
  std::getline(curves, line);
  std::map<std::uint64_t, std::vector<double>> evals_by_seed;
  while (std::getline(curves, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    const std::uint64_t seed = std::stoull(field);
    std::getline(ss, field, ',');  // period
    std::getline(ss, field, ',');
    evals_by_seed[seed].push_back(std::stod(field));
  }
  if (evals_by_seed.empty()) return fail("no rows in curves.csv");
  std::vector<double> finals;
  for (const auto& [seed, evals] : evals_by_seed) {
    const std::size_t tail = std::min<std::size_t>(10, evals.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < tail; ++i) acc += evals[evals.size() - 1 - i];
    finals.push_back(acc / static_cast<double>(tail));
  }
  const double mean = std::accumulate(finals.begin(), finals.end(), 0.0) / finals.size();
  double var = 0.0;
  for (const auto f : finals) var += (f - mean) * (f - mean);
  nlohmann::json summary;
  summary["n_seeds"] = finals.size();
  summary["final_score_mean"] = mean;
  summary["final_score_std"] =
      finals.size() > 1 ? std::sqrt(var / (finals.size() - 1)) : 0.0;
  std::ofstream out(fs::path(run_dir) / "summary.json");
  out << summary.dump(2) << '\n';
  std::cout << "wrote " << run_dir << "/summary.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"road: bandit-adaptive offline/online replay mixing workbench"};
  app.require_subcommand(1);

  std::string config_path, out_dir, out_path, run_dir;
  std::vector<std::string> config_paths;
  int seeds_override = 0;
  int fixtures = 20;
  int draws = 100000;
  std::uint64_t seed = 12345;

  auto* run = app.add_subcommand("run", "run one experiment config");
  run->add_option("--config", config_path, "config JSON path")->required();
  run->add_option("--seeds", seeds_override, "override with seeds 0..N-1");
  run->add_option("--out", out_dir, "output directory");

  auto* compare = app.add_subcommand("compare", "run several configs and tabulate");
  compare->add_option("--configs", config_paths, "config JSON paths")->required();
  compare->add_option("--out", out_path, "write the comparison table here");

  auto* theory = app.add_subcommand("theory", "numerical validation reports");
  theory->require_subcommand(1);
  auto* grad = theory->add_subcommand("grad-check", "analytic vs finite-difference dJ/dm");
  grad->add_option("--fixtures", fixtures, "number of random fixtures");
  grad->add_option("--seed", seed, "fixture RNG seed");
  grad->add_option("--out", out_path, "write the JSON report here");
  auto* bias = theory->add_subcommand("bias-check", "overestimation-bias Monte Carlo");
  bias->add_option("--draws", draws, "Monte Carlo draws");
  bias->add_option("--seed", seed, "RNG seed");
  bias->add_option("--out", out_path, "write the JSON report here");

  auto* exp = app.add_subcommand("export", "rebuild summary.json from a run directory");
  exp->add_option("--run", run_dir, "run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, seeds_override, out_dir);
    if (compare->parsed()) return cmd_compare(config_paths, out_path);
    if (theory->parsed()) {
      if (grad->parsed()) return cmd_grad_check(fixtures, seed, out_path);
      if (bias->parsed()) return cmd_bias_check(draws, seed, out_path);
    }
    if (exp->parsed()) return cmd_export(run_dir);
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  return 1;
}
