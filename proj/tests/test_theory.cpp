#include <catch2/catch_amalgamated.hpp>

#include "road/fixtures.hpp"
#include "road/theory.hpp"

using namespace road;

namespace {

Mdp single_state_two_actions() {
  std::vector<std::vector<Eigen::VectorXd>> p(1);
  p[0].push_back(Eigen::VectorXd::Ones(1));
  p[0].push_back(Eigen::VectorXd::Ones(1));
  return Mdp(std::move(p), Eigen::MatrixXd::Zero(1, 2), Eigen::VectorXd::Ones(1), 0.9,
             {false});
}

// Finite-difference oracle for dJ_out/dm through the weighted solve.
double fd_gradient(const GradientFixture& fx, double ridge, double h) {
  const auto objective_at = [&](double m) {
    const Eigen::VectorXd d_m =
        m * flatten(fx.d_off.density) + (1.0 - m) * flatten(fx.d_on.density);
    const Eigen::VectorXd w = weighted_fqi_solve(fx.phi, fx.targets, d_m, ridge);
    return outer_objective(fx.mdp, fx.phi, w, fx.beta);
  };
  return (objective_at(fx.m + h) - objective_at(fx.m - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("weighted solve interpolates with full tabular features") {
  const int n = 6;
  const Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd y = Eigen::VectorXd::Random(n);
  Eigen::VectorXd d = Eigen::VectorXd::Constant(n, 1.0 / n);
  const Eigen::VectorXd w = weighted_fqi_solve(phi, y, d, 0.0);
  CHECK((w - y).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("weighted solve scalar case and ridge error") {
  // single feature, weight concentrated on one pair
  Eigen::MatrixXd phi(3, 1);
  phi << 2.0, 5.0, -1.0;
  Eigen::VectorXd y(3);
  y << 4.0, 0.0, 0.0;
  Eigen::VectorXd d = Eigen::VectorXd::Zero(3);
  d(0) = 1.0;
  const Eigen::VectorXd w = weighted_fqi_solve(phi, y, d, 0.0);
  CHECK_THAT(w(0), Catch::Matchers::WithinAbs(2.0, 1e-12));  // y / phi at the pair

  // rank-deficient weighted features at ridge=0 must raise
  Eigen::MatrixXd phi2(3, 2);
  phi2 << 1.0, 0.0, 0.0, 1.0, 0.0, 0.0;
  Eigen::VectorXd d2 = Eigen::VectorXd::Zero(3);
  d2(0) = 1.0;  // second column never weighted
  CHECK_THROWS_WITH(weighted_fqi_solve(phi2, y, d2, 0.0),
                    Catch::Matchers::ContainsSubstring("ridge"));
}

TEST_CASE("weighted solve is invariant to positive rescaling of d_m at ridge=0") {
  Rng rng(1);
  const Eigen::MatrixXd phi = random_features(8, 3, rng);
  Eigen::VectorXd y = Eigen::VectorXd::Random(8);
  Eigen::VectorXd d = (Eigen::VectorXd::Random(8).array() + 1.5).matrix();
  const Eigen::VectorXd w1 = weighted_fqi_solve(phi, y, d, 0.0);
  const Eigen::VectorXd w2 = weighted_fqi_solve(phi, y, 13.7 * d, 0.0);
  CHECK((w1 - w2).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("LinearQ rejects rank-deficient feature matrices") {
  Eigen::MatrixXd phi(4, 2);
  phi.col(0) << 1, 2, 3, 4;
  phi.col(1) = 2.0 * phi.col(0);
  CHECK_THROWS_AS(LinearQ::from_features(phi), std::invalid_argument);
  phi.col(1) << 0, 1, 0, 1;
  CHECK_NOTHROW(LinearQ::from_features(phi));
}

TEST_CASE("outer objective closed forms") {
  const Mdp mdp = single_state_two_actions();
  const Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(2, 2);

  CHECK(outer_objective(mdp, phi, Eigen::VectorXd::Zero(2), 1.0) == 0.0);

  // f = (1, 0), beta = 1: J = E_{softmax(f)}[f] = e / (1 + e)
  Eigen::VectorXd w(2);
  w << 1.0, 0.0;
  const double expected = std::exp(1.0) / (1.0 + std::exp(1.0));
  CHECK_THAT(outer_objective(mdp, phi, w, 1.0),
             Catch::Matchers::WithinAbs(expected, 1e-12));

  // a uniform shift of f adds exactly that constant
  Eigen::MatrixXd phi_shift(2, 3);
  phi_shift << 1.0, 0.0, 1.0, 0.0, 1.0, 1.0;
  Eigen::VectorXd w3(3);
  w3 << 1.0, 0.0, 0.0;
  const double base = outer_objective(mdp, phi_shift, w3, 1.0);
  w3(2) = 5.0;
  CHECK_THAT(outer_objective(mdp, phi_shift, w3, 1.0),
             Catch::Matchers::WithinAbs(base + 5.0, 1e-10));
}

TEST_CASE("mixing gradient vanishes when d_on equals d_off") {
  Rng rng(2);
  GradientFixture fx = random_gradient_fixture(rng);
  fx.d_on = fx.d_off;
  const double g = outer_gradient_m(fx.mdp, fx.phi, fx.targets, fx.d_off, fx.d_on, fx.m,
                                    fx.beta, 1e-8);
  CHECK(std::abs(g) < 1e-10);
}

TEST_CASE("mixing gradient vanishes at zero TD residual") {
  Rng rng(3);
  const Mdp mdp = random_mdp(3, 2, 0.9, rng);
  const Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(6, 6);
  Eigen::VectorXd targets = Eigen::VectorXd::Random(6);  // representable exactly
  const OccupancyMeasure d_off = exact_occupancy(mdp, random_policy(3, 2, rng));
  const OccupancyMeasure d_on = exact_occupancy(mdp, random_policy(3, 2, rng));
  const double g = outer_gradient_m(mdp, phi, targets, d_off, d_on, 0.4, 1.3, 1e-10);
  CHECK(std::abs(g) < 1e-10);
}

TEST_CASE("analytic mixing gradient matches central finite differences") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const GradientFixture fx = random_gradient_fixture(rng);
    const double analytic = outer_gradient_m(fx.mdp, fx.phi, fx.targets, fx.d_off, fx.d_on,
                                             fx.m, fx.beta, 1e-8);
    const double fd = fd_gradient(fx, 1e-8, 1e-5);
    const double rel = std::abs(analytic - fd) / std::max(std::abs(fd), 1e-8);
    CHECK(rel <= 1e-4);
  }
  CHECK_THROWS_AS(
      [&] {
        const GradientFixture fx = random_gradient_fixture(rng);
        outer_gradient_m(fx.mdp, fx.phi, fx.targets, fx.d_off, fx.d_on, 1.0, 1.0, 1e-8);
      }(),
      std::invalid_argument);
}

TEST_CASE("bias Monte Carlo degenerate kernels") {
  const int A = 4;
  const Eigen::VectorXd pi = Eigen::VectorXd::Constant(A, 0.25);
  const Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(A, 0.0, 1.0);
  Rng rng(5);

  SECTION("zero amplitude gives exactly zero bias") {
    const NoiseModel silent{Eigen::MatrixXd::Identity(A, A), 0.0};
    const auto report = bias_monte_carlo(f, silent, pi, 0.01, 100, rng);
    CHECK(report.empirical_bias == 0.0);
    CHECK(report.predicted_bias == 0.0);
    // with no noise the linear policy-gradient model is exact
    CHECK_THAT(report.empirical_true_advantage,
               Catch::Matchers::WithinAbs(report.predicted_true_advantage, 1e-15));
  }

  SECTION("fully correlated kernel gives a constant field and zero variance") {
    const NoiseModel flat{Eigen::MatrixXd::Constant(A, A, 1.0), 1.0};
    const auto report = bias_monte_carlo(f, flat, pi, 0.01, 20000, rng);
    CHECK(report.predicted_bias <= 1e-12);
    CHECK(std::abs(report.empirical_bias) <= 3.0 * report.empirical_bias_se + 1e-12);
  }

  SECTION("non-PSD kernel rejected") {
    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(A, A);
    bad(0, 0) = -1.0;
    CHECK_THROWS_AS(bias_monte_carlo(f, NoiseModel{bad, 1.0}, pi, 0.01, 10, rng),
                    std::invalid_argument);
  }
}

TEST_CASE("isotropic kernel matches the closed-form bias") {
  const int A = 4;
  const Eigen::VectorXd pi = Eigen::VectorXd::Constant(A, 0.25);
  const Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(A, 0.0, 1.0);
  const NoiseModel iso{Eigen::MatrixXd::Identity(A, A), 1.0};
  Rng rng(6);
  const auto report = bias_monte_carlo(f, iso, pi, 0.01, 100000, rng);
  const double closed_form = 0.01 * (1.0 - 0.25);  // beta * sigma^2 (1 - sum pi^2)
  CHECK(std::abs(report.empirical_bias - closed_form) <= 3.0 * report.empirical_bias_se);
  CHECK_THAT(report.predicted_bias, Catch::Matchers::WithinAbs(closed_form, 5e-4));
}

TEST_CASE("true advantage prediction error shrinks with beta") {
  const int A = 5;
  const Eigen::VectorXd pi = Eigen::VectorXd::Constant(A, 0.2);
  Eigen::VectorXd f(A);
  f << 0.0, 1.0, 0.5, -0.5, 2.0;
  const NoiseModel iso{Eigen::MatrixXd::Identity(A, A), 0.25};
  for (const double beta : {0.05, 0.025}) {
    Rng rng(7);  // common random numbers across betas
    const auto report = bias_monte_carlo(f, iso, pi, beta, 50000, rng);
    CHECK(std::abs(report.empirical_true_advantage - report.predicted_true_advantage) <=
          3.0 * report.empirical_true_advantage_se);
  }
}

TEST_CASE("characteristic length") {
  const int n = 10000;
  const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(n, 0.0, 2.0 * M_PI);

  SECTION("constant function reports the infinity sentinel") {
    CHECK(std::isinf(characteristic_length(Eigen::VectorXd::Constant(n, 3.0), grid)));
  }

  SECTION("sin(2x) has length 1/2 within 2%") {
    Eigen::VectorXd values(n);
    for (int i = 0; i < n; ++i) values(i) = std::sin(2.0 * grid(i));
    const double lambda = characteristic_length(values, grid);
    CHECK_THAT(lambda, Catch::Matchers::WithinRel(0.5, 0.02));
    // homogeneity: scaling values leaves lambda unchanged
    CHECK_THAT(characteristic_length(5.0 * values, grid),
               Catch::Matchers::WithinAbs(lambda, 1e-12));
  }

  CHECK_THROWS_AS(characteristic_length(Eigen::VectorXd::Ones(2), grid.head(2)),
                  std::invalid_argument);
}

namespace {

// Stationary Gaussian field eps(x) = a cos(wx) + b sin(wx), a,b ~ N(0, s2):
// covariance s2 cos(w (x - x')), characteristic length exactly 1/w.
NoiseModel cosine_noise(const Eigen::VectorXd& grid, double omega, double s2) {
  const Eigen::Index n = grid.size();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = s2 * std::cos(omega * (grid(i) - grid(j)));
  }
  return NoiseModel{std::move(k), 1.0};
}

}  // namespace

TEST_CASE("snr prediction formula symmetry") {
  const int n = 400;
  const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(n, -M_PI, M_PI);
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) f(i) = std::sin(grid(i));

  SECTION("zero amplitude gives rho = 0") {
    NoiseModel silent = cosine_noise(grid, 1.0, 1.0);
    silent.amplitude = 0.0;
    CHECK(snr_prediction(f, silent, grid) == 0.0);
  }

  SECTION("matched lengths and amplitudes give rho = 1") {
    // noise with the same frequency and mean-square amplitude as f
    const NoiseModel matched = cosine_noise(grid, 1.0, f.squaredNorm() / n);
    CHECK_THAT(snr_prediction(f, matched, grid), Catch::Matchers::WithinRel(1.0, 0.02));
  }

  SECTION("smooth signal vs rough noise predicts rho = 100 and MC agrees within 2x") {
    const double s2 = f.squaredNorm() / n;  // equal amplitudes
    const NoiseModel rough = cosine_noise(grid, 10.0, s2);
    const double rho = snr_prediction(f, rough, grid);
    CHECK_THAT(rho, Catch::Matchers::WithinRel(100.0, 0.05));

    // localized base policy so the first-order expansion applies
    Eigen::VectorXd pi(n);
    const double center = 0.5, width = 0.05;
    for (int i = 0; i < n; ++i) {
      const double z = (grid(i) - center) / width;
      pi(i) = std::exp(-0.5 * z * z);
    }
    pi /= pi.sum();
    Rng rng(8);
    const auto report = bias_monte_carlo(f, rough, pi, 0.01, 40000, rng);
    CHECK(report.snr >= rho / 2.0);
    CHECK(report.snr <= rho * 2.0);
  }
}
