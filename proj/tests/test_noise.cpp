#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "swe/noise.hpp"

using namespace swe;

namespace {

std::vector<double> grid_nodes(const fbm::TimeGrid& grid) {
  std::vector<double> nodes(grid.steps + 1);
  for (int k = 0; k <= grid.steps; ++k) nodes[k] = grid.node(k);
  return nodes;
}

}  // namespace

TEST_CASE("NoiseParams: weights and dispersion") {
  const auto basis = spectral::build_eigenbasis(4);
  const noise::NoiseParams params(basis, 0.8, 0.25);
  for (int j = 0; j < 4; ++j) {
    CHECK(params.sigma[j] ==
          doctest::Approx(std::pow(basis.eigenvalues[j], -0.25)).epsilon(1e-14));
    CHECK(params.omega[j] ==
          doctest::Approx(std::pow(basis.eigenvalues[j], 0.4)).epsilon(1e-14));
    if (j > 0) {
      CHECK(params.sigma[j] <= params.sigma[j - 1]);
      CHECK(params.omega[j] > params.omega[j - 1]);
    }
  }
  CHECK_THROWS_AS(noise::NoiseParams(basis, 0.0, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(noise::NoiseParams(basis, 1.5, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(noise::NoiseParams(basis, 0.5, -0.1), std::invalid_argument);
}

TEST_CASE("accumulator: zero input gives zero fields") {
  const auto basis = spectral::build_eigenbasis(3);
  const noise::NoiseParams params(basis, 0.7, 0.3);
  const fbm::TimeGrid grid(1.0, 4);
  noise::ConvolutionAccumulator acc(params, grid, true);
  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(3);
  for (int k = 0; k < 4; ++k) acc.absorb_step(k, zeros, zeros);
  CHECK(acc.low_order(1.0).norm() == 0.0);
  CHECK(acc.high_order(1.0).norm() == 0.0);
  CHECK(acc.velocity(1.0).norm() == 0.0);
}

TEST_CASE("accumulator: one-term sums match the hand formulas") {
  const auto basis = spectral::build_eigenbasis(1);
  const noise::NoiseParams params(basis, 0.9, 0.4);
  const double sigma = params.sigma[0];
  const double omega = params.omega[0];
  const fbm::TimeGrid grid(0.3, 1);
  const double t1 = grid.node(1);

  noise::ConvolutionAccumulator acc(params, grid, true);
  Eigen::VectorXd d(1), w(1);
  d << 0.37;
  w << -0.12;
  acc.absorb_step(0, d, w);

  CHECK(acc.low_order(t1)[0] ==
        doctest::Approx(sigma / omega * std::sin(omega * t1) * d[0]).epsilon(1e-14));
  CHECK(acc.high_order(t1)[0] ==
        doctest::Approx(sigma * (std::sin(omega * t1) / omega * d[0] -
                                 std::cos(omega * t1) * w[0]))
            .epsilon(1e-14));
  CHECK(acc.velocity(t1)[0] ==
        doctest::Approx(sigma * std::cos(omega * t1) * d[0]).epsilon(1e-14));
}

TEST_CASE("accumulator equals the naive sums at every step") {
  std::mt19937 gen(99);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> alpha_dist(0.2, 1.0);
  std::uniform_real_distribution<double> rho_dist(0.0, 1.5);
  std::uniform_real_distribution<double> horizon_dist(0.25, 2.0);

  const int modes = 16, steps = 64;
  const auto basis = spectral::build_eigenbasis(modes);

  for (int trial = 0; trial < 10; ++trial) {
    const noise::NoiseParams params(basis, alpha_dist(gen), rho_dist(gen));
    const fbm::TimeGrid grid(horizon_dist(gen), steps);
    const auto nodes = grid_nodes(grid);

    Eigen::MatrixXd increments(modes, steps), weighted(modes, steps);
    for (int j = 0; j < modes; ++j) {
      for (int k = 0; k < steps; ++k) {
        increments(j, k) = normal(gen);
        weighted(j, k) = normal(gen);
      }
    }

    noise::ConvolutionAccumulator acc(params, grid, true);
    for (int n = 0; n < steps; ++n) {
      acc.absorb_step(n, increments.col(n), weighted.col(n));
      const double t = grid.node(n + 1);

      const auto low = acc.low_order(t);
      const auto low_ref =
          oracle::naive_low_order(params.sigma, params.omega, nodes, increments, n, t);
      CHECK((low - low_ref).norm() <= 1e-12 * (1.0 + low_ref.norm()));

      const auto high = acc.high_order(t);
      const auto high_ref = oracle::naive_high_order(params.sigma, params.omega, nodes,
                                                     increments, weighted, n, t);
      CHECK((high - high_ref).norm() <= 1e-12 * (1.0 + high_ref.norm()));

      const auto vel = acc.velocity(t);
      const auto vel_ref =
          oracle::naive_velocity(params.sigma, params.omega, nodes, increments, n, t);
      CHECK((vel - vel_ref).norm() <= 1e-12 * (1.0 + vel_ref.norm()));
    }
  }
}

TEST_CASE("accumulator: ordering and mode checks") {
  const auto basis = spectral::build_eigenbasis(2);
  const noise::NoiseParams params(basis, 0.8, 0.25);
  const fbm::TimeGrid grid(1.0, 4);
  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(2);

  noise::ConvolutionAccumulator weighted_acc(params, grid, true);
  CHECK_THROWS_AS(weighted_acc.absorb_step(1, zeros, zeros), std::invalid_argument);
  CHECK_THROWS_AS(weighted_acc.absorb_step(0, zeros), std::invalid_argument);
  weighted_acc.absorb_step(0, zeros, zeros);
  CHECK_THROWS_AS(weighted_acc.absorb_step(0, zeros, zeros), std::invalid_argument);
  CHECK(weighted_acc.last_absorbed() == 0);

  noise::ConvolutionAccumulator plain_acc(params, grid, false);
  plain_acc.absorb_step(0, zeros);
  CHECK_THROWS_AS(plain_acc.high_order(0.5), std::invalid_argument);
  CHECK_THROWS_AS(plain_acc.absorb_step(1, zeros, zeros), std::invalid_argument);
  CHECK_NOTHROW(plain_acc.low_order(0.5));

  Eigen::VectorXd ones = Eigen::VectorXd::Ones(2);
  noise::ConvolutionAccumulator cycling(params, grid, false);
  cycling.absorb_step(0, ones);
  CHECK(cycling.low_order(0.5).norm() > 0.0);
  cycling.reset();
  CHECK(cycling.last_absorbed() == -1);
  CHECK(cycling.low_order(0.5).norm() == 0.0);
  CHECK_NOTHROW(cycling.absorb_step(0, ones));
}

TEST_CASE("sample_bundle / coarsen_bundle shapes and determinism") {
  const auto cov = fbm::assemble_covariance(fbm::TimeGrid(0.5, 4), 0.8, true);
  const auto a = noise::sample_bundle(cov, 3, 17, 2);
  const auto b = noise::sample_bundle(cov, 3, 17, 2);
  CHECK(a.modes() == 3);
  CHECK(a.steps() == 4);
  CHECK((a.increments - b.increments).norm() == 0.0);
  CHECK((a.weighted - b.weighted).norm() == 0.0);

  // mode rows reproduce the per-mode sampler exactly
  rng::NormalStream stream(17, 2, 1);
  const auto mode1 = fbm::sample_mode_noise(cov, stream);
  CHECK((a.increments.row(1).transpose() - mode1.increments).norm() == 0.0);
  CHECK((a.weighted.row(1).transpose() - mode1.weighted).norm() == 0.0);

  CHECK_THROWS_AS(noise::coarsen_bundle(a, 3), std::invalid_argument);
  CHECK_THROWS_AS(noise::coarsen_bundle(a, 1), std::invalid_argument);
}

TEST_CASE("the mean of the low-order convolution vanishes and its variance matches "
          "direct kernel quadrature") {
  const int modes = 2, steps = 4;
  const auto basis = spectral::build_eigenbasis(modes);
  const noise::NoiseParams params(basis, 0.8, 0.3);
  const fbm::TimeGrid grid(1.0, steps);
  const double hurst = 0.7;
  const double horizon = grid.horizon;
  const auto cov = fbm::assemble_covariance(grid, hurst, false);

  const int draws = 10000;
  Eigen::MatrixXd values(modes, draws);
  for (int s = 0; s < draws; ++s) {
    noise::ConvolutionAccumulator acc(params, grid, false);
    const auto bundle = noise::sample_bundle(cov, modes, 512, s);
    for (int k = 0; k < steps; ++k) acc.absorb_step(k, bundle.increments.col(k));
    values.col(s) = acc.low_order(horizon);
  }

  for (int j = 0; j < modes; ++j) {
    const double mean = values.row(j).mean();
    const double var =
        (values.row(j).array() - mean).square().sum() / (draws - 1.0);

    // Var = sigma^2/omega^2 sum_{k,l} sin(w(T-t_k)) sin(w(T-t_l)) K_{kl},
    // K_{kl} = H(2H-1) iint over the cells of |s-r|^{2H-2} (frozen kernel)
    double theory = 0.0;
    for (int k = 0; k < steps; ++k) {
      for (int l = 0; l < steps; ++l) {
        const double kernel = oracle::kernel_covariance(
            grid.node(k), grid.node(k + 1), grid.node(l), grid.node(l + 1), hurst,
            false, false);
        theory += std::sin(params.omega[j] * (horizon - grid.node(k))) *
                  std::sin(params.omega[j] * (horizon - grid.node(l))) * kernel;
      }
    }
    theory *= params.sigma[j] * params.sigma[j] / (params.omega[j] * params.omega[j]);

    const double se_mean = std::sqrt(var / draws);
    CHECK(std::abs(mean) <= 3.0 * se_mean);
    const double se_var = theory * std::sqrt(2.0 / (draws - 1.0));
    CHECK(std::abs(var - theory) <= 3.0 * se_var);
  }
}
