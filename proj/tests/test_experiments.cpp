#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "swe/experiments.hpp"

using namespace swe;
using schemes::Scheme;

namespace {

schemes::ModelConfig small_config(int modes) {
  const auto basis = spectral::build_eigenbasis(modes);
  schemes::ModelConfig config;
  config.modes = modes;
  config.alpha = 0.8;
  config.u0 = spectral::project_mode(basis, 2, 1.0 / std::numbers::sqrt2);
  config.v0 = spectral::project_mode(basis, 3, 1.0 / (2.0 * std::numbers::sqrt2));
  return config;
}

}  // namespace

TEST_CASE("estimate_order") {
  CHECK(experiments::estimate_order(4.0, 1.0, 2) == doctest::Approx(2.0).epsilon(1e-14));
  // reference error pairs reproduced by the table1 command
  CHECK(experiments::estimate_order(1.826e-3, 9.441e-4, 2) ==
        doctest::Approx(0.952).epsilon(5e-4));
  CHECK(experiments::estimate_order(1.028e-2, 5.051e-3, 2) ==
        doctest::Approx(1.025).epsilon(5e-4));
  CHECK(experiments::estimate_order(3.440e-2, 1.828e-2, 2) ==
        doctest::Approx(0.912).epsilon(5e-4));

  CHECK_THROWS_AS(experiments::estimate_order(0.0, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(experiments::estimate_order(1.0, -1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(experiments::estimate_order(1.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("mean_squared_l2") {
  SpectralField e1 = SpectralField::Zero(3);
  e1[0] = 1.0;
  CHECK(experiments::mean_squared_l2({e1}) == doctest::Approx(1.0).epsilon(1e-14));

  SpectralField zero = SpectralField::Zero(3);
  SpectralField two = SpectralField::Zero(3);
  two[1] = 2.0;
  CHECK(experiments::mean_squared_l2({zero, two}) ==
        doctest::Approx(std::numbers::sqrt2).epsilon(1e-14));

  CHECK_THROWS_AS(experiments::mean_squared_l2({}), std::invalid_argument);

  // Parseval: the spectral mean-square agrees with quadrature L2 norms
  std::mt19937 gen(8);
  std::normal_distribution<double> normal;
  const spectral::SineTransform transform(6, 24);
  std::vector<SpectralField> diffs;
  double quadrature_mean = 0.0;
  for (int s = 0; s < 10; ++s) {
    SpectralField d(6);
    for (int j = 0; j < 6; ++j) d[j] = normal(gen);
    diffs.push_back(d);
    quadrature_mean += transform.evaluate(d).squaredNorm() / transform.grid_size();
  }
  quadrature_mean = std::sqrt(quadrature_mean / 10.0);
  CHECK(experiments::mean_squared_l2(diffs) ==
        doctest::Approx(quadrature_mean).epsilon(1e-10));
}

TEST_CASE("plan validation") {
  experiments::ExperimentPlan plan;
  plan.base = small_config(4);
  plan.resolutions = {4, 8, 16};
  plan.samples = 2;
  CHECK_NOTHROW(plan.validate());

  experiments::ExperimentPlan bad = plan;
  bad.resolutions = {4, 8, 12};  // not a geometric chain with ratio 2
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = plan;
  bad.refinement = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = plan;
  bad.samples = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = plan;
  bad.resolutions.clear();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("zero-noise study: deterministic pipeline has zero estimator variance") {
  experiments::ExperimentPlan plan;
  plan.base = small_config(4);
  plan.base.with_noise = false;
  plan.base.f = schemes::Nonlinearity::zero();
  plan.scheme = Scheme::low;
  plan.resolutions = {4, 8};
  plan.samples = 3;

  const auto report = experiments::run_convergence_study(plan);
  for (double se : report.std_errors) CHECK(se == 0.0);
  for (double e : report.errors) CHECK(e > 0.0);
}

TEST_CASE("common random numbers make reruns bit-identical at any thread count") {
  experiments::ExperimentPlan plan;
  plan.base = small_config(4);
  plan.scheme = Scheme::low;
  plan.resolutions = {4, 8};
  plan.samples = 5;
  plan.seed = 42;

  plan.threads = 1;
  const auto serial = experiments::run_convergence_study(plan);
  const auto again = experiments::run_convergence_study(plan);
  plan.threads = 2;
  const auto parallel = experiments::run_convergence_study(plan);

  for (std::size_t i = 0; i < serial.errors.size(); ++i) {
    CHECK(serial.errors[i] == again.errors[i]);
    CHECK(serial.errors[i] == parallel.errors[i]);
  }
}

TEST_CASE("doubling the sample count moves errors by less than 3 standard errors") {
  experiments::ExperimentPlan plan;
  plan.base = small_config(8);
  plan.scheme = Scheme::low;
  plan.resolutions = {8, 16};
  plan.samples = 60;
  plan.seed = 7;

  const auto base = experiments::run_convergence_study(plan);
  plan.samples = 120;
  const auto doubled = experiments::run_convergence_study(plan);
  for (std::size_t i = 0; i < base.errors.size(); ++i) {
    const double tolerance = 3.0 * (base.std_errors[i] + doubled.std_errors[i]);
    CHECK(std::abs(base.errors[i] - doubled.errors[i]) <= tolerance);
  }
}

TEST_CASE("errors decrease with resolution in a small noisy study") {
  experiments::ExperimentPlan plan;
  plan.base = small_config(8);
  plan.scheme = Scheme::high;
  plan.base.rho = 1.5;
  plan.resolutions = {4, 8, 16};
  plan.samples = 40;
  plan.seed = 11;

  const auto report = experiments::run_convergence_study(plan);
  for (std::size_t i = 1; i < report.errors.size(); ++i) {
    CHECK(report.errors[i] < report.errors[i - 1]);
  }
  for (std::size_t i = 1; i < report.orders.size(); ++i) {
    CHECK(std::isfinite(report.orders[i]));
  }
}

TEST_CASE("a failing sample aborts the whole study") {
  experiments::ExperimentPlan plan;
  plan.base = small_config(4);
  plan.base.f = schemes::Nonlinearity::custom(
      [](double) -> double { throw std::runtime_error("nonlinearity blew up"); },
      1.0);
  plan.scheme = Scheme::low;
  plan.resolutions = {4, 8};
  plan.samples = 3;

  CHECK_THROWS_AS(experiments::run_convergence_study(plan), std::runtime_error);
  plan.threads = 2;
  CHECK_THROWS_AS(experiments::run_convergence_study(plan), std::runtime_error);
}

TEST_CASE("coarsen_bundle agrees with the per-mode coarsening identity") {
  const auto cov = fbm::assemble_covariance(fbm::TimeGrid(1.0, 8), 0.8, true);
  const auto fine = noise::sample_bundle(cov, 3, 21, 4);
  const auto coarse = noise::coarsen_bundle(fine, 4);

  for (int j = 0; j < 3; ++j) {
    fbm::ModeNoise mode;
    mode.grid = fine.grid;
    mode.hurst = fine.hurst;
    mode.increments = fine.increments.row(j).transpose();
    mode.weighted = fine.weighted.row(j).transpose();
    const auto expected = fbm::coarsen(mode, 4);
    CHECK((coarse.increments.row(j).transpose() - expected.increments).norm() == 0.0);
    CHECK((coarse.weighted.row(j).transpose() - expected.weighted).norm() == 0.0);
  }
}

TEST_CASE("deterministic_order_study enforces its preconditions") {
  experiments::ExperimentPlan plan;
  plan.base = small_config(4);
  plan.base.f = schemes::Nonlinearity::zero();
  plan.resolutions = {32, 64};
  CHECK_THROWS_AS(experiments::deterministic_order_study(plan), std::invalid_argument);

  plan.base.with_noise = false;
  plan.base.f = schemes::Nonlinearity::sine();
  CHECK_THROWS_AS(experiments::deterministic_order_study(plan), std::invalid_argument);

  plan.base.f = schemes::Nonlinearity::zero();
  const auto report = experiments::deterministic_order_study(plan);
  CHECK(report.errors.size() == 2);
  CHECK(report.errors[1] < report.errors[0]);
}

TEST_CASE("fit_loglog_slope recovers a synthetic power law") {
  const std::vector<int> resolutions = {16, 32, 64, 128};
  std::vector<double> errors;
  for (int n : resolutions) errors.push_back(3.7 * std::pow(0.5 / n, 1.75));
  CHECK(experiments::fit_loglog_slope(resolutions, errors, 0.5) ==
        doctest::Approx(1.75).epsilon(1e-12));
  CHECK_THROWS_AS(experiments::fit_loglog_slope({4}, {1.0}, 0.5),
                  std::invalid_argument);
}
