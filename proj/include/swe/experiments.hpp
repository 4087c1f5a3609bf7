#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "swe/schemes.hpp"

namespace swe::experiments {

// Strong-convergence study: one fine noise path per sample, coarsened to every
// requested resolution (common random numbers), terminal-time comparison of
// adjacent resolutions.
struct ExperimentPlan {
  schemes::ModelConfig base;  // base.steps is ignored
  schemes::Scheme scheme = schemes::Scheme::low;
  std::vector<int> resolutions;  // ascending, each = refinement * previous
  int refinement = 2;            // a
  int samples = 200;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
};

struct RateReport {
  schemes::Scheme scheme = schemes::Scheme::low;
  double alpha = 0, hurst = 0, rho = 0, horizon = 0;
  int modes = 0, samples = 0, refinement = 0;
  std::uint64_t seed = 0;
  std::vector<int> resolutions;
  std::vector<double> errors;      // e_N = sqrt(mean_s ||u^{aN}_T - u^N_T||^2)
  std::vector<double> std_errors;  // delta-method standard error of e_N
  std::vector<double> orders;      // orders[i] = ln(e[i-1]/e[i]) / ln a; orders[0] = NaN
  double wall_seconds = 0.0;
};

// ln(e_coarse / e_fine) / ln(a); both errors must be positive.
double estimate_order(double error_coarse, double error_fine, int refinement);

// sqrt of the sample mean of ||difference||^2, fixed (compensated) summation
// order over the sample index.
double mean_squared_l2(const std::vector<SpectralField>& differences);

RateReport run_convergence_study(const ExperimentPlan& plan);

// Errors of the noiseless, f == 0 schemes against the exact propagator.
RateReport deterministic_order_study(const ExperimentPlan& plan);

// Least-squares slope of ln(error) against ln(tau).
double fit_loglog_slope(const std::vector<int>& resolutions,
                        const std::vector<double>& errors, double horizon);

// CSV columns: alpha,H,rho,M,N,samples,error,stderr,order. With
// `scheme_column`, a leading scheme column is added.
void write_csv(std::ostream& out, const std::vector<RateReport>& reports,
               bool scheme_column = false);

}  // namespace swe::experiments
