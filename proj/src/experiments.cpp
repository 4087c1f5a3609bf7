#include "swe/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace swe::experiments {

namespace {

// Neumaier compensated sum in index order; the fixed order keeps aggregation
// bit-identical across thread counts (samples are stored per-slot first).
double compensated_sum(const Eigen::Ref<const Eigen::VectorXd>& values) {
  double sum = 0.0, comp = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = values[i];
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

void parallel_over_samples(int samples, int threads,
                           const std::function<void(int)>& body) {
  int n_threads = threads > 0 ? threads
                              : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  n_threads = std::min(n_threads, samples);

  if (n_threads == 1) {
    for (int s = 0; s < samples; ++s) body(s);
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (;;) {
      const int s = next.fetch_add(1);
      if (s >= samples) return;
      try {
        body(s);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);  // sample failures abort the study
}

struct ErrorStats {
  double error;
  double std_error;
};

// e = sqrt(mean X), X_s = ||diff_s||^2; se(e) = se(mean X) / (2 e) (delta method).
ErrorStats error_from_squares(const Eigen::Ref<const Eigen::VectorXd>& squares) {
  const auto n = static_cast<double>(squares.size());
  const double mean = compensated_sum(squares) / n;
  const double error = std::sqrt(mean);
  double std_error = 0.0;
  if (squares.size() > 1 && error > 0.0) {
    const Eigen::VectorXd centered = squares.array() - mean;
    const double var = compensated_sum(centered.array().square()) / (n - 1.0);
    std_error = std::sqrt(var / n) / (2.0 * error);
  }
  return {error, std_error};
}

void fill_orders(RateReport& report) {
  report.orders.assign(report.resolutions.size(),
                       std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 1; i < report.resolutions.size(); ++i) {
    report.orders[i] =
        estimate_order(report.errors[i - 1], report.errors[i], report.refinement);
  }
}

}  // namespace

void ExperimentPlan::validate() const {
  if (refinement < 2) {
    throw std::invalid_argument("ExperimentPlan: refinement factor must be >= 2");
  }
  if (samples < 1) {
    throw std::invalid_argument("ExperimentPlan: samples must be >= 1");
  }
  if (resolutions.empty()) {
    throw std::invalid_argument("ExperimentPlan: resolutions must be non-empty");
  }
  for (std::size_t i = 0; i < resolutions.size(); ++i) {
    if (resolutions[i] < 1) {
      throw std::invalid_argument("ExperimentPlan: resolutions must be positive");
    }
    if (i > 0 && resolutions[i] != refinement * resolutions[i - 1]) {
      throw std::invalid_argument(
          "ExperimentPlan: resolutions must form a geometric chain with ratio a");
    }
  }
  schemes::ModelConfig probe = base;
  probe.steps = resolutions.back();
  probe.validate();
}

double estimate_order(double error_coarse, double error_fine, int refinement) {
  if (!(error_coarse > 0.0) || !(error_fine > 0.0)) {
    throw std::invalid_argument("estimate_order: errors must be positive");
  }
  if (refinement < 2) {
    throw std::invalid_argument("estimate_order: refinement factor must be >= 2");
  }
  return std::log(error_coarse / error_fine) / std::log(static_cast<double>(refinement));
}

double mean_squared_l2(const std::vector<SpectralField>& differences) {
  if (differences.empty()) {
    throw std::invalid_argument("mean_squared_l2: needs at least one sample");
  }
  Eigen::VectorXd squares(differences.size());
  for (std::size_t s = 0; s < differences.size(); ++s) {
    squares[static_cast<Eigen::Index>(s)] = differences[s].squaredNorm();
  }
  return std::sqrt(compensated_sum(squares) / static_cast<double>(differences.size()));
}

RateReport run_convergence_study(const ExperimentPlan& plan) {
  plan.validate();
  const auto start = std::chrono::steady_clock::now();

  const auto& base = plan.base;
  const int a = plan.refinement;
  const int n_res = static_cast<int>(plan.resolutions.size());
  const int n_fine = a * plan.resolutions.back();
  const bool need_weighted = plan.scheme == schemes::Scheme::high;

  const spectral::EigenBasis basis = spectral::build_eigenbasis(base.modes);
  std::unique_ptr<spectral::SineTransform> transform;
  if (base.f.kind != schemes::Nonlinearity::Kind::zero) {
    transform = std::make_unique<spectral::SineTransform>(base.modes, 4 * base.modes);
  }

  // One covariance/factorization per (grid, H); shared across modes and samples.
  std::unique_ptr<fbm::NoiseCovariance> cov;
  if (base.with_noise) {
    cov = std::make_unique<fbm::NoiseCovariance>(fbm::assemble_covariance(
        fbm::TimeGrid(base.horizon, n_fine), base.hurst, need_weighted));
  }

  std::vector<int> run_list = plan.resolutions;
  run_list.push_back(n_fine);

  Eigen::MatrixXd squares(n_res, plan.samples);  // per-sample slots, fixed layout
  parallel_over_samples(plan.samples, plan.threads, [&](int s) {
    noise::NoiseBundle fine;
    if (base.with_noise) {
      fine = noise::sample_bundle(*cov, base.modes, plan.seed,
                                  static_cast<std::uint64_t>(s));
    }
    std::vector<SpectralField> terminal(run_list.size());
    for (std::size_t r = 0; r < run_list.size(); ++r) {
      const int n_steps = run_list[r];
      schemes::ModelConfig config = base;
      config.steps = n_steps;
      if (base.with_noise) {
        const int factor = n_fine / n_steps;
        const noise::NoiseBundle coarse =
            factor == 1 ? fine : noise::coarsen_bundle(fine, factor);
        terminal[r] =
            schemes::run(config, plan.scheme, basis, transform.get(), &coarse).u;
      } else {
        terminal[r] = schemes::run(config, plan.scheme, basis, transform.get(),
                                   nullptr).u;
      }
    }
    for (int i = 0; i < n_res; ++i) {
      // run_list[i] = N, run_list[i+1] = aN (the chain ends in n_fine)
      squares(i, s) = (terminal[i + 1] - terminal[i]).squaredNorm();
    }
  });

  RateReport report;
  report.scheme = plan.scheme;
  report.alpha = base.alpha;
  report.hurst = base.hurst;
  report.rho = base.rho;
  report.horizon = base.horizon;
  report.modes = base.modes;
  report.samples = plan.samples;
  report.refinement = a;
  report.seed = plan.seed;
  report.resolutions = plan.resolutions;
  report.errors.resize(n_res);
  report.std_errors.resize(n_res);
  for (int i = 0; i < n_res; ++i) {
    const ErrorStats stats = error_from_squares(squares.row(i).transpose());
    report.errors[i] = stats.error;
    report.std_errors[i] = stats.std_error;
  }
  fill_orders(report);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

RateReport deterministic_order_study(const ExperimentPlan& plan) {
  if (plan.base.with_noise) {
    throw std::invalid_argument("deterministic_order_study: requires with_noise=false");
  }
  if (plan.base.f.kind != schemes::Nonlinearity::Kind::zero) {
    throw std::invalid_argument("deterministic_order_study: requires f == 0");
  }
  const auto start = std::chrono::steady_clock::now();
  ExperimentPlan checked = plan;
  checked.samples = 1;
  checked.validate();

  const auto& base = plan.base;
  const spectral::EigenBasis basis = spectral::build_eigenbasis(base.modes);
  const auto exact = schemes::exact_deterministic(basis, base.alpha, base.u0, base.v0,
                                                  base.horizon);

  RateReport report;
  report.scheme = plan.scheme;
  report.alpha = base.alpha;
  report.hurst = base.hurst;
  report.rho = base.rho;
  report.horizon = base.horizon;
  report.modes = base.modes;
  report.samples = 1;
  report.refinement = plan.refinement;
  report.seed = plan.seed;
  report.resolutions = plan.resolutions;
  for (int n_steps : plan.resolutions) {
    schemes::ModelConfig config = base;
    config.steps = n_steps;
    const auto result = schemes::run(config, plan.scheme, basis, nullptr, nullptr);
    report.errors.push_back((result.u - exact.first).norm());
    report.std_errors.push_back(0.0);
  }
  fill_orders(report);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

double fit_loglog_slope(const std::vector<int>& resolutions,
                        const std::vector<double>& errors, double horizon) {
  if (resolutions.size() != errors.size() || resolutions.size() < 2) {
    throw std::invalid_argument("fit_loglog_slope: need matching lists, size >= 2");
  }
  const auto n = static_cast<double>(resolutions.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < resolutions.size(); ++i) {
    const double x = std::log(horizon / resolutions[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void write_csv(std::ostream& out, const std::vector<RateReport>& reports,
               bool scheme_column) {
  out << (scheme_column ? "scheme,alpha,H,rho,M,N,samples,error,stderr,order\n"
                        : "alpha,H,rho,M,N,samples,error,stderr,order\n");
  char buf[256];
  for (const auto& report : reports) {
    for (std::size_t i = 0; i < report.resolutions.size(); ++i) {
      if (scheme_column) {
        out << schemes::scheme_name(report.scheme) << ',';
      }
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%d,%d,%d,%.17g,%.17g",
                    report.alpha, report.hurst, report.rho, report.modes,
                    report.resolutions[i], report.samples, report.errors[i],
                    report.std_errors[i]);
      out << buf;
      if (i > 0 && std::isfinite(report.orders[i])) {
        std::snprintf(buf, sizeof(buf), ",%.17g\n", report.orders[i]);
        out << buf;
      } else {
        out << ",\n";
      }
    }
  }
}

}  // namespace swe::experiments
