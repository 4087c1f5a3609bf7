#include "swe/fbm.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace swe::fbm {

namespace {

// |x|^{2H}
double pow2h(double x, double hurst) { return std::pow(std::abs(x), 2.0 * hurst); }

// int_p^q |s - c|^{2H} ds
double abs_power_integral(double c, double p, double q, double hurst) {
  const double e = 2.0 * hurst + 1.0;
  if (c <= p) {
    return (std::pow(q - c, e) - std::pow(p - c, e)) / e;
  }
  if (c >= q) {
    return (std::pow(c - p, e) - std::pow(c - q, e)) / e;
  }
  return (std::pow(c - p, e) + std::pow(q - c, e)) / e;
}

// fBm covariance R(s, t) = (|s|^{2H} + |t|^{2H} - |s-t|^{2H}) / 2
double fbm_cov(double s, double t, double hurst) {
  return 0.5 * (pow2h(s, hurst) + pow2h(t, hurst) - pow2h(s - t, hurst));
}

}  // namespace

TimeGrid::TimeGrid(double horizon_, int steps_) : horizon(horizon_), steps(steps_) {
  if (steps < 1) {
    throw std::invalid_argument("TimeGrid: steps must be >= 1");
  }
  if (!(horizon > 0.0)) {
    throw std::invalid_argument("TimeGrid: horizon must be positive");
  }
}

void validate_hurst(double hurst) {
  if (!(hurst > 0.5) || !(hurst < 1.0)) {
    throw std::invalid_argument("hurst parameter must lie in (1/2, 1)");
  }
}

double increment_covariance(int j, int k, const TimeGrid& grid, double hurst) {
  validate_hurst(hurst);
  if (j < 0 || k < 0 || j >= grid.steps || k >= grid.steps) {
    throw std::invalid_argument("increment_covariance: index out of range");
  }
  // evaluate on the canonical (min, max) pair so that the result is exactly
  // symmetric in floating point
  const int lo = std::min(j, k);
  const int hi = std::max(j, k);
  const double a = grid.node(lo), b = grid.node(lo + 1);
  const double c = grid.node(hi), d = grid.node(hi + 1);
  return 0.5 * (pow2h(b - c, hurst) + pow2h(a - d, hurst) - pow2h(a - c, hurst) -
                pow2h(b - d, hurst));
}

double cross_covariance(int j, int k, const TimeGrid& grid, double hurst) {
  validate_hurst(hurst);
  if (j < 0 || k < 0 || j >= grid.steps || k >= grid.steps) {
    throw std::invalid_argument("cross_covariance: index out of range");
  }
  // I_k = tau beta(b1) - int_{a1}^{b1} beta(s) ds  (integration by parts),
  // hence Cov(D_j, I_k) =
  //   tau (R(b2,b1) - R(a2,b1)) - int_{a1}^{b1} (R(b2,s) - R(a2,s)) ds
  // = [tau (|b1-a2|^{2H} - |b1-b2|^{2H}) - Phi(a2) + Phi(b2)] / 2,
  // with Phi(c) = int_{a1}^{b1} |s-c|^{2H} ds.
  const double tau = grid.tau();
  const double a1 = grid.node(k), b1 = grid.node(k + 1);
  const double a2 = grid.node(j), b2 = grid.node(j + 1);
  return 0.5 * (tau * (pow2h(b1 - a2, hurst) - pow2h(b1 - b2, hurst)) -
                abs_power_integral(a2, a1, b1, hurst) +
                abs_power_integral(b2, a1, b1, hurst));
}

double weighted_covariance(int j, int k, const TimeGrid& grid, double hurst) {
  validate_hurst(hurst);
  if (j < 0 || k < 0 || j >= grid.steps || k >= grid.steps) {
    throw std::invalid_argument("weighted_covariance: index out of range");
  }
  // Canonical order for exact floating-point symmetry.
  const int lo = std::min(j, k);
  const int hi = std::max(j, k);
  const double tau = grid.tau();
  const double a1 = grid.node(lo), b1 = grid.node(lo + 1);
  const double a2 = grid.node(hi), b2 = grid.node(hi + 1);
  const double e1 = 2.0 * hurst + 1.0;

  // Cov(I_j, I_k) = tau^2 R(b1,b2) - tau S(b1;[a2,b2]) - tau S(b2;[a1,b1]) + Dbl,
  // S(c;[p,q]) = int_p^q R(c,t) dt, Dbl = iint_{[a1,b1]x[a2,b2]} R(s,t) ds dt.
  const auto power_primitive = [e1](double x) { return std::pow(x, e1) / e1; };
  const auto segment_cov_integral = [&](double c, double p, double q) {
    return 0.5 * ((q - p) * pow2h(c, hurst) + power_primitive(q) - power_primitive(p) -
                  abs_power_integral(c, p, q, hurst));
  };
  const auto second_primitive = [&](double x) {
    return std::pow(std::abs(x), 2.0 * hurst + 2.0) / ((2.0 * hurst + 1.0) * (2.0 * hurst + 2.0));
  };
  const double cross_term =
      second_primitive(b1 - a2) - second_primitive(a1 - a2) - second_primitive(b1 - b2) +
      second_primitive(a1 - b2);
  const double double_integral =
      0.5 * ((b2 - a2) * (power_primitive(b1) - power_primitive(a1)) +
             (b1 - a1) * (power_primitive(b2) - power_primitive(a2)) - cross_term);
  return tau * tau * fbm_cov(b1, b2, hurst) - tau * segment_cov_integral(b1, a2, b2) -
         tau * segment_cov_integral(b2, a1, b1) + double_integral;
}

NoiseCovariance assemble_covariance(const TimeGrid& grid, double hurst,
                                    bool with_weighted) {
  validate_hurst(hurst);
  const int n = grid.steps;
  const int order = with_weighted ? 2 * n : n;

  NoiseCovariance cov;
  cov.grid = grid;
  cov.hurst = hurst;
  cov.with_weighted = with_weighted;
  cov.matrix.resize(order, order);

  for (int j = 0; j < n; ++j) {
    for (int k = 0; k <= j; ++k) {
      const double v = increment_covariance(j, k, grid, hurst);
      cov.matrix(j, k) = v;
      cov.matrix(k, j) = v;
    }
  }
  if (with_weighted) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double v = cross_covariance(j, k, grid, hurst);
        cov.matrix(j, n + k) = v;
        cov.matrix(n + k, j) = v;
      }
    }
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k <= j; ++k) {
        const double v = weighted_covariance(j, k, grid, hurst);
        cov.matrix(n + j, n + k) = v;
        cov.matrix(n + k, n + j) = v;
      }
    }
  }

  Eigen::MatrixXd work = cov.matrix;
  const double jitter = 1e-14 * cov.matrix.diagonal().maxCoeff();
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success) {
      cov.cholesky_factor = llt.matrixL();
      return cov;
    }
    work.diagonal().array() += jitter;
  }
  std::ostringstream msg;
  msg << "assemble_covariance: factorization failed after jitter retries"
      << " (T=" << grid.horizon << ", N=" << grid.steps << ", H=" << hurst << ")";
  throw std::runtime_error(msg.str());
}

ModeNoise sample_mode_noise(const NoiseCovariance& cov, rng::NormalStream& stream) {
  const int order = cov.order();
  Eigen::VectorXd normals(order);
  for (int i = 0; i < order; ++i) {
    normals[i] = stream();
  }
  Eigen::VectorXd path = cov.cholesky_factor.triangularView<Eigen::Lower>() * normals;

  ModeNoise noise;
  noise.grid = cov.grid;
  noise.hurst = cov.hurst;
  const int n = cov.grid.steps;
  noise.increments = path.head(n);
  if (cov.with_weighted) {
    noise.weighted = path.tail(n);
  }
  return noise;
}

ModeNoise coarsen(const ModeNoise& fine, int factor) {
  if (factor < 2) {
    throw std::invalid_argument("coarsen: factor must be >= 2");
  }
  const int n_fine = static_cast<int>(fine.increments.size());
  if (n_fine % factor != 0) {
    throw std::invalid_argument("coarsen: factor must divide the number of steps");
  }
  const int n = n_fine / factor;
  const double tau_fine = fine.grid.tau();

  ModeNoise coarse;
  coarse.grid = TimeGrid(fine.grid.horizon, n);
  coarse.hurst = fine.hurst;
  coarse.increments.resize(n);
  if (fine.has_weighted()) {
    coarse.weighted.resize(n);
  }
  for (int k = 0; k < n; ++k) {
    double d = 0.0;
    for (int m = 0; m < factor; ++m) {
      d += fine.increments[factor * k + m];
    }
    coarse.increments[k] = d;
    if (fine.has_weighted()) {
      double w = 0.0;
      for (int m = 0; m < factor; ++m) {
        w += fine.weighted[factor * k + m] + (m * tau_fine) * fine.increments[factor * k + m];
      }
      coarse.weighted[k] = w;
    }
  }
  return coarse;
}

void dump_path_csv(std::ostream& out, const ModeNoise& noise) {
  out << "k,t_k,D_k,I_k\n";
  char line[160];
  for (Eigen::Index k = 0; k < noise.increments.size(); ++k) {
    const double weighted = noise.has_weighted() ? noise.weighted[k] : 0.0;
    std::snprintf(line, sizeof(line), "%lld,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(k), noise.grid.node(static_cast<int>(k)),
                  noise.increments[k], weighted);
    out << line;
  }
}

}  // namespace swe::fbm
