#pragma once

#include <Eigen/Dense>
#include <iosfwd>

#include "swe/rng.hpp"

namespace swe::fbm {

// Uniform time grid t_k = k * tau on [0, T], tau = T / N.
struct TimeGrid {
  double horizon = 1.0;
  int steps = 1;

  TimeGrid() = default;
  TimeGrid(double horizon_, int steps_);

  double tau() const { return horizon / steps; }
  double node(int k) const { return k * tau(); }
};

// One mode's fBm data on a grid: increments D_k = beta_H(t_{k+1}) - beta_H(t_k)
// and, when sampled jointly, the weighted integrals
// I_k = int_{t_k}^{t_{k+1}} (s - t_k) dbeta_H(s).
struct ModeNoise {
  TimeGrid grid;
  double hurst = 0.75;
  Eigen::VectorXd increments;
  Eigen::VectorXd weighted;  // empty when increments-only

  bool has_weighted() const { return weighted.size() > 0; }
};

// Throws unless 1/2 < H < 1.
void validate_hurst(double hurst);

// Cov(D_j, D_k) =
//   (|t_{j+1}-t_k|^{2H} + |t_j-t_{k+1}|^{2H} - |t_j-t_k|^{2H} - |t_{j+1}-t_{k+1}|^{2H}) / 2
double increment_covariance(int j, int k, const TimeGrid& grid, double hurst);

// Cov(D_j, I_k). Closed form; expanding I_k by parts as
// tau beta(t_{k+1}) - int beta reduces everything to the fBm covariance and
// integrals of |s-c|^{2H}, so no quadrature of the singular
// H(2H-1)|s-r|^{2H-2} kernel is needed. Equal to the kernel double integral
// of the fBm isometry lemma (checked against quadrature in the tests).
double cross_covariance(int j, int k, const TimeGrid& grid, double hurst);

// Cov(I_j, I_k), same closed-form route. Exactly symmetric in (j, k).
double weighted_covariance(int j, int k, const TimeGrid& grid, double hurst);

// Covariance of the stacked vector (D_0..D_{N-1}[, I_0..I_{N-1}]) with its
// lower Cholesky factor. The law is mode independent: one instance per
// (grid, H) pair serves every mode and every sample.
struct NoiseCovariance {
  TimeGrid grid;
  double hurst = 0.75;
  bool with_weighted = false;
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd cholesky_factor;  // lower triangular

  int order() const { return static_cast<int>(matrix.rows()); }
};

// Assembles the symmetric covariance and factors it. On an LLT failure a
// diagonal jitter of 1e-14 * max diagonal is added, at most 3 times; if it
// still fails a runtime_error reporting the grid and H is thrown.
NoiseCovariance assemble_covariance(const TimeGrid& grid, double hurst,
                                    bool with_weighted);

// factor * (iid standard normals), split into D and (optionally) I.
ModeNoise sample_mode_noise(const NoiseCovariance& cov, rng::NormalStream& stream);

// Exact pathwise aggregation onto the grid with step a*tau:
//   D'_k = sum_m D_{ak+m},   I'_k = sum_m (I_{ak+m} + m tau D_{ak+m}).
// Requires a >= 2 and a | N.
ModeNoise coarsen(const ModeNoise& fine, int factor);

// Debug dump, columns k, t_k, D_k, I_k.
void dump_path_csv(std::ostream& out, const ModeNoise& noise);

}  // namespace swe::fbm
