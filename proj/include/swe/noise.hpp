#pragma once

#include <cstdint>

#include "swe/fbm.hpp"
#include "swe/spectral.hpp"

namespace swe::noise {

// Cylindrical-noise mode weights sigma_j = lambda_j^{-rho} and the dispersion
// relation omega_j = lambda_j^{alpha/2} of the fractional wave group.
struct NoiseParams {
  double alpha = 1.0;
  double rho = 0.0;
  Eigen::VectorXd sigma;
  Eigen::VectorXd omega;

  NoiseParams(const spectral::EigenBasis& basis, double alpha_, double rho_);
};

// All-mode noise on one grid; row j = mode j+1, column k = step k.
struct NoiseBundle {
  fbm::TimeGrid grid;
  double hurst = 0.75;
  Eigen::MatrixXd increments;  // M x N
  Eigen::MatrixXd weighted;    // M x N, or empty

  bool has_weighted() const { return weighted.size() > 0; }
  int modes() const { return static_cast<int>(increments.rows()); }
  int steps() const { return static_cast<int>(increments.cols()); }
};

// Draws all modes from the shared covariance factor; mode j uses the
// independent stream (seed, sample_index, j).
NoiseBundle sample_bundle(const fbm::NoiseCovariance& cov, int modes,
                          std::uint64_t seed, std::uint64_t sample_index);

// Pathwise-exact aggregation of every mode onto the grid coarsened by `factor`
// (same identity as fbm::coarsen).
NoiseBundle coarsen_bundle(const NoiseBundle& fine, int factor);

// Running sums for the stochastic-convolution approximants. Absorbing step k
// adds sigma_j cos(omega_j t_k) D_k etc.; evaluation at t then uses the angle
// addition identities, so the whole trajectory costs O(MN) instead of O(MN^2).
class ConvolutionAccumulator {
 public:
  ConvolutionAccumulator(const NoiseParams& params, const fbm::TimeGrid& grid,
                         bool with_weighted);

  // Steps must arrive in order k = 0, 1, 2, ...
  void absorb_step(int k, const Eigen::Ref<const Eigen::VectorXd>& increments);
  void absorb_step(int k, const Eigen::Ref<const Eigen::VectorXd>& increments,
                   const Eigen::Ref<const Eigen::VectorXd>& weighted);

  void reset();
  int last_absorbed() const { return last_; }
  bool with_weighted() const { return with_weighted_; }
  const fbm::TimeGrid& grid() const { return grid_; }

  // sigma_j omega_j^{-1} sum_{k<=n} sin(omega_j (t - t_k)) D_k
  SpectralField low_order(double t) const;
  // low_order minus the sum of cos(omega_j (t - t_k)) I_k corrections
  SpectralField high_order(double t) const;
  // cos kernel against D (the velocity component)
  SpectralField velocity(double t) const;

 private:
  fbm::TimeGrid grid_;
  bool with_weighted_ = false;
  int last_ = -1;
  Eigen::VectorXd sigma_, omega_;
  Eigen::VectorXd sum_cos_d_, sum_sin_d_;  // sum_k cos/sin(omega t_k) sigma D_k
  Eigen::VectorXd sum_cos_w_, sum_sin_w_;  // same against I_k
};

}  // namespace swe::noise
