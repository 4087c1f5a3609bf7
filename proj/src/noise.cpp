#include "swe/noise.hpp"

#include <stdexcept>

namespace swe::noise {

NoiseParams::NoiseParams(const spectral::EigenBasis& basis, double alpha_, double rho_)
    : alpha(alpha_), rho(rho_) {
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw std::invalid_argument("NoiseParams: alpha must lie in (0, 1]");
  }
  if (rho < 0.0) {
    throw std::invalid_argument("NoiseParams: rho must be >= 0");
  }
  sigma = basis.eigenvalues.array().pow(-rho);
  omega = basis.eigenvalues.array().pow(alpha / 2.0);
}

NoiseBundle sample_bundle(const fbm::NoiseCovariance& cov, int modes,
                          std::uint64_t seed, std::uint64_t sample_index) {
  if (modes < 1) {
    throw std::invalid_argument("sample_bundle: modes must be >= 1");
  }
  const int n = cov.grid.steps;
  NoiseBundle bundle;
  bundle.grid = cov.grid;
  bundle.hurst = cov.hurst;
  bundle.increments.resize(modes, n);
  if (cov.with_weighted) {
    bundle.weighted.resize(modes, n);
  }
  for (int j = 0; j < modes; ++j) {
    rng::NormalStream stream(seed, sample_index, static_cast<std::uint64_t>(j));
    const fbm::ModeNoise mode = fbm::sample_mode_noise(cov, stream);
    bundle.increments.row(j) = mode.increments.transpose();
    if (cov.with_weighted) {
      bundle.weighted.row(j) = mode.weighted.transpose();
    }
  }
  return bundle;
}

NoiseBundle coarsen_bundle(const NoiseBundle& fine, int factor) {
  if (factor < 2) {
    throw std::invalid_argument("coarsen_bundle: factor must be >= 2");
  }
  const int n_fine = fine.steps();
  if (n_fine % factor != 0) {
    throw std::invalid_argument("coarsen_bundle: factor must divide the step count");
  }
  const int n = n_fine / factor;
  const double tau_fine = fine.grid.tau();

  NoiseBundle coarse;
  coarse.grid = fbm::TimeGrid(fine.grid.horizon, n);
  coarse.hurst = fine.hurst;
  coarse.increments.setZero(fine.modes(), n);
  if (fine.has_weighted()) {
    coarse.weighted.setZero(fine.modes(), n);
  }
  for (int k = 0; k < n; ++k) {
    for (int m = 0; m < factor; ++m) {
      coarse.increments.col(k) += fine.increments.col(factor * k + m);
      if (fine.has_weighted()) {
        coarse.weighted.col(k) += fine.weighted.col(factor * k + m) +
                                  (m * tau_fine) * fine.increments.col(factor * k + m);
      }
    }
  }
  return coarse;
}

ConvolutionAccumulator::ConvolutionAccumulator(const NoiseParams& params,
                                               const fbm::TimeGrid& grid,
                                               bool with_weighted)
    : grid_(grid), with_weighted_(with_weighted), sigma_(params.sigma),
      omega_(params.omega) {
  reset();
}

void ConvolutionAccumulator::reset() {
  const Eigen::Index m = sigma_.size();
  sum_cos_d_ = Eigen::VectorXd::Zero(m);
  sum_sin_d_ = Eigen::VectorXd::Zero(m);
  if (with_weighted_) {
    sum_cos_w_ = Eigen::VectorXd::Zero(m);
    sum_sin_w_ = Eigen::VectorXd::Zero(m);
  }
  last_ = -1;
}

void ConvolutionAccumulator::absorb_step(
    int k, const Eigen::Ref<const Eigen::VectorXd>& increments) {
  if (with_weighted_) {
    throw std::invalid_argument(
        "absorb_step: accumulator expects weighted integrals as well");
  }
  if (k != last_ + 1) {
    throw std::invalid_argument("absorb_step: steps must be absorbed in order");
  }
  const double t = grid_.node(k);
  const Eigen::ArrayXd phase = omega_.array() * t;
  const Eigen::ArrayXd scaled = sigma_.array() * increments.array();
  sum_cos_d_.array() += phase.cos() * scaled;
  sum_sin_d_.array() += phase.sin() * scaled;
  last_ = k;
}

void ConvolutionAccumulator::absorb_step(
    int k, const Eigen::Ref<const Eigen::VectorXd>& increments,
    const Eigen::Ref<const Eigen::VectorXd>& weighted) {
  if (!with_weighted_) {
    throw std::invalid_argument("absorb_step: accumulator is increments-only");
  }
  if (k != last_ + 1) {
    throw std::invalid_argument("absorb_step: steps must be absorbed in order");
  }
  const double t = grid_.node(k);
  const Eigen::ArrayXd cos_t = (omega_.array() * t).cos();
  const Eigen::ArrayXd sin_t = (omega_.array() * t).sin();
  const Eigen::ArrayXd scaled_d = sigma_.array() * increments.array();
  const Eigen::ArrayXd scaled_w = sigma_.array() * weighted.array();
  sum_cos_d_.array() += cos_t * scaled_d;
  sum_sin_d_.array() += sin_t * scaled_d;
  sum_cos_w_.array() += cos_t * scaled_w;
  sum_sin_w_.array() += sin_t * scaled_w;
  last_ = k;
}

SpectralField ConvolutionAccumulator::low_order(double t) const {
  // sin(w(t - t_k)) = sin(wt) cos(w t_k) - cos(wt) sin(w t_k)
  const Eigen::ArrayXd phase = omega_.array() * t;
  return ((phase.sin() * sum_cos_d_.array() - phase.cos() * sum_sin_d_.array()) /
          omega_.array())
      .matrix();
}

SpectralField ConvolutionAccumulator::high_order(double t) const {
  if (!with_weighted_) {
    throw std::invalid_argument(
        "high_order: requires an accumulator with weighted integrals");
  }
  const Eigen::ArrayXd phase = omega_.array() * t;
  const Eigen::ArrayXd sin_part =
      (phase.sin() * sum_cos_d_.array() - phase.cos() * sum_sin_d_.array()) /
      omega_.array();
  // cos(w(t - t_k)) = cos(wt) cos(w t_k) + sin(wt) sin(w t_k)
  const Eigen::ArrayXd cos_part =
      phase.cos() * sum_cos_w_.array() + phase.sin() * sum_sin_w_.array();
  return (sin_part - cos_part).matrix();
}

SpectralField ConvolutionAccumulator::velocity(double t) const {
  const Eigen::ArrayXd phase = omega_.array() * t;
  return (phase.cos() * sum_cos_d_.array() + phase.sin() * sum_sin_d_.array()).matrix();
}

}  // namespace swe::noise
