#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "swe/noise.hpp"
#include "swe/spectral.hpp"

namespace swe::schemes {

enum class Scheme { low, high };

const char* scheme_name(Scheme scheme);

// Source term f applied pointwise to u(x). The custom variant should come with
// a Lipschitz bound; a missing bound only triggers a warning.
struct Nonlinearity {
  enum class Kind { zero, sine, custom };

  Kind kind = Kind::sine;
  std::function<double(double)> fn;
  std::optional<double> lipschitz_bound;

  static Nonlinearity zero() { return {Kind::zero, {}, 0.0}; }
  static Nonlinearity sine() { return {Kind::sine, {}, 1.0}; }
  static Nonlinearity custom(std::function<double(double)> fn,
                             std::optional<double> lipschitz = std::nullopt) {
    return {Kind::custom, std::move(fn), lipschitz};
  }
};

struct ModelConfig {
  double alpha = 1.0;    // fractional power, (0, 1]
  double hurst = 0.8;    // (1/2, 1)
  double rho = 0.25;     // mode-weight decay, >= 0
  double horizon = 0.5;  // T
  double epsilon = 0.01; // regularity bookkeeping only; never enters dynamics
  int steps = 0;         // N
  int modes = 0;         // M
  bool with_noise = true;
  Nonlinearity f = Nonlinearity::sine();
  SpectralField u0, v0;

  // gamma = alpha + 2 rho - (1 + epsilon)/2  (d = 1)
  double gamma() const;
  void validate() const;
};

struct RatePrediction {
  double gamma = 0.0;
  double low_order = 0.0;   // min{gamma/alpha, 1}
  double high_order = 0.0;  // 1 + min{(gamma-alpha)/alpha, H}; meaningful for gamma > alpha
};

RatePrediction predict_rates(double alpha, double rho, double epsilon, double hurst);

// Non-empty when the scheme's regularity window does not contain gamma; the
// schemes still run, but the theoretical rates no longer apply.
std::optional<std::string> regularity_warning(const ModelConfig& config, Scheme scheme);

struct StepperState {
  SpectralField z, zdot;
  SpectralField f_prev, f_curr;  // coefficients of f(u_{n-1}), f(u_n)
  int step = 0;
};

// One step of the rectangle-rule scheme, solved in closed form per mode
// (mu = lambda^alpha): zdot' = (zdot - tau mu z + tau fhat) / (1 + tau^2 mu),
// z' = z + tau zdot'.
void low_order_step(StepperState& state, const Eigen::VectorXd& mu, double tau);

// Trapezoidal variant with the Adams-style correction
// g = fhat_n + (fhat_n - fhat_{n-1})/2:
// zdot'(1 + tau^2 mu/4) = zdot (1 - tau^2 mu/4) - tau mu z + tau g,
// z' = z + tau (zdot' + zdot)/2.
void high_order_step(StepperState& state, const Eigen::VectorXd& mu, double tau);

// Coefficients of f(u): evaluate on the collocation grid, apply f pointwise,
// project back.
SpectralField evaluate_nonlinearity(const SpectralField& u, const Nonlinearity& f,
                                    const spectral::SineTransform& transform);

// u_{n+1} = z_{n+1} + stochastic-convolution approximant at t_{n+1}
SpectralField reconstruct_u_low(const SpectralField& z,
                                const noise::ConvolutionAccumulator& conv, double t);
SpectralField reconstruct_u_high(const SpectralField& z,
                                 const noise::ConvolutionAccumulator& conv, double t);

// Exact propagator of the noiseless, f == 0 system:
// u_j(t) = cos(w_j t) u0_j + w_j^{-1} sin(w_j t) v0_j,
// v_j(t) = -w_j sin(w_j t) u0_j + cos(w_j t) v0_j.
std::pair<SpectralField, SpectralField> exact_deterministic(
    const spectral::EigenBasis& basis, double alpha, const SpectralField& u0,
    const SpectralField& v0, double t);

struct TrajectoryRecord {
  bool keep_fields = false;
  std::vector<double> times;
  std::vector<double> u_norms;
  std::vector<SpectralField> fields;
};

struct RunResult {
  SpectralField u, z, zdot;
};

// Full time loop of one trajectory. `transform` may be null for f == 0;
// `bundle` may be null for zero noise, otherwise its grid must match
// config.steps. High-order startup uses fhat_{-1} = fhat_0.
RunResult run(const ModelConfig& config, Scheme scheme,
              const spectral::EigenBasis& basis,
              const spectral::SineTransform* transform,
              const noise::NoiseBundle* bundle,
              TrajectoryRecord* record = nullptr);

}  // namespace swe::schemes
