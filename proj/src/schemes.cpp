#include "swe/schemes.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace swe::schemes {

const char* scheme_name(Scheme scheme) {
  return scheme == Scheme::low ? "low" : "high";
}

double ModelConfig::gamma() const { return alpha + 2.0 * rho - (1.0 + epsilon) / 2.0; }

void ModelConfig::validate() const {
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw std::invalid_argument("ModelConfig: alpha must lie in (0, 1]");
  }
  fbm::validate_hurst(hurst);
  if (rho < 0.0) {
    throw std::invalid_argument("ModelConfig: rho must be >= 0");
  }
  if (!(horizon > 0.0)) {
    throw std::invalid_argument("ModelConfig: horizon must be positive");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("ModelConfig: epsilon must be positive");
  }
  if (steps < 1) {
    throw std::invalid_argument("ModelConfig: steps must be >= 1");
  }
  if (modes < 1) {
    throw std::invalid_argument("ModelConfig: modes must be >= 1");
  }
  if (u0.size() != modes || v0.size() != modes) {
    throw std::invalid_argument("ModelConfig: u0/v0 length must equal modes");
  }
  if (f.kind == Nonlinearity::Kind::custom) {
    if (!f.fn) {
      throw std::invalid_argument("ModelConfig: custom nonlinearity needs a function");
    }
    if (!f.lipschitz_bound) {
      std::cerr << "warning: custom nonlinearity has no declared Lipschitz bound\n";
    }
  }
}

RatePrediction predict_rates(double alpha, double rho, double epsilon, double hurst) {
  RatePrediction p;
  p.gamma = alpha + 2.0 * rho - (1.0 + epsilon) / 2.0;
  p.low_order = std::min(p.gamma / alpha, 1.0);
  p.high_order = 1.0 + std::min((p.gamma - alpha) / alpha, hurst);
  return p;
}

std::optional<std::string> regularity_warning(const ModelConfig& config, Scheme scheme) {
  const double gamma = config.gamma();
  std::ostringstream msg;
  if (scheme == Scheme::low) {
    if (gamma <= 0.0 || gamma > config.alpha) {
      msg << "low-order scheme expects 0 < gamma <= alpha, got gamma=" << gamma
          << ", alpha=" << config.alpha << "; theoretical rate unsupported";
      return msg.str();
    }
  } else {
    if (gamma <= config.alpha) {
      msg << "high-order scheme expects gamma > alpha, got gamma=" << gamma
          << ", alpha=" << config.alpha << "; theoretical rate unsupported";
      return msg.str();
    }
  }
  return std::nullopt;
}

void low_order_step(StepperState& state, const Eigen::VectorXd& mu, double tau) {
  const Eigen::ArrayXd numer =
      state.zdot.array() - tau * mu.array() * state.z.array() + tau * state.f_curr.array();
  state.zdot = (numer / (1.0 + tau * tau * mu.array())).matrix();
  state.z += tau * state.zdot;
  ++state.step;
}

void high_order_step(StepperState& state, const Eigen::VectorXd& mu, double tau) {
  const Eigen::ArrayXd g =
      state.f_curr.array() + 0.5 * (state.f_curr.array() - state.f_prev.array());
  const Eigen::ArrayXd quarter = 0.25 * tau * tau * mu.array();
  const Eigen::ArrayXd numer = state.zdot.array() * (1.0 - quarter) -
                               tau * mu.array() * state.z.array() + tau * g;
  const Eigen::VectorXd zdot_next = (numer / (1.0 + quarter)).matrix();
  state.z += 0.5 * tau * (zdot_next + state.zdot);
  state.zdot = zdot_next;
  ++state.step;
}

SpectralField evaluate_nonlinearity(const SpectralField& u, const Nonlinearity& f,
                                    const spectral::SineTransform& transform) {
  switch (f.kind) {
    case Nonlinearity::Kind::zero:
      return SpectralField::Zero(u.size());
    case Nonlinearity::Kind::sine: {
      Eigen::VectorXd values = transform.evaluate(u);
      values = values.array().sin();
      return transform.project(values);
    }
    case Nonlinearity::Kind::custom: {
      Eigen::VectorXd values = transform.evaluate(u);
      for (Eigen::Index i = 0; i < values.size(); ++i) {
        values[i] = f.fn(values[i]);
      }
      return transform.project(values);
    }
  }
  throw std::logic_error("evaluate_nonlinearity: unknown kind");
}

SpectralField reconstruct_u_low(const SpectralField& z,
                                const noise::ConvolutionAccumulator& conv, double t) {
  return z + conv.low_order(t);
}

SpectralField reconstruct_u_high(const SpectralField& z,
                                 const noise::ConvolutionAccumulator& conv, double t) {
  return z + conv.high_order(t);
}

std::pair<SpectralField, SpectralField> exact_deterministic(
    const spectral::EigenBasis& basis, double alpha, const SpectralField& u0,
    const SpectralField& v0, double t) {
  if (u0.size() != basis.mode_count || v0.size() != basis.mode_count) {
    throw std::invalid_argument("exact_deterministic: field length mismatch");
  }
  const Eigen::ArrayXd omega = basis.eigenvalues.array().pow(alpha / 2.0);
  const Eigen::ArrayXd c = (omega * t).cos();
  const Eigen::ArrayXd s = (omega * t).sin();
  SpectralField u = (c * u0.array() + s / omega * v0.array()).matrix();
  SpectralField v = (-omega * s * u0.array() + c * v0.array()).matrix();
  return {std::move(u), std::move(v)};
}

RunResult run(const ModelConfig& config, Scheme scheme,
              const spectral::EigenBasis& basis,
              const spectral::SineTransform* transform,
              const noise::NoiseBundle* bundle, TrajectoryRecord* record) {
  config.validate();
  if (basis.mode_count != config.modes) {
    throw std::invalid_argument("run: basis does not match config.modes");
  }
  if (config.f.kind != Nonlinearity::Kind::zero && transform == nullptr) {
    throw std::invalid_argument("run: nonzero nonlinearity requires a transform");
  }
  const bool noisy = config.with_noise && bundle != nullptr;
  if (config.with_noise && bundle == nullptr) {
    throw std::invalid_argument("run: config.with_noise requires a noise bundle");
  }
  if (noisy) {
    if (bundle->steps() != config.steps || bundle->modes() != config.modes) {
      throw std::invalid_argument("run: noise bundle does not match config grid");
    }
    if (scheme == Scheme::high && !bundle->has_weighted()) {
      throw std::invalid_argument(
          "run: high-order scheme requires weighted noise integrals");
    }
  }

  const fbm::TimeGrid grid(config.horizon, config.steps);
  const double tau = grid.tau();
  const Eigen::VectorXd mu = basis.eigenvalues.array().pow(config.alpha).matrix();
  const noise::NoiseParams params(basis, config.alpha, config.rho);
  noise::ConvolutionAccumulator conv(params, grid, scheme == Scheme::high);

  StepperState state;
  state.z = config.u0;
  state.zdot = config.v0;
  SpectralField u = state.z;  // u_0 = z_0
  state.f_curr = (config.f.kind == Nonlinearity::Kind::zero)
                     ? SpectralField::Zero(config.modes)
                     : evaluate_nonlinearity(u, config.f, *transform);
  state.f_prev = state.f_curr;  // fhat_{-1} = fhat_0 startup

  const auto record_step = [&](double t) {
    if (record == nullptr) return;
    record->times.push_back(t);
    record->u_norms.push_back(u.norm());
    if (record->keep_fields) record->fields.push_back(u);
  };
  record_step(0.0);

  for (int n = 0; n < config.steps; ++n) {
    if (scheme == Scheme::low) {
      low_order_step(state, mu, tau);
    } else {
      high_order_step(state, mu, tau);
    }
    const double t_next = grid.node(n + 1);
    if (noisy) {
      if (scheme == Scheme::high) {
        conv.absorb_step(n, bundle->increments.col(n), bundle->weighted.col(n));
        u = reconstruct_u_high(state.z, conv, t_next);
      } else {
        conv.absorb_step(n, bundle->increments.col(n));
        u = reconstruct_u_low(state.z, conv, t_next);
      }
    } else {
      u = state.z;
    }
    state.f_prev = state.f_curr;
    if (config.f.kind != Nonlinearity::Kind::zero) {
      state.f_curr = evaluate_nonlinearity(u, config.f, *transform);
    }
    record_step(t_next);
  }

  return {std::move(u), std::move(state.z), std::move(state.zdot)};
}

}  // namespace swe::schemes
