#include "swe/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace swe::spectral {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;
}  // namespace

EigenBasis build_eigenbasis(int mode_count) {
  if (mode_count < 1) {
    throw std::invalid_argument("build_eigenbasis: mode_count must be >= 1");
  }
  EigenBasis basis;
  basis.mode_count = mode_count;
  basis.eigenvalues.resize(mode_count);
  for (int j = 1; j <= mode_count; ++j) {
    basis.eigenvalues[j - 1] = (j * kPi) * (j * kPi);
  }
  return basis;
}

SpectralField apply_fractional(const SpectralField& field, const EigenBasis& basis,
                               double power) {
  if (field.size() != basis.mode_count) {
    throw std::invalid_argument("apply_fractional: field length does not match basis");
  }
  return field.array() * basis.eigenvalues.array().pow(power / 2.0);
}

double sobolev_norm(const SpectralField& field, const EigenBasis& basis, double nu) {
  if (field.size() != basis.mode_count) {
    throw std::invalid_argument("sobolev_norm: field length does not match basis");
  }
  return std::sqrt((basis.eigenvalues.array().pow(nu) * field.array().square()).sum());
}

SineTransform::SineTransform(int modes, int grid_size)
    : modes_(modes), grid_size_(grid_size) {
  if (modes < 1) {
    throw std::invalid_argument("SineTransform: modes must be >= 1");
  }
  if (grid_size < 2 * modes) {
    throw std::invalid_argument("SineTransform: collocation size Q must be >= 2M");
  }
  sine_.resize(grid_size - 1, modes);
  nodes_.resize(grid_size - 1);
  for (int m = 1; m < grid_size; ++m) {
    nodes_[m - 1] = static_cast<double>(m) / grid_size;
    for (int j = 1; j <= modes; ++j) {
      sine_(m - 1, j - 1) = std::sin(j * kPi * m / grid_size);
    }
  }
}

Eigen::VectorXd SineTransform::evaluate(const SpectralField& field) const {
  if (field.size() != modes_) {
    throw std::invalid_argument("SineTransform::evaluate: field length mismatch");
  }
  Eigen::VectorXd values(grid_size_ - 1);
  values.noalias() = sine_ * field;
  values *= kSqrt2;
  return values;
}

SpectralField SineTransform::project(const Eigen::VectorXd& values) const {
  if (values.size() != grid_size_ - 1) {
    throw std::invalid_argument("SineTransform::project: values length mismatch");
  }
  SpectralField coeffs(modes_);
  coeffs.noalias() = sine_.transpose() * values;
  coeffs *= kSqrt2 / grid_size_;
  return coeffs;
}

SpectralField project(const Eigen::VectorXd& values, int modes) {
  const int grid_size = static_cast<int>(values.size()) + 1;
  return SineTransform(modes, grid_size).project(values);
}

SpectralField project_mode(const EigenBasis& basis, int mode, double amplitude) {
  if (mode < 1 || mode > basis.mode_count) {
    throw std::invalid_argument("project_mode: mode index out of range");
  }
  SpectralField field = SpectralField::Zero(basis.mode_count);
  // amplitude * sin(j pi x) = (amplitude / sqrt(2)) * phi_j(x)
  field[mode - 1] = amplitude / kSqrt2;
  return field;
}

Eigen::VectorXd evaluate(const SpectralField& field, const Eigen::VectorXd& points) {
  Eigen::VectorXd values(points.size());
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    values[i] = evaluate_at(field, points[i]);
  }
  return values;
}

double evaluate_at(const SpectralField& field, double x) {
  double value = 0.0;
  for (Eigen::Index j = 0; j < field.size(); ++j) {
    value += field[j] * std::sin((j + 1) * kPi * x);
  }
  return kSqrt2 * value;
}

}  // namespace swe::spectral
