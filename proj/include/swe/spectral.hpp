#pragma once

#include <Eigen/Dense>

namespace swe {

// Coefficients of a function on (0,1) against the orthonormal Dirichlet
// eigenfunctions phi_j(x) = sqrt(2) sin(j pi x), j = 1..M.
// Parseval: ||u||_{L^2}^2 = sum_j uhat_j^2.
using SpectralField = Eigen::VectorXd;

namespace spectral {

// Dirichlet eigenpairs of -Laplace on (0,1), truncated at mode_count modes.
// lambda_j = (j pi)^2, strictly increasing; the fractional operator acts
// diagonally as lambda_j^power on the coefficients.
struct EigenBasis {
  int mode_count = 0;
  Eigen::VectorXd eigenvalues;
};

EigenBasis build_eigenbasis(int mode_count);

// Coefficient j of the result is lambda_j^{power/2} * uhat_j (power may be
// negative).
SpectralField apply_fractional(const SpectralField& field, const EigenBasis& basis,
                               double power);

// Sobolev-type norm (sum_j lambda_j^nu uhat_j^2)^{1/2}.
double sobolev_norm(const SpectralField& field, const EigenBasis& basis, double nu);

// Forward/inverse transforms between coefficients and values on the uniform
// interior collocation grid x_m = m/Q, m = 1..Q-1. Requires Q >= 2M so that
// project(evaluate(u)) == u; the transform pair is the plain discrete sine
// transform, O(MQ) via a precomputed matrix.
class SineTransform {
 public:
  SineTransform(int modes, int grid_size);

  int modes() const { return modes_; }
  int grid_size() const { return grid_size_; }
  const Eigen::VectorXd& nodes() const { return nodes_; }

  // values u(x_m) = sum_j uhat_j sqrt(2) sin(j pi x_m)
  Eigen::VectorXd evaluate(const SpectralField& field) const;
  // quadrature approximation of <u, phi_j>: uhat_j = (sqrt(2)/Q) sum_m u(x_m) sin(j pi m/Q)
  SpectralField project(const Eigen::VectorXd& values) const;

 private:
  int modes_ = 0;
  int grid_size_ = 0;
  Eigen::MatrixXd sine_;  // (Q-1) x M, entry (m-1, j-1) = sin(j pi m / Q)
  Eigen::VectorXd nodes_;
};

// One-off projection of interior grid values (size Q-1) onto `modes` coefficients.
SpectralField project(const Eigen::VectorXd& values, int modes);

// Field of the single-mode function amplitude * sin(mode pi x); analytic inner
// product, no quadrature.
SpectralField project_mode(const EigenBasis& basis, int mode, double amplitude);

// Pointwise evaluation at arbitrary points in (0,1).
Eigen::VectorXd evaluate(const SpectralField& field, const Eigen::VectorXd& points);
double evaluate_at(const SpectralField& field, double x);

}  // namespace spectral
}  // namespace swe
