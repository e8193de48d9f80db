#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "casclab/coefficient.hpp"
#include "casclab/common.hpp"

namespace casclab {

// Dirichlet Laplacian eigenstructure on (0, L). Basis functions
//   phi_k(x) = sqrt(2/L) sin(k pi x / L),  k = 1..N,
// are L2-orthonormal and diagonalize A = -d^2/dx^2 with eigenvalues
//   lambda_k = (k pi / L)^2.
// Fractional powers A^{s/2} and the Sobolev scale |.|_k are therefore
// exact diagonal operations on modal coefficients.

double eigenvalue(int k, double L);

double basis_value(int k, double L, double x);

// d/dx phi_k at x.
double basis_slope(int k, double L, double x);

// Modal coefficient vector of a scalar function, tagged with its interval.
struct SpectralField {
  Eigen::VectorXd coeffs;
  double length = 0.0;

  SpectralField() = default;
  SpectralField(int N, double L) : coeffs(Eigen::VectorXd::Zero(N)), length(L) {
    if (N < 1 || L <= 0.0) throw InvalidArgument("SpectralField needs N >= 1 and L > 0");
  }

  int truncation() const { return static_cast<int>(coeffs.size()); }

  double evaluate(double x) const;

  void check() const;
};

// a_k -> lambda_k^{s/2} a_k; apply(s) o apply(-s) = identity.
SpectralField apply_fractional_power(const SpectralField& u, double s);

// |u|_k = (sum_j lambda_j^k a_j^2)^{1/2}; k = 0 is the plain coefficient norm.
double sobolev_norm(const SpectralField& u, int k);

// Multiplication operator u -> c(x) u projected on the first N modes:
// M_{jk} = int_0^L c phi_j phi_k dx, assembled by composite Gauss-Legendre
// quadrature with panels split at the coefficient's breakpoints.
struct MultiplicationOperator {
  Eigen::MatrixXd matrix;
  Coefficient source_coefficient;

  int size() const { return static_cast<int>(matrix.rows()); }
};

MultiplicationOperator assemble_multiplication(const Coefficient& c, int N, double L);

// Inward-slope functionals at the endpoints: r0_k = phi_k'(0) and
// rL_k = -phi_k'(L). Both observe the trace gradient pointing into the
// domain, so squared observations match |du/dnu|^2 either way.
Eigen::VectorXd boundary_slope_functional(int N, double L, bool at_left);

// Diagonal lambda vector for a truncation.
Eigen::VectorXd eigenvalues(int N, double L);

}  // namespace casclab
