#include "casclab/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "casclab/parallel.hpp"

namespace casclab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr int kGaussN = 8;
constexpr double kGaussX[kGaussN] = {
    -0.9602898564975362316835609, -0.7966664774136267395915539,
    -0.5255324099163289858177390, -0.1834346424956498049394761,
    0.1834346424956498049394761,  0.5255324099163289858177390,
    0.7966664774136267395915539,  0.9602898564975362316835609};
constexpr double kGaussW[kGaussN] = {
    0.1012285362903762591525314, 0.2223810344533744705443560,
    0.3137066458778872873379622, 0.3626837833783619829651504,
    0.3626837833783619829651504, 0.3137066458778872873379622,
    0.2223810344533744705443560, 0.1012285362903762591525314};

}  // namespace

double eigenvalue(int k, double L) {
  if (k < 1) throw InvalidArgument("mode index must be >= 1");
  if (L <= 0.0) throw InvalidArgument("interval length must be positive");
  const double w = static_cast<double>(k) * kPi / L;
  return w * w;
}

double basis_value(int k, double L, double x) {
  return std::sqrt(2.0 / L) * std::sin(static_cast<double>(k) * kPi * x / L);
}

double basis_slope(int k, double L, double x) {
  const double w = static_cast<double>(k) * kPi / L;
  return std::sqrt(2.0 / L) * w * std::cos(w * x);
}

double SpectralField::evaluate(double x) const {
  double acc = 0.0;
  for (int k = 0; k < coeffs.size(); ++k) {
    acc += coeffs[k] * basis_value(k + 1, length, x);
  }
  return acc;
}

void SpectralField::check() const {
  if (coeffs.size() < 1) throw InvalidArgument("empty spectral field");
  if (length <= 0.0) throw InvalidArgument("interval length must be positive");
  if (!coeffs.allFinite()) throw InvalidState("spectral field has non-finite coefficients");
}

SpectralField apply_fractional_power(const SpectralField& u, double s) {
  u.check();
  SpectralField r = u;
  for (int k = 0; k < r.coeffs.size(); ++k) {
    r.coeffs[k] *= std::pow(eigenvalue(k + 1, u.length), 0.5 * s);
  }
  return r;
}

double sobolev_norm(const SpectralField& u, int k) {
  double acc = 0.0;
  for (int j = 0; j < u.coeffs.size(); ++j) {
    acc += std::pow(eigenvalue(j + 1, u.length), static_cast<double>(k)) * sqr(u.coeffs[j]);
  }
  return std::sqrt(acc);
}

Eigen::VectorXd eigenvalues(int N, double L) {
  Eigen::VectorXd lam(N);
  for (int k = 0; k < N; ++k) lam[k] = eigenvalue(k + 1, L);
  return lam;
}

MultiplicationOperator assemble_multiplication(const Coefficient& c, int N, double L) {
  if (N < 1 || L <= 0.0) throw InvalidArgument("assemble_multiplication needs N >= 1, L > 0");

  // Panel edges: at least 4N uniform panels, split additionally at the
  // coefficient's kinks so every panel integrand is smooth.
  const int base = std::max(4 * N, 4);
  std::vector<double> edges;
  edges.reserve(static_cast<std::size_t>(base) + 8);
  for (int i = 0; i <= base; ++i) edges.push_back(L * static_cast<double>(i) / base);
  for (double bp : c.breakpoints(L)) edges.push_back(bp);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [L](double x, double y) { return std::abs(x - y) < 1e-14 * L; }),
              edges.end());

  const int panels = static_cast<int>(edges.size()) - 1;
  const int nq = panels * kGaussN;

  Eigen::VectorXd xq(nq), wq(nq);
  for (int p = 0; p < panels; ++p) {
    const double x0 = edges[p], x1 = edges[p + 1];
    const double half = 0.5 * (x1 - x0), mid = 0.5 * (x0 + x1);
    for (int q = 0; q < kGaussN; ++q) {
      xq[p * kGaussN + q] = mid + half * kGaussX[q];
      wq[p * kGaussN + q] = half * kGaussW[q];
    }
  }

  // Node evaluations are independent -> data-parallel kernel.
  Eigen::MatrixXd phi(N, nq);
  Eigen::VectorXd cw(nq);
  parallel_for(static_cast<std::size_t>(nq), [&](std::size_t q) {
    const double x = xq[static_cast<int>(q)];
    const double cx = c(x);
    cw[static_cast<int>(q)] = cx * wq[static_cast<int>(q)];
    for (int k = 0; k < N; ++k) phi(k, static_cast<int>(q)) = basis_value(k + 1, L, x);
  });

  MultiplicationOperator op;
  op.source_coefficient = c;
  op.matrix = phi * cw.asDiagonal() * phi.transpose();

  // Exact symmetry up to floating-point: enforce and verify.
  const double scale = std::max(1.0, op.matrix.cwiseAbs().maxCoeff());
  const double asym = (op.matrix - op.matrix.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) throw InvalidCoefficient("multiplication matrix assembly lost symmetry");
  op.matrix = (0.5 * (op.matrix + op.matrix.transpose())).eval();
  return op;
}

Eigen::VectorXd boundary_slope_functional(int N, double L, bool at_left) {
  Eigen::VectorXd r(N);
  for (int k = 1; k <= N; ++k) {
    r[k - 1] = at_left ? basis_slope(k, L, 0.0) : -basis_slope(k, L, L);
  }
  return r;
}

}  // namespace casclab
