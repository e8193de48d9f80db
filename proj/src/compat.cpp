#include "casclab/compat.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "casclab/spectral.hpp"

namespace casclab {

namespace {

// One-sided finite-difference weights for f^(m)(x0) on the stencil
// x0 + i*h, i = 0..npts-1, via the Fornberg recurrence.
std::vector<double> fd_weights(int m, int npts) {
  std::vector<double> x(npts);
  for (int i = 0; i < npts; ++i) x[i] = static_cast<double>(i);
  // delta[k][j] holds the weight of node j for derivative order k.
  std::vector<std::vector<double>> d(m + 1, std::vector<double>(npts, 0.0));
  d[0][0] = 1.0;
  double c1 = 1.0;
  for (int n = 1; n < npts; ++n) {
    double c2 = 1.0;
    std::vector<std::vector<double>> dn(m + 1, std::vector<double>(npts, 0.0));
    for (int nu = 0; nu < n; ++nu) {
      const double c3 = x[n] - x[nu];
      c2 *= c3;
      for (int k = 0; k <= std::min(n, m); ++k) {
        dn[k][nu] = (x[n] * d[k][nu] - (k > 0 ? k * d[k - 1][nu] : 0.0)) / c3;
      }
    }
    for (int k = 0; k <= std::min(n, m); ++k) {
      dn[k][n] = c1 / c2 * ((k > 0 ? k * d[k - 1][n - 1] : 0.0) - x[n - 1] * d[k][n - 1]);
    }
    d.swap(dn);
    c1 = c2;
  }
  return d[m];
}

double one_sided_derivative(const Coefficient& c, double x0, double h, int m,
                            bool from_left) {
  const int npts = m + 7;  // order-6 accuracy
  const auto w = fd_weights(m, npts);
  double acc = 0.0;
  for (int i = 0; i < npts; ++i) {
    const double x = from_left ? x0 + i * h : x0 - i * h;
    acc += w[i] * c(x);
  }
  const double sign = from_left ? 1.0 : ((m % 2 == 0) ? 1.0 : -1.0);
  return sign * acc / std::pow(h, m);
}

// Derivative value together with an attainable-precision floor: the h vs
// h/2 disagreement bounds the truncation part, the summed |weights| the
// rounding amplification. High-order endpoint derivatives cannot be
// certified below this floor in double precision.
std::pair<double, double> endpoint_derivative(const Coefficient& c, double x0, double h, int m,
                                              bool from_left, double cmax) {
  const double coarse = one_sided_derivative(c, x0, h, m, from_left);
  const double fine = one_sided_derivative(c, x0, 0.5 * h, m, from_left);
  const auto w = fd_weights(m, m + 7);
  double wsum = 0.0;
  for (double wi : w) wsum += std::abs(wi);
  const double rounding = 8.0 * 2.2e-16 * wsum * cmax / std::pow(0.5 * h, m);
  return {fine, std::abs(fine - coarse) + rounding};
}

}  // namespace

CompatReport check_compat_1d(const Coefficient& c, int k, double L, double tolerance) {
  if (k < 0) throw InvalidArgument("Sobolev level must be >= 0");
  CompatReport rep;
  rep.level = k;
  rep.tolerance = tolerance;
  const int pmax = (k - 1) / 2;  // no conditions for k <= 2
  if (pmax < 1) return rep;

  if (!c.differentiable()) {
    // Piecewise data is usable only when the difference stencil fits inside
    // the first/last smooth piece.
    const int mmax = 2 * pmax - 1;
    const double span = static_cast<double>(mmax + 6) * L / (16.0 * (mmax + 7));
    double nearest = L;
    for (double bp : c.breakpoints(L)) nearest = std::min({nearest, bp, L - bp});
    if (nearest < span) {
      throw CannotEvaluate("sampled coefficient is too coarse for endpoint derivatives");
    }
  }

  // Stencil inside the domain; scale tolerance by the coefficient size.
  double cmax = 1.0;
  for (int i = 0; i <= 200; ++i) cmax = std::max(cmax, std::abs(c(L * i / 200.0)));

  for (int p = 1; p <= pmax; ++p) {
    const int m = 2 * p - 1;
    const double h = L / (16.0 * (m + 7));
    CompatCondition cond;
    cond.derivative_order = m;
    const auto [left, lfloor] = endpoint_derivative(c, 0.0, h, m, true, cmax);
    const auto [right, rfloor] = endpoint_derivative(c, L, h, m, false, cmax);
    cond.at_left = left;
    cond.at_right = right;
    cond.ok = std::abs(left) <= std::max(tolerance * cmax, 4.0 * lfloor) &&
              std::abs(right) <= std::max(tolerance * cmax, 4.0 * rfloor);
    rep.pass = rep.pass && cond.ok;
    rep.conditions.push_back(cond);
  }
  return rep;
}

Coefficient build_bump(const Interval& O, double L, double amplitude,
                       int smoothness_order, double delta) {
  if (!(O.a > 0.0 && O.b < L && O.a < O.b)) {
    throw InvalidArgument("bump region must have closure inside (0, L)");
  }
  if (delta <= 0.0) {
    delta = std::min({0.25 * O.length(), 0.5 * O.a, 0.5 * (L - O.b)});
  }
  if (O.a - delta <= 0.0 || O.b + delta >= L) {
    throw InvalidArgument("bump support would touch an endpoint; shrink delta");
  }
  Coefficient c;
  c.kind = Coefficient::Kind::bump;
  c.a = O.a;
  c.b = O.b;
  c.amplitude = amplitude;
  c.delta = delta;
  c.order = smoothness_order;
  return c;
}

HkStabilityReport verify_Hk_stability(const Coefficient& c, int k, double L,
                                      const std::vector<int>& truncations) {
  if (k < 0) throw InvalidArgument("Sobolev level must be >= 0");
  if (truncations.empty()) throw InvalidArgument("need at least one truncation");
  HkStabilityReport rep;
  rep.level = k;
  for (int N : truncations) {
    // Operator norm of u -> P_N(c u) in |.|_k equals the 2-norm of
    // D^{k/2} M_c D^{-k/2} with D = diag(lambda_j); computed exactly by a
    // dense SVD rather than sampled over random fields.
    const MultiplicationOperator op = assemble_multiplication(c, N, L);
    Eigen::VectorXd lam = eigenvalues(N, L);
    Eigen::VectorXd dpos(N), dneg(N);
    for (int j = 0; j < N; ++j) {
      dpos[j] = std::pow(lam[j], 0.5 * k);
      dneg[j] = 1.0 / dpos[j];
    }
    const Eigen::MatrixXd B = dpos.asDiagonal() * op.matrix * dneg.asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
    const double nrm = svd.singularValues()[0];
    rep.entries.push_back({N, nrm, nrm * nrm});
  }
  rep.growth = rep.entries.back().quadratic_gain / rep.entries.front().quadratic_gain;
  rep.stable = rep.growth <= 2.0;
  return rep;
}

}  // namespace casclab
