#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "casclab/common.hpp"

namespace casclab {

// Scalar coefficient c(x) on (0, L): either a closed-form entry from a
// small catalog (constant, bump, cosine, piecewise steps) or piecewise
// linear samples. Used for coupling coefficients c_{i,i-1}, off-diagonal
// couplings, and observation/control weights b.
struct Coefficient {
  enum class Kind { constant, bump, cosine, piecewise, samples };

  Kind kind = Kind::constant;

  double value = 0.0;  // constant

  // bump: plateau of height `amplitude` on [a,b], smooth transition of
  // width `delta` on both sides, identically zero outside [a-delta, b+delta].
  // order <= 0 selects the exp(-1/s) C-infinity transition, order >= 1 a
  // polynomial smoothstep that is C^order.
  double a = 0.0, b = 0.0, amplitude = 0.0, delta = 0.0;
  int order = 0;

  // cosine: amplitude*cos(freq*x + phase) + offset
  double freq = 0.0, phase = 0.0, offset = 0.0;

  // piecewise (steps): value ys[i] on (xs[i], xs[i+1]);
  // samples: linear interpolation through (xs[i], ys[i]).
  std::vector<double> xs, ys;

  // Multiplicative scale applied on top of the base shape. Lets derived
  // systems reuse a shape with a different strength (e.g. 6*alpha).
  double scale = 1.0;

  double operator()(double x) const;

  // Locations where the function is only piecewise smooth; quadrature
  // panels are split there so each panel integrand is smooth.
  std::vector<double> breakpoints(double L) const;

  // Whether one-sided finite-difference derivatives at the endpoints make
  // sense (sampled data is too coarse for high derivatives).
  bool differentiable() const { return kind != Kind::samples && kind != Kind::piecewise; }

  Coefficient scaled(double s) const {
    Coefficient c = *this;
    c.scale *= s;
    return c;
  }

  static Coefficient constant(double v);
  static Coefficient cosine(double amplitude, double freq, double phase = 0.0,
                            double offset = 0.0);
  static Coefficient from_samples(std::vector<double> xs, std::vector<double> ys);

  nlohmann::json to_json() const;
  static Coefficient from_json(const nlohmann::json& j);
};

// C^order (or C-infinity for order<=0) ramp from 0 at t<=0 to 1 at t>=1.
double smoothstep(double t, int order);

}  // namespace casclab
