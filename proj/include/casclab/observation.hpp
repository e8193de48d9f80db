#pragma once

#include <Eigen/Dense>
#include <vector>

#include <nlohmann/json.hpp>

#include "casclab/cascade.hpp"
#include "casclab/evolution.hpp"

namespace casclab {

// Observation / control-adjoint operator on one component.
//
// interior: reads b(x) times the component's velocity; G = L2(0,L),
//           represented modally through the multiplication matrix of b.
// boundary: reads b(x_c) times the position's inward boundary slope at the
//           active endpoints; G = R^{#endpoints}. The convention is
//           +du/dx at x=0 and -du/dx at x=L, so squared observations agree
//           with the normal-derivative energy either way.
struct ObservationSpec {
  enum class Kind { interior, boundary };

  Kind kind = Kind::interior;
  int component = 1;  // 1-based target, in {n, ..., n+p}

  // interior
  Coefficient b = Coefficient::constant(1.0);
  Interval region{0.0, 0.0};  // omega, where b is bounded below

  // boundary
  bool at_x0 = false, at_xL = false;
  double weight_x0 = 1.0, weight_xL = 1.0;

  int gdim(int N) const { return kind == Kind::interior ? N : (at_x0 ? 1 : 0) + (at_xL ? 1 : 0); }

  nlohmann::json to_json() const;
  static ObservationSpec from_json(const nlohmann::json& j);
};

// Prepared modal realization of B* (and of B via transposition).
struct ObservationOperator {
  ObservationSpec spec;
  int N = 0;
  double L = 0.0;
  Eigen::MatrixXd b_matrix;      // interior: multiplication matrix of b
  Eigen::MatrixXd slope_rows;    // boundary: (#endpoints x N) weighted slope functionals

  // B* applied to a modal coefficient vector (field of the target component).
  Eigen::VectorXd apply_bstar(const Eigen::VectorXd& field) const;
  // B applied to a value of G: the modal load that is exactly adjoint to
  // apply_bstar, <B v, w> = <v, B* w>.
  Eigen::VectorXd apply_b(const Eigen::VectorXd& g_value) const;
};

ObservationOperator make_observation_operator(const ObservationSpec& spec, int N, double L);

// Time series of the observation applied along a trajectory (velocity
// reading for interior, position slope for boundary).
struct ObservationSeries {
  TimeGrid grid;
  Eigen::MatrixXd values;  // (nodes x gdim)
};

ObservationSeries observe(const Trajectory& traj, const ObservationSpec& spec);

// trapezoid integral of ||observe||_G^2 over [0, T].
double admissibility_integral(const Trajectory& traj, const ObservationSpec& spec);
double admissibility_integral(const ObservationSeries& series);

// Turns a control signal v (sampled on the grid nodes, one row per node)
// into the modal source B v for the target component.
NodalSource control_load(const ObservationSpec& spec, int N, double L,
                         const Eigen::MatrixXd& signal, const TimeGrid& grid);

}  // namespace casclab
