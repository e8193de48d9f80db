#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "casclab/cascade.hpp"
#include "casclab/common.hpp"

namespace casclab {

// Uniform time grid 0 = t_0 < ... < t_M = T.
struct TimeGrid {
  double dt = 0.0;
  std::size_t steps = 0;

  double horizon() const { return dt * static_cast<double>(steps); }
  std::size_t nodes() const { return steps + 1; }
  double time(std::size_t m) const { return dt * static_cast<double>(m); }
};

// Requires T to be a whole number of steps (up to rounding slack).
TimeGrid exact_grid(double T, double dt);

// Rounds the step count and adjusts dt so that M*dt = T exactly.
TimeGrid snapped_grid(double T, double dt_hint);

enum class Direction { forward, backward };

// Per-component modal source series sampled at the grid nodes:
// row m of `modal` is the force f_i(t_m) in coefficients.
struct NodalSource {
  int component = 0;  // 0-based
  Eigen::MatrixXd modal;  // (nodes x N)
};

using SourceList = std::vector<NodalSource>;

struct Trajectory {
  TimeGrid grid;
  Direction direction = Direction::forward;
  std::vector<CascadeState> states;  // states[m] at time t_m, ascending

  const CascadeState& initial() const { return states.front(); }
  const CascadeState& final() const { return states.back(); }
};

// Node visitor for streaming runs: (node index, positions, velocities).
using NodeVisitor =
    std::function<void(std::size_t, const std::vector<Eigen::VectorXd>&,
                       const std::vector<Eigen::VectorXd>&)>;

// Second-order modal integrator, kick-drift-kick form: coupling forces and
// sources kick the velocities at the grid nodes; the drift stage advances
// every decoupled mode by its exact rotation
//   (a, a') -> (cos(w dt) a + sin(w dt)/w a', -w sin(w dt) a + cos(w dt) a').
// A free component is therefore integrated exactly, which is what the
// conservation and reversibility guarantees lean on; coupling splitting is
// second order in dt. The in-step source average is the trapezoid of the
// two node samples, so the discrete transposition identity below holds to
// rounding, not just O(dt^2).
//
// The stability guard dt <= 0.5/sqrt(lambda_N) is enforced for
// reproducibility even though the rotation stage is unconditionally stable.
void evolve(const SystemOperator& op, const CascadeState& from, const TimeGrid& grid,
            const SourceList* sources, Direction direction, const NodeVisitor& visit);

Trajectory integrate_forward(const SystemOperator& op, const CascadeState& U0,
                             const TimeGrid& grid, const SourceList* src = nullptr);
Trajectory integrate_forward(const CascadeConfig& cfg, const CascadeState& U0, double T,
                             double dt, const SourceList* src = nullptr,
                             Orientation orientation = Orientation::cascade);

// Terminal-value problem solved by time reflection: negate velocities,
// integrate forward, reflect back. states[m] still sits at time t_m.
Trajectory integrate_backward(const SystemOperator& op, const CascadeState& UT,
                              const TimeGrid& grid);
Trajectory integrate_backward(const CascadeConfig& cfg, const CascadeState& UT, double T,
                              double dt, Orientation orientation = Orientation::cascade);

// Backward solve of the homogeneous observability system; identical
// dynamics to integrate_backward with no source. Named separately because
// the control synthesis consumes it.
Trajectory evolve_adjoint_observability(const CascadeConfig& cfg, const CascadeState& WT,
                                        double T, double dt);

double stability_limit(const SystemOperator& op);

// Trapezoid weight for node m on a grid (dt at interior nodes, dt/2 at ends).
double trapezoid_weight(const TimeGrid& grid, std::size_t m);

}  // namespace casclab
