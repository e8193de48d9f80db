#include "casclab/evolution.hpp"

#include <cmath>

namespace casclab {

TimeGrid exact_grid(double T, double dt) {
  if (T <= 0.0 || dt <= 0.0) throw InvalidArgument("need T > 0 and dt > 0");
  const double ratio = T / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw GridMismatch("horizon is not a whole number of steps");
  }
  return TimeGrid{dt, static_cast<std::size_t>(rounded)};
}

TimeGrid snapped_grid(double T, double dt_hint) {
  if (T <= 0.0 || dt_hint <= 0.0) throw InvalidArgument("need T > 0 and dt > 0");
  const std::size_t steps = static_cast<std::size_t>(std::max(1.0, std::round(T / dt_hint)));
  return TimeGrid{T / static_cast<double>(steps), steps};
}

double stability_limit(const SystemOperator& op) {
  return 0.5 / std::sqrt(op.lambda[op.N - 1]);
}

double trapezoid_weight(const TimeGrid& grid, std::size_t m) {
  return (m == 0 || m == grid.steps) ? 0.5 * grid.dt : grid.dt;
}

namespace {

struct Rotation {
  Eigen::VectorXd cos_wdt, sin_over_w, neg_w_sin;
};

Rotation make_rotation(const Eigen::VectorXd& lambda, double dt) {
  const int N = static_cast<int>(lambda.size());
  Rotation r{Eigen::VectorXd(N), Eigen::VectorXd(N), Eigen::VectorXd(N)};
  for (int k = 0; k < N; ++k) {
    const double w = std::sqrt(lambda[k]);
    r.cos_wdt[k] = std::cos(w * dt);
    r.sin_over_w[k] = std::sin(w * dt) / w;
    r.neg_w_sin[k] = -w * std::sin(w * dt);
  }
  return r;
}

}  // namespace

void evolve(const SystemOperator& op, const CascadeState& from, const TimeGrid& grid,
            const SourceList* sources, Direction direction, const NodeVisitor& visit) {
  const int d = op.ncomp;
  const int N = op.N;
  if (from.components() != d || from.positions[0].truncation() != N) {
    throw InvalidState("state does not match operator dimensions");
  }
  if (grid.dt > stability_limit(op) * (1.0 + 1e-12)) {
    throw StepTooLarge("dt exceeds the stability guard 0.5/sqrt(lambda_N)");
  }
  if (sources) {
    for (const auto& s : *sources) {
      if (s.component < 0 || s.component >= d) throw InvalidArgument("source component out of range");
      if (s.modal.rows() != static_cast<Eigen::Index>(grid.nodes()) || s.modal.cols() != N) {
        throw GridMismatch("source series does not match the time grid");
      }
    }
  }

  const bool back = direction == Direction::backward;
  const Rotation rot = make_rotation(op.lambda, grid.dt);

  std::vector<Eigen::VectorXd> pos(static_cast<std::size_t>(d)), vel(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    pos[static_cast<std::size_t>(i)] = from.positions[static_cast<std::size_t>(i)].coeffs;
    // Reflection trick for terminal-value problems: integrate the
    // velocity-negated state forward, then mirror node indices.
    vel[static_cast<std::size_t>(i)] =
        back ? (-from.velocities[static_cast<std::size_t>(i)].coeffs).eval()
             : from.velocities[static_cast<std::size_t>(i)].coeffs;
  }

  // The reflected run solves the same forward system; only the source clock
  // runs backwards and the visitor flips indices/velocities back.
  auto source_at = [&](std::size_t node, std::vector<Eigen::VectorXd>& f) {
    if (!sources) return;
    const std::size_t idx = back ? grid.steps - node : node;
    for (const auto& s : *sources) {
      f[static_cast<std::size_t>(s.component)] += s.modal.row(static_cast<Eigen::Index>(idx)).transpose();
    }
  };
  auto emit = [&](std::size_t node) {
    if (!visit) return;
    if (!back) {
      visit(node, pos, vel);
      return;
    }
    std::vector<Eigen::VectorXd> v(vel.size());
    for (std::size_t i = 0; i < vel.size(); ++i) v[i] = -vel[i];
    visit(grid.steps - node, pos, v);
  };

  std::vector<Eigen::VectorXd> force(static_cast<std::size_t>(d), Eigen::VectorXd::Zero(N));
  auto node_force = [&](std::size_t node) {
    for (auto& f : force) f.setZero();
    op.add_coupling_force(pos, force, -1.0);
    source_at(node, force);
  };

  emit(0);
  const double half = 0.5 * grid.dt;
  node_force(0);
  for (std::size_t m = 0; m < grid.steps; ++m) {
    for (int i = 0; i < d; ++i) vel[static_cast<std::size_t>(i)] += half * force[static_cast<std::size_t>(i)];
    for (int i = 0; i < d; ++i) {
      Eigen::VectorXd& a = pos[static_cast<std::size_t>(i)];
      Eigen::VectorXd& v = vel[static_cast<std::size_t>(i)];
      const Eigen::VectorXd anew =
          rot.cos_wdt.cwiseProduct(a) + rot.sin_over_w.cwiseProduct(v);
      v = rot.neg_w_sin.cwiseProduct(a) + rot.cos_wdt.cwiseProduct(v);
      a = anew;
    }
    node_force(m + 1);
    for (int i = 0; i < d; ++i) vel[static_cast<std::size_t>(i)] += half * force[static_cast<std::size_t>(i)];
    emit(m + 1);
  }
}

namespace {

Trajectory run_recording(const SystemOperator& op, const CascadeState& from,
                         const TimeGrid& grid, const SourceList* src, Direction dir) {
  Trajectory traj;
  traj.grid = grid;
  traj.direction = dir;
  traj.states.assign(grid.nodes(), CascadeState(op.ncomp, op.N, op.L));
  evolve(op, from, grid, src, dir,
         [&](std::size_t node, const std::vector<Eigen::VectorXd>& pos,
             const std::vector<Eigen::VectorXd>& vel) {
           CascadeState& s = traj.states[node];
           for (int i = 0; i < op.ncomp; ++i) {
             s.positions[static_cast<std::size_t>(i)].coeffs = pos[static_cast<std::size_t>(i)];
             s.velocities[static_cast<std::size_t>(i)].coeffs = vel[static_cast<std::size_t>(i)];
           }
         });
  return traj;
}

}  // namespace

Trajectory integrate_forward(const SystemOperator& op, const CascadeState& U0,
                             const TimeGrid& grid, const SourceList* src) {
  return run_recording(op, U0, grid, src, Direction::forward);
}

Trajectory integrate_forward(const CascadeConfig& cfg, const CascadeState& U0, double T,
                             double dt, const SourceList* src, Orientation orientation) {
  U0.check_shape(cfg);
  return integrate_forward(build_operator(cfg, orientation), U0, exact_grid(T, dt), src);
}

Trajectory integrate_backward(const SystemOperator& op, const CascadeState& UT,
                              const TimeGrid& grid) {
  return run_recording(op, UT, grid, nullptr, Direction::backward);
}

Trajectory integrate_backward(const CascadeConfig& cfg, const CascadeState& UT, double T,
                              double dt, Orientation orientation) {
  UT.check_shape(cfg);
  return integrate_backward(build_operator(cfg, orientation), UT, exact_grid(T, dt));
}

Trajectory evolve_adjoint_observability(const CascadeConfig& cfg, const CascadeState& WT,
                                        double T, double dt) {
  return integrate_backward(cfg, WT, T, dt, Orientation::cascade);
}

}  // namespace casclab
