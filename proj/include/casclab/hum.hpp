#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "casclab/cascade.hpp"
#include "casclab/energy.hpp"
#include "casclab/evolution.hpp"
#include "casclab/observation.hpp"

namespace casclab {

// Control-operator regularity class. bounded pairs interior multiplication
// controls with velocity observations; unbounded pairs boundary loading
// with the position's boundary slope; mixed(q) puts the q+1 leading
// controls (components n..n+q) in the unbounded class and the rest in the
// bounded class. The reversed ordering is structurally rejected.
enum class ControlVariant { bounded, unbounded, mixed };

enum class SolveMethod { automatic, dense, cg };

struct ControlProblem {
  CascadeConfig cfg;
  CascadeState Y0;
  double T = 0.0;
  double dt = 1e-3;
  std::vector<ObservationSpec> controls;  // one per component n..n+p, ascending
  ControlVariant variant = ControlVariant::bounded;
  int q = 0;  // only for mixed

  // Optional spectral cutoff: zero out adjoint terminal modes above this
  // index before synthesis (discrete high-frequency experiment knob).
  int mode_filter = 0;

  void validate() const;

  // Energy levels of the controlled state's natural space (per component):
  // the steering residual and the initial energy are measured there.
  std::vector<int> state_levels() const;
  // Energy levels of the adjoint terminal space.
  std::vector<int> adjoint_levels() const;

  nlohmann::json to_json() const;
  static ControlProblem from_json(const nlohmann::json& j);
};

struct SolverInfo {
  std::string method;  // "dense" | "cg"
  int iterations = 0;
  double residual = 0.0;
};

struct HumSolution {
  enum class Status { success, not_controllable_at_this_T };

  Status status = Status::success;
  CascadeState adjoint_terminal;          // minimizer W^T
  std::vector<Eigen::MatrixXd> controls;  // per controlled component, (nodes x gdim)
  SolverInfo solver;
  double terminal_residual = 0.0;  // energy of Y(T) at the variant levels
  double initial_energy = 0.0;     // same measure of Y0
  std::optional<std::pair<double, double>> gramian_conditioning;  // (min,max) eig when dense
  int uncontrolled_dimension = 0;  // spectral-cutoff complement (dense)

  bool success() const { return status == Status::success; }

  nlohmann::json to_json() const;
};

// One application of the control Gramian in terminal-data coordinates:
// backward homogeneous adjoint from WT, controls v_l = B_l^* w_l (position
// extraction), controlled system forward from zero data, and the returned
// state packs the terminal duality pairing (positions <- y'(T),
// velocities <- -y(T)). With the node-kick integrator this map is the exact
// transpose-square of the discrete observation map, so
// <gramian_apply(X), Y> = <gramian_apply(Y), X> holds to rounding.
CascadeState gramian_apply(const ControlProblem& problem, const CascadeState& WT);

// Duality pairings of the adjoint solution at t = 0 against the initial
// data, one entry per supplied basis terminal datum:
//   L(W~T) = sum_k <y_k^1, w~_k(0)> - sum_k <y_k^0, w~'_k(0)>.
Eigen::VectorXd assemble_linear_form(const ControlProblem& problem,
                                     const std::vector<CascadeState>& WT_basis);

// The same linear form assembled from one homogeneous forward run of the
// controlled system (exact discrete transposition); coordinates match
// assemble_linear_form on the standard basis.
Eigen::VectorXd linear_form_vector(const ControlProblem& problem);

struct DenseGramian {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd eigenvalues;  // ascending
  double min_eigenvalue() const { return eigenvalues[0]; }
  double max_eigenvalue() const { return eigenvalues[eigenvalues.size() - 1]; }
};

// Full Gramian via gramian_apply on the coordinate basis (columns are
// independent backward/forward solves and run data-parallel), plus its
// spectrum. A positive smallest eigenvalue certifies discrete
// observability at this (N, T).
DenseGramian dense_gramian(const ControlProblem& problem, int dimension_cap = 4000);

// HUM synthesis: solve Gramian * WT = -linear_form, emit the controls along
// the minimizing adjoint, re-simulate the controlled system from Y0 using
// only those control signals, and report the terminal residual.
HumSolution solve_hum(const ControlProblem& problem, double tol = 1e-8, int max_iter = 2000,
                      SolveMethod method = SolveMethod::automatic);

// Extract the control signals for a given adjoint terminal datum.
std::vector<Eigen::MatrixXd> extract_controls(const ControlProblem& problem,
                                              const CascadeState& WT);

// Forward controlled run driven by explicit control signals.
Trajectory simulate_controlled(const ControlProblem& problem,
                               const std::vector<Eigen::MatrixXd>& controls,
                               const CascadeState& from);

}  // namespace casclab
