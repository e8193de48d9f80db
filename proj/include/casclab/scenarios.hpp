#pragma once

#include <Eigen/Dense>

#include <nlohmann/json.hpp>

#include "casclab/hum.hpp"

namespace casclab {

// Three wave equations coupled in parallel through zero-order terms built
// from two coefficients alpha, beta; a single scalar control h drives all
// three components through the fixed gains (2h, 4h, h).
struct SimultaneousSystem {
  Coefficient alpha;
  Coefficient beta;
  double L = 3.14159265358979323846;
  int N = 16;
  CascadeState p0;  // initial (p_1..p_3, p_1'..p_3')

  nlohmann::json to_json() const;
  static SimultaneousSystem from_json(const nlohmann::json& j);
};

// Change of unknowns y = M p turning the parallel system into a 3-cascade
// with couplings 6*alpha and beta/2 and a single source 3h on the last row.
struct SimultaneousTransform {
  Eigen::Matrix3d M;      // y = M p, componentwise on modal coefficients
  Eigen::Matrix3d M_inv;  // p = M_inv y
  Eigen::Vector3d gains;  // (2, 4, 1): v_i = gains_i * h
  double source_gain = 3.0;  // cascade source on y_3 is 3h

  CascadeState to_cascade(const CascadeState& p) const;
  CascadeState to_parallel(const CascadeState& y) const;
};

std::pair<CascadeConfig, SimultaneousTransform> simultaneous_to_cascade(
    const SimultaneousSystem& sys, const Interval& O2, const Interval& O3);

// Block operator of the parallel p-system (used for the verification run
// and the transformation-consistency oracle); rows are not cascade-shaped,
// so this bypasses the cascade builder on purpose.
SystemOperator parallel_system_operator(const SimultaneousSystem& sys);

struct SimultaneousSolution {
  HumSolution cascade;            // inner synthesis on the y-cascade
  Eigen::MatrixXd h;              // scalar control signal h(t) (nodes x N modal)
  double terminal_energy = 0.0;   // sum of natural energies of p at T
  double initial_energy = 0.0;
  bool success = false;

  nlohmann::json to_json() const;
};

// Transform, synthesize a single cascade control, map back to (2h,4h,h) and
// verify on the original parallel system.
SimultaneousSolution solve_simultaneous(const SimultaneousSystem& sys, const Interval& O2,
                                        const Interval& O3, double T, double dt, double tol);

// Insensitizing control for the scalar wave equation: the measurement
//   phi(y) = 1/2 int int c y^2
// is made first-order insensitive to initial-data perturbations by steering
// the auxiliary pair of the associated 2-cascade to zero at both ends.
struct InsensitizingResult {
  HumSolution hum;
  double phi = 0.0;                  // measurement at the controlled solution
  std::vector<double> dphi_dtau0;    // centered-difference sensitivities
  std::vector<double> dphi_dtau1;    // per random perturbation direction
  double max_relative_sensitivity = 0.0;
  bool success = false;

  nlohmann::json to_json() const;
};

// Perturbation directions default to random unit (z0, z1) pairs in the
// energy norms; explicit pairs override them verbatim (a zero pair makes
// the centered differences vanish identically).
using PerturbationDirections = std::vector<std::pair<SpectralField, SpectralField>>;

InsensitizingResult insensitizing_pipeline(const SpectralField& y0, const SpectralField& y1,
                                           const Coefficient& b, const Interval& omega,
                                           const Coefficient& c, const Interval& O, double T,
                                           double dt, double tol, int directions = 5,
                                           double eps = 1e-4, std::uint64_t seed = 2026,
                                           bool with_control = true,
                                           const PerturbationDirections* explicit_dirs = nullptr);

}  // namespace casclab
