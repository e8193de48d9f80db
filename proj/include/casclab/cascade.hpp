#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "casclab/coefficient.hpp"
#include "casclab/common.hpp"
#include "casclab/spectral.hpp"

namespace casclab {

// Cascade system description. Components 1..n form the bi-diagonal block
// (equation i is forced only by component i-1 through c_{i,i-1}); components
// n+1..n+p may additionally couple to any earlier component from index n-1
// on. n = 1 is the degenerate scalar case (no couplings).
struct CascadeConfig {
  int n = 2;
  int p = 0;
  double L = 3.14159265358979323846;
  int N = 16;

  // c_{i,i-1} for i = 2..n (size n-1).
  std::vector<Coefficient> subdiagonal;

  struct OffDiagonal {
    int row = 0;  // i in n+1..n+p
    int col = 0;  // k in n-1..i-1
    Coefficient c;
  };
  std::vector<OffDiagonal> offdiagonal;

  // Coupling regions O_i for i = 2..n (size n-1); where c_{i,i-1} must be
  // bounded below by a positive constant.
  std::vector<Interval> coupling_regions;

  // Optional declared coercivity margins alpha_i; when absent they default
  // to the grid infimum of c_{i,i-1} over O_i.
  std::vector<double> coercivity_margins;

  int components() const { return n + p; }

  // Shape/structure checks (throws): dimensions, region validity, and the
  // coupling pattern (off-diagonal entries only in rows > n with columns
  // >= n-1; requesting any other entry is rejected).
  void validate_structure() const;

  nlohmann::json to_json() const;
  static CascadeConfig from_json(const nlohmann::json& j);
};

// The 2(n+p)-tuple (u_1..u_{n+p}, u_1'..u_{n+p}').
struct CascadeState {
  std::vector<SpectralField> positions;
  std::vector<SpectralField> velocities;

  CascadeState() = default;
  CascadeState(int components, int N, double L);

  int components() const { return static_cast<int>(positions.size()); }
  void check_shape(const CascadeConfig& cfg) const;

  // Plain coordinate (de)serialization: all position coefficients then all
  // velocity coefficients, component-major.
  Eigen::VectorXd flatten() const;
  static CascadeState unflatten(const Eigen::VectorXd& x, int components, int N, double L);
};

// Per-hypothesis validation results for the coupling assumptions.
struct HypothesisCheck {
  int row = 0;               // i of c_{i,i-1}
  double alpha = 0.0;        // inf of c over O_i (or declared margin)
  double beta = 0.0;         // sup |c| over (0,L)
  bool nonnegative = true;   // c >= 0 everywhere           (A2 sign)
  bool coercive = true;      // c >= alpha > 0 on O_i       (A2 lower bound)
  bool quadratic_bound = true;  // 0 <= c <= beta pointwise  (A2 middle)
};

struct HypothesisReport {
  std::vector<HypothesisCheck> couplings;
  bool pass = true;
};

// Samples each subdiagonal coupling on a fine grid (10k points) and checks
// the sign, coercivity and quadratic-bound conditions. For multiplication
// operators the quadratic bound |c w|^2 <= beta <c w, w> reduces to
// 0 <= c <= beta pointwise.
HypothesisReport validate_hypotheses(const CascadeConfig& cfg);

// Assembled modal operator: block structure of the second-order system
//   u_i'' + Lambda u_i + sum_j C_{ij} u_j = f_i.
// Orientation::cascade uses the lower (adjoint/observability) pattern,
// Orientation::controlled its transpose (control system pattern).
enum class Orientation { cascade, controlled };

struct CouplingBlock {
  int row = 0;  // 0-based component receiving the force
  int col = 0;  // 0-based component it reads
  std::shared_ptr<const Eigen::MatrixXd> matrix;
};

struct SystemOperator {
  int ncomp = 0;
  int N = 0;
  double L = 0.0;
  Eigen::VectorXd lambda;
  std::vector<CouplingBlock> blocks;

  int dim() const { return 2 * ncomp * N; }

  // velocity_slot_i -= sum_j C_{ij} positions_j  (plus Lambda handled by the
  // integrator's rotation stage); exposed for direct operator application.
  void add_coupling_force(const std::vector<Eigen::VectorXd>& pos,
                          std::vector<Eigen::VectorXd>& out, double sign) const;
};

SystemOperator build_operator(const CascadeConfig& cfg, Orientation orientation);

// First-order vector field: A_n U = (velocities, -Lambda u_i - sum C_ij u_j).
CascadeState apply_first_order(const CascadeConfig& cfg, const CascadeState& U);
CascadeState apply_first_order(const SystemOperator& op, const CascadeState& U);

// Explicit inverse by forward recursion:
//   w_i = -A^{-1} u_i' - A^{-1} sum_j C_{ij} w_j,   z_i = u_i.
// Exact in the truncated space.
CascadeState apply_inverse_first_order(const CascadeConfig& cfg, const CascadeState& U);
CascadeState apply_inverse_first_order(const SystemOperator& op, const CascadeState& U);

// W^0 = U, W^{l+1} = A^{-1} W^l; returns all of W^0..W^l.
std::vector<CascadeState> iterate_inverse(const CascadeConfig& cfg, const CascadeState& U, int l);

}  // namespace casclab
