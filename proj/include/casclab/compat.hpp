#pragma once

#include <vector>

#include "casclab/coefficient.hpp"
#include "casclab/common.hpp"

namespace casclab {

// 1D compatibility machinery: multiplication by c maps H_k into H_k exactly
// when the odd derivatives c^(2p-1) vanish at both endpoints for
// p = 1..floor((k-1)/2). No conditions for k <= 2.

struct CompatCondition {
  int derivative_order;  // odd order 2p-1
  double at_left;
  double at_right;
  bool ok;
};

struct CompatReport {
  int level = 0;          // Sobolev level k checked
  int dimension = 1;      // reserved; only d = 1 is implemented
  double tolerance = 1e-8;
  std::vector<CompatCondition> conditions;
  bool pass = true;
};

// Endpoint odd-derivative check via one-sided finite differences of order 6.
CompatReport check_compat_1d(const Coefficient& c, int k, double L,
                             double tolerance = 1e-8);

// Smooth nonnegative plateau supported strictly inside (0, L): c = amplitude
// on the closure of O, c >= amplitude/2 on O, support inside a declared
// delta-neighborhood. Compact support makes every endpoint derivative vanish,
// so the compatibility condition holds at every level.
Coefficient build_bump(const Interval& O, double L, double amplitude,
                       int smoothness_order = 0, double delta = -1.0);

struct HkStabilityEntry {
  int truncation;
  double operator_norm;   // sup over unit-|.|_k fields of |P_N(c u)|_k
  double quadratic_gain;  // its square: the |.|_k^2 energy amplification
};

struct HkStabilityReport {
  int level = 0;
  std::vector<HkStabilityEntry> entries;
  double growth = 1.0;  // last/first quadratic gain
  bool stable = true;   // growth <= 2 from smallest to largest N
};

// Numerical signature of c.u leaving H_k: the energy amplification of the
// truncated map u -> P_N(c u) in the |.|_k^2 metric grows without bound iff
// the compatibility condition fails; the report flags growth beyond 2x
// across the truncation sweep.
HkStabilityReport verify_Hk_stability(const Coefficient& c, int k, double L,
                                      const std::vector<int>& truncations);

}  // namespace casclab
