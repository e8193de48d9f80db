#include "casclab/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace casclab {

void CascadeConfig::validate_structure() const {
  if (n < 1) throw InvalidArgument("cascade depth n must be >= 1");
  if (p < 0) throw InvalidArgument("mixed row count p must be >= 0");
  if (L <= 0.0) throw InvalidArgument("interval length must be positive");
  if (N < 1) throw InvalidArgument("truncation must be >= 1");
  if (static_cast<int>(subdiagonal.size()) != n - 1) {
    throw InvalidArgument("need exactly n-1 subdiagonal couplings");
  }
  if (static_cast<int>(coupling_regions.size()) != n - 1) {
    throw InvalidArgument("need exactly n-1 coupling regions");
  }
  if (!coercivity_margins.empty() && static_cast<int>(coercivity_margins.size()) != n - 1) {
    throw InvalidArgument("coercivity margins must be empty or size n-1");
  }
  for (const Interval& O : coupling_regions) {
    if (!O.valid_within(L) || O.length() <= 0.0) {
      throw HypothesisViolation("A3", "coupling region must be a nonempty open subinterval of (0,L)");
    }
  }
  for (const auto& od : offdiagonal) {
    if (od.row <= n || od.row > n + p) {
      throw InvalidArgument("off-diagonal coupling rows must lie in n+1..n+p");
    }
    if (od.col < n - 1 || od.col >= od.row) {
      throw InvalidArgument("off-diagonal coupling columns must lie in n-1..row-1");
    }
  }
}

CascadeState::CascadeState(int components, int N, double L) {
  positions.assign(components, SpectralField(N, L));
  velocities.assign(components, SpectralField(N, L));
}

void CascadeState::check_shape(const CascadeConfig& cfg) const {
  if (components() != cfg.components() || static_cast<int>(velocities.size()) != cfg.components()) {
    throw InvalidState("state component count does not match the configuration");
  }
  for (const auto& f : positions) {
    if (f.truncation() != cfg.N || f.length != cfg.L) throw InvalidState("state truncation/length mismatch");
  }
  for (const auto& f : velocities) {
    if (f.truncation() != cfg.N || f.length != cfg.L) throw InvalidState("state truncation/length mismatch");
  }
}

Eigen::VectorXd CascadeState::flatten() const {
  const int d = components();
  const int N = positions.empty() ? 0 : positions[0].truncation();
  Eigen::VectorXd x(2 * d * N);
  for (int i = 0; i < d; ++i) x.segment(i * N, N) = positions[i].coeffs;
  for (int i = 0; i < d; ++i) x.segment((d + i) * N, N) = velocities[i].coeffs;
  return x;
}

CascadeState CascadeState::unflatten(const Eigen::VectorXd& x, int components, int N, double L) {
  if (x.size() != 2 * components * N) throw InvalidArgument("flattened state has wrong size");
  CascadeState s(components, N, L);
  for (int i = 0; i < components; ++i) s.positions[i].coeffs = x.segment(i * N, N);
  for (int i = 0; i < components; ++i) s.velocities[i].coeffs = x.segment((components + i) * N, N);
  return s;
}

HypothesisReport validate_hypotheses(const CascadeConfig& cfg) {
  cfg.validate_structure();
  HypothesisReport rep;
  const int grid = 10000;
  for (int i = 2; i <= cfg.n; ++i) {
    const Coefficient& c = cfg.subdiagonal[static_cast<std::size_t>(i - 2)];
    const Interval& O = cfg.coupling_regions[static_cast<std::size_t>(i - 2)];
    HypothesisCheck chk;
    chk.row = i;
    double inf_all = 0.0, sup_all = 0.0, inf_region = std::numeric_limits<double>::infinity();
    for (int g = 0; g <= grid; ++g) {
      const double x = cfg.L * static_cast<double>(g) / grid;
      const double v = c(x);
      inf_all = std::min(inf_all, v);
      sup_all = std::max(sup_all, std::abs(v));
      if (O.contains(x)) inf_region = std::min(inf_region, v);
    }
    chk.beta = sup_all;
    chk.nonnegative = inf_all >= -1e-12 * std::max(1.0, sup_all);
    const double declared = cfg.coercivity_margins.empty()
                                ? inf_region
                                : cfg.coercivity_margins[static_cast<std::size_t>(i - 2)];
    chk.alpha = std::min(declared, inf_region);
    chk.coercive = std::isfinite(inf_region) && chk.alpha > 0.0;
    // For a multiplication operator the middle (A2) condition is exactly
    // 0 <= c <= beta pointwise, i.e. the sign check plus beta finite.
    chk.quadratic_bound = chk.nonnegative && std::isfinite(chk.beta);
    rep.pass = rep.pass && chk.nonnegative && chk.coercive && chk.quadratic_bound;
    rep.couplings.push_back(chk);
  }
  return rep;
}

SystemOperator build_operator(const CascadeConfig& cfg, Orientation orientation) {
  cfg.validate_structure();
  SystemOperator op;
  op.ncomp = cfg.components();
  op.N = cfg.N;
  op.L = cfg.L;
  op.lambda = eigenvalues(cfg.N, cfg.L);

  auto add = [&](int row1, int col1, const Coefficient& c) {
    auto m = std::make_shared<Eigen::MatrixXd>(assemble_multiplication(c, cfg.N, cfg.L).matrix);
    if (orientation == Orientation::controlled) std::swap(row1, col1);
    op.blocks.push_back(CouplingBlock{row1 - 1, col1 - 1, std::move(m)});
  };
  for (int i = 2; i <= cfg.n; ++i) add(i, i - 1, cfg.subdiagonal[static_cast<std::size_t>(i - 2)]);
  for (const auto& od : cfg.offdiagonal) add(od.row, od.col, od.c);
  return op;
}

void SystemOperator::add_coupling_force(const std::vector<Eigen::VectorXd>& pos,
                                        std::vector<Eigen::VectorXd>& out, double sign) const {
  for (const auto& blk : blocks) {
    out[static_cast<std::size_t>(blk.row)].noalias() +=
        sign * (*blk.matrix * pos[static_cast<std::size_t>(blk.col)]);
  }
}

CascadeState apply_first_order(const SystemOperator& op, const CascadeState& U) {
  if (U.components() != op.ncomp || U.positions[0].truncation() != op.N) {
    throw InvalidState("state does not match operator dimensions");
  }
  CascadeState R(op.ncomp, op.N, op.L);
  std::vector<Eigen::VectorXd> force(static_cast<std::size_t>(op.ncomp),
                                     Eigen::VectorXd::Zero(op.N));
  std::vector<Eigen::VectorXd> pos(static_cast<std::size_t>(op.ncomp));
  for (int i = 0; i < op.ncomp; ++i) pos[static_cast<std::size_t>(i)] = U.positions[static_cast<std::size_t>(i)].coeffs;
  op.add_coupling_force(pos, force, -1.0);
  for (int i = 0; i < op.ncomp; ++i) {
    R.positions[static_cast<std::size_t>(i)].coeffs = U.velocities[static_cast<std::size_t>(i)].coeffs;
    R.velocities[static_cast<std::size_t>(i)].coeffs =
        force[static_cast<std::size_t>(i)] -
        op.lambda.cwiseProduct(U.positions[static_cast<std::size_t>(i)].coeffs);
  }
  return R;
}

CascadeState apply_first_order(const CascadeConfig& cfg, const CascadeState& U) {
  U.check_shape(cfg);
  return apply_first_order(build_operator(cfg, Orientation::cascade), U);
}

CascadeState apply_inverse_first_order(const SystemOperator& op, const CascadeState& U) {
  CascadeState W(op.ncomp, op.N, op.L);
  const Eigen::VectorXd inv_lambda = op.lambda.cwiseInverse();
  // Forward recursion over components: every coupling block reads a column
  // strictly below its row, so rows can be resolved in increasing order.
  for (int i = 0; i < op.ncomp; ++i) {
    Eigen::VectorXd rhs = -U.velocities[static_cast<std::size_t>(i)].coeffs;
    for (const auto& blk : op.blocks) {
      if (blk.row != i) continue;
      if (blk.col >= i) throw InvalidState("inverse recursion requires lower-triangular couplings");
      rhs.noalias() -= *blk.matrix * W.positions[static_cast<std::size_t>(blk.col)].coeffs;
    }
    W.positions[static_cast<std::size_t>(i)].coeffs = inv_lambda.cwiseProduct(rhs);
    W.velocities[static_cast<std::size_t>(i)].coeffs = U.positions[static_cast<std::size_t>(i)].coeffs;
  }
  return W;
}

CascadeState apply_inverse_first_order(const CascadeConfig& cfg, const CascadeState& U) {
  U.check_shape(cfg);
  return apply_inverse_first_order(build_operator(cfg, Orientation::cascade), U);
}

std::vector<CascadeState> iterate_inverse(const CascadeConfig& cfg, const CascadeState& U, int l) {
  if (l < 1) throw InvalidArgument("iterate_inverse needs l >= 1");
  U.check_shape(cfg);
  const SystemOperator op = build_operator(cfg, Orientation::cascade);
  std::vector<CascadeState> chain;
  chain.reserve(static_cast<std::size_t>(l) + 1);
  chain.push_back(U);
  for (int i = 0; i < l; ++i) chain.push_back(apply_inverse_first_order(op, chain.back()));
  return chain;
}

nlohmann::json CascadeConfig::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["p"] = p;
  j["interval_length"] = L;
  j["modes"] = N;
  j["subdiagonal"] = nlohmann::json::array();
  for (const auto& c : subdiagonal) j["subdiagonal"].push_back(c.to_json());
  j["coupling_regions"] = nlohmann::json::array();
  for (const auto& O : coupling_regions) j["coupling_regions"].push_back({O.a, O.b});
  if (!coercivity_margins.empty()) j["coercivity_margins"] = coercivity_margins;
  if (!offdiagonal.empty()) {
    j["offdiagonal"] = nlohmann::json::array();
    for (const auto& od : offdiagonal) {
      j["offdiagonal"].push_back({{"row", od.row}, {"col", od.col}, {"coefficient", od.c.to_json()}});
    }
  }
  return j;
}

CascadeConfig CascadeConfig::from_json(const nlohmann::json& j) {
  CascadeConfig cfg;
  cfg.n = j.at("n").get<int>();
  cfg.p = j.value("p", 0);
  cfg.L = j.at("interval_length").get<double>();
  cfg.N = j.at("modes").get<int>();
  for (const auto& c : j.value("subdiagonal", nlohmann::json::array())) {
    cfg.subdiagonal.push_back(Coefficient::from_json(c));
  }
  for (const auto& r : j.value("coupling_regions", nlohmann::json::array())) {
    cfg.coupling_regions.push_back(Interval{r.at(0).get<double>(), r.at(1).get<double>()});
  }
  if (j.contains("coercivity_margins")) {
    cfg.coercivity_margins = j.at("coercivity_margins").get<std::vector<double>>();
  }
  for (const auto& od : j.value("offdiagonal", nlohmann::json::array())) {
    cfg.offdiagonal.push_back(CascadeConfig::OffDiagonal{
        od.at("row").get<int>(), od.at("col").get<int>(),
        Coefficient::from_json(od.at("coefficient"))});
  }
  cfg.validate_structure();
  return cfg;
}

}  // namespace casclab
