#include "casclab/hum.hpp"

#include <algorithm>
#include <cmath>

#include "casclab/parallel.hpp"

namespace casclab {

void ControlProblem::validate() const {
  cfg.validate_structure();
  Y0.check_shape(cfg);
  if (T <= 0.0 || dt <= 0.0) throw InvalidArgument("need T > 0 and dt > 0");
  if (static_cast<int>(controls.size()) != cfg.p + 1) {
    throw InvalidArgument("need exactly p+1 control specs for components n..n+p");
  }
  for (int k = 0; k <= cfg.p; ++k) {
    const ObservationSpec& s = controls[static_cast<std::size_t>(k)];
    if (s.component != cfg.n + k) {
      throw InvalidArgument("control specs must target components n..n+p in order");
    }
    const bool boundary = s.kind == ObservationSpec::Kind::boundary;
    switch (variant) {
      case ControlVariant::bounded:
        if (boundary) throw InvalidArgument("bounded variant requires interior control operators");
        break;
      case ControlVariant::unbounded:
        if (!boundary) throw InvalidArgument("unbounded variant requires boundary control operators");
        break;
      case ControlVariant::mixed:
        if (q < 0 || q > cfg.p) throw InvalidArgument("mixed variant needs 0 <= q <= p");
        // Unbounded block first; a bounded operator ahead of an unbounded
        // one is the ordering the duality argument does not cover.
        if (k <= q && !boundary) {
          throw InvalidArgument("mixed variant: components n..n+q must use boundary operators");
        }
        if (k > q && boundary) {
          throw InvalidArgument("mixed variant: components after n+q must use interior operators");
        }
        break;
    }
  }
  if (mode_filter < 0 || mode_filter > cfg.N) throw InvalidArgument("mode filter out of range");
}

std::vector<int> ControlProblem::state_levels() const {
  std::vector<int> lv;
  const int n = cfg.n;
  switch (variant) {
    case ControlVariant::bounded:
      for (int i = 1; i <= n; ++i) lv.push_back(n - i + 1);
      for (int j = 0; j < cfg.p; ++j) lv.push_back(1);
      break;
    case ControlVariant::unbounded:
      for (int i = 1; i <= n; ++i) lv.push_back(n - i);
      for (int j = 0; j < cfg.p; ++j) lv.push_back(0);
      break;
    case ControlVariant::mixed:
      for (int i = 1; i <= n; ++i) lv.push_back(n - i);
      for (int j = 1; j <= cfg.p; ++j) lv.push_back(j <= q ? 0 : 1);
      break;
  }
  return lv;
}

std::vector<int> ControlProblem::adjoint_levels() const {
  std::vector<int> lv;
  const int n = cfg.n;
  switch (variant) {
    case ControlVariant::bounded:
      for (int i = 1; i <= n; ++i) lv.push_back(i - n);
      for (int j = 0; j < cfg.p; ++j) lv.push_back(0);
      break;
    case ControlVariant::unbounded:
      for (int i = 1; i <= n; ++i) lv.push_back(1 + i - n);
      for (int j = 0; j < cfg.p; ++j) lv.push_back(1);
      break;
    case ControlVariant::mixed:
      for (int i = 1; i <= n; ++i) lv.push_back(1 + i - n);
      for (int j = 1; j <= cfg.p; ++j) lv.push_back(j <= q ? 1 : 0);
      break;
  }
  return lv;
}

namespace {

struct Prepared {
  TimeGrid grid;
  SystemOperator adjoint_op;     // cascade orientation
  SystemOperator controlled_op;  // transposed couplings
  std::vector<ObservationOperator> obs_ops;
};

Prepared prepare(const ControlProblem& pb) {
  pb.validate();
  Prepared pre;
  pre.grid = exact_grid(pb.T, pb.dt);
  pre.adjoint_op = build_operator(pb.cfg, Orientation::cascade);
  pre.controlled_op = build_operator(pb.cfg, Orientation::controlled);
  for (const auto& spec : pb.controls) {
    pre.obs_ops.push_back(make_observation_operator(spec, pb.cfg.N, pb.cfg.L));
  }
  return pre;
}

void apply_mode_filter(const ControlProblem& pb, CascadeState& s) {
  if (pb.mode_filter <= 0 || pb.mode_filter >= pb.cfg.N) return;
  for (auto& f : s.positions) f.coeffs.tail(pb.cfg.N - pb.mode_filter).setZero();
  for (auto& f : s.velocities) f.coeffs.tail(pb.cfg.N - pb.mode_filter).setZero();
}

// Backward adjoint solve with streaming extraction v_l(t_m) = B_l^* w_l(t_m).
std::vector<Eigen::MatrixXd> adjoint_controls(const Prepared& pre, const ControlProblem& pb,
                                              const CascadeState& WT) {
  std::vector<Eigen::MatrixXd> v;
  for (const auto& spec : pb.controls) {
    v.emplace_back(static_cast<Eigen::Index>(pre.grid.nodes()), spec.gdim(pb.cfg.N));
  }
  evolve(pre.adjoint_op, WT, pre.grid, nullptr, Direction::backward,
         [&](std::size_t m, const std::vector<Eigen::VectorXd>& pos,
             const std::vector<Eigen::VectorXd>&) {
           for (std::size_t l = 0; l < pre.obs_ops.size(); ++l) {
             const std::size_t c = static_cast<std::size_t>(pb.controls[l].component - 1);
             v[l].row(static_cast<Eigen::Index>(m)) =
                 pre.obs_ops[l].apply_bstar(pos[c]).transpose();
           }
         });
  return v;
}

SourceList control_sources(const Prepared& pre, const ControlProblem& pb,
                           const std::vector<Eigen::MatrixXd>& controls) {
  SourceList src;
  for (std::size_t l = 0; l < controls.size(); ++l) {
    src.push_back(control_load(pb.controls[l], pb.cfg.N, pb.cfg.L, controls[l], pre.grid));
  }
  return src;
}

CascadeState terminal_pairing_state(const ControlProblem& pb, const CascadeState& yT) {
  // Pack the functional W~T -> <y'(T), w~T> - <y(T), q~T> as a plain state.
  CascadeState g(pb.cfg.components(), pb.cfg.N, pb.cfg.L);
  for (int i = 0; i < pb.cfg.components(); ++i) {
    g.positions[static_cast<std::size_t>(i)].coeffs = yT.velocities[static_cast<std::size_t>(i)].coeffs;
    g.velocities[static_cast<std::size_t>(i)].coeffs = -yT.positions[static_cast<std::size_t>(i)].coeffs;
  }
  return g;
}

CascadeState run_controlled(const Prepared& pre, const ControlProblem& pb,
                            const CascadeState& from, const SourceList* src) {
  CascadeState out(pb.cfg.components(), pb.cfg.N, pb.cfg.L);
  evolve(pre.controlled_op, from, pre.grid, src, Direction::forward,
         [&](std::size_t m, const std::vector<Eigen::VectorXd>& pos,
             const std::vector<Eigen::VectorXd>& vel) {
           if (m != pre.grid.steps) return;
           for (int i = 0; i < pb.cfg.components(); ++i) {
             out.positions[static_cast<std::size_t>(i)].coeffs = pos[static_cast<std::size_t>(i)];
             out.velocities[static_cast<std::size_t>(i)].coeffs = vel[static_cast<std::size_t>(i)];
           }
         });
  return out;
}

double state_energy(const ControlProblem& pb, const CascadeState& s) {
  const std::vector<int> lv = pb.state_levels();
  double acc = 0.0;
  for (int i = 1; i <= pb.cfg.components(); ++i) {
    acc += level_energy(s, i, lv[static_cast<std::size_t>(i - 1)]);
  }
  return acc;
}

CascadeState gramian_apply_prepared(const Prepared& pre, const ControlProblem& pb,
                                    const CascadeState& WT) {
  CascadeState wt = WT;
  apply_mode_filter(pb, wt);
  const auto controls = adjoint_controls(pre, pb, wt);
  const SourceList src = control_sources(pre, pb, controls);
  const CascadeState zero(pb.cfg.components(), pb.cfg.N, pb.cfg.L);
  CascadeState g = terminal_pairing_state(pb, run_controlled(pre, pb, zero, &src));
  apply_mode_filter(pb, g);
  return g;
}

}  // namespace

CascadeState gramian_apply(const ControlProblem& pb, const CascadeState& WT) {
  return gramian_apply_prepared(prepare(pb), pb, WT);
}

Eigen::VectorXd assemble_linear_form(const ControlProblem& pb,
                                     const std::vector<CascadeState>& WT_basis) {
  const Prepared pre = prepare(pb);
  const Eigen::VectorXd y0 = pb.Y0.flatten();
  const int d = pb.cfg.components();
  const int N = pb.cfg.N;
  Eigen::VectorXd out(static_cast<Eigen::Index>(WT_basis.size()));
  parallel_for(WT_basis.size(), [&](std::size_t b) {
    const Trajectory w = integrate_backward(pre.adjoint_op, WT_basis[b], pre.grid);
    const Eigen::VectorXd w0 = w.initial().flatten();
    double acc = 0.0;
    for (int k = 0; k < d; ++k) {
      acc += y0.segment((d + k) * N, N).dot(w0.segment(k * N, N));   // <y^1, w(0)>
      acc -= y0.segment(k * N, N).dot(w0.segment((d + k) * N, N));   // <y^0, w'(0)>
    }
    out[static_cast<Eigen::Index>(b)] = acc;
  });
  return out;
}

Eigen::VectorXd linear_form_vector(const ControlProblem& pb) {
  const Prepared pre = prepare(pb);
  CascadeState g = terminal_pairing_state(pb, run_controlled(pre, pb, pb.Y0, nullptr));
  apply_mode_filter(pb, g);
  return g.flatten();
}

DenseGramian dense_gramian(const ControlProblem& pb, int dimension_cap) {
  const Prepared pre = prepare(pb);
  const int dim = pre.adjoint_op.dim();
  if (dim > dimension_cap) throw TooLarge("terminal space dimension exceeds the dense cap");

  DenseGramian G;
  G.matrix.resize(dim, dim);
  // Columns are independent adjoint/controlled solve pairs.
  parallel_for(static_cast<std::size_t>(dim), [&](std::size_t j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e[static_cast<Eigen::Index>(j)] = 1.0;
    const CascadeState ej =
        CascadeState::unflatten(e, pb.cfg.components(), pb.cfg.N, pb.cfg.L);
    G.matrix.col(static_cast<Eigen::Index>(j)) = gramian_apply_prepared(pre, pb, ej).flatten();
  });
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (G.matrix + G.matrix.transpose()));
  G.eigenvalues = es.eigenvalues();
  return G;
}

std::vector<Eigen::MatrixXd> extract_controls(const ControlProblem& pb, const CascadeState& WT) {
  const Prepared pre = prepare(pb);
  CascadeState wt = WT;
  apply_mode_filter(pb, wt);
  return adjoint_controls(pre, pb, wt);
}

Trajectory simulate_controlled(const ControlProblem& pb,
                               const std::vector<Eigen::MatrixXd>& controls,
                               const CascadeState& from) {
  const Prepared pre = prepare(pb);
  const SourceList src = control_sources(pre, pb, controls);
  return integrate_forward(pre.controlled_op, from, pre.grid, &src);
}

HumSolution solve_hum(const ControlProblem& pb, double tol, int max_iter, SolveMethod method) {
  const Prepared pre = prepare(pb);
  if (tol <= 0.0) throw InvalidArgument("tolerance must be positive");
  const int dim = pre.adjoint_op.dim();
  if (method == SolveMethod::automatic) {
    method = dim <= 4000 ? SolveMethod::dense : SolveMethod::cg;
  }

  HumSolution sol;
  sol.initial_energy = state_energy(pb, pb.Y0);
  const Eigen::VectorXd b = linear_form_vector(pb);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  if (method == SolveMethod::dense) {
    const DenseGramian G = dense_gramian(pb);
    sol.gramian_conditioning = {G.min_eigenvalue(), G.max_eigenvalue()};
    if (G.max_eigenvalue() <= 0.0) {
      sol.status = HumSolution::Status::not_controllable_at_this_T;
      sol.solver = {"dense", 0, std::numeric_limits<double>::infinity()};
      sol.adjoint_terminal = CascadeState(pb.cfg.components(), pb.cfg.N, pb.cfg.L);
      return sol;
    }
    // Spectral solve with cutoff: a singular Gramian (decoupled subsystem)
    // restricts the synthesis to the observable subspace and the
    // complement dimension is reported. The cutoff sits just above the
    // eigensolver's rounding floor; boundary cascades carry genuine
    // directions around 1e-11 * max, so anything looser truncates them.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (G.matrix + G.matrix.transpose()));
    const double cutoff = 1e-13 * G.max_eigenvalue();
    const Eigen::VectorXd coeff = es.eigenvectors().transpose() * (-b);
    Eigen::VectorXd scaled = Eigen::VectorXd::Zero(dim);
    int uncontrolled = 0;
    for (int i = 0; i < dim; ++i) {
      if (es.eigenvalues()[i] > cutoff) {
        scaled[i] = coeff[i] / es.eigenvalues()[i];
      } else {
        ++uncontrolled;
      }
    }
    x = es.eigenvectors() * scaled;
    sol.uncontrolled_dimension = uncontrolled;
    const double res = (G.matrix * x + b).norm() / std::max(b.norm(), 1e-300);
    sol.solver = {"dense", 0, res};
  } else {
    // Matrix-free preconditioned conjugate gradients on gramian_apply.
    auto apply = [&](const Eigen::VectorXd& v) {
      return gramian_apply_prepared(
                 pre, pb, CascadeState::unflatten(v, pb.cfg.components(), pb.cfg.N, pb.cfg.L))
          .flatten();
    };
    // Jacobi preconditioner from the Gramian diagonal: diag_j = ||S e_j||^2
    // is one backward solve per coordinate, assembled in parallel.
    Eigen::VectorXd diag(dim);
    parallel_for(static_cast<std::size_t>(dim), [&](std::size_t j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
      e[static_cast<Eigen::Index>(j)] = 1.0;
      CascadeState ej = CascadeState::unflatten(e, pb.cfg.components(), pb.cfg.N, pb.cfg.L);
      apply_mode_filter(pb, ej);
      const auto v = adjoint_controls(pre, pb, ej);
      double acc = 0.0;
      for (std::size_t l = 0; l < v.size(); ++l) {
        for (std::size_t m = 0; m < pre.grid.nodes(); ++m) {
          acc += trapezoid_weight(pre.grid, m) *
                 v[l].row(static_cast<Eigen::Index>(m)).squaredNorm();
        }
      }
      diag[static_cast<Eigen::Index>(j)] = acc;
    });
    const double dmax = diag.maxCoeff();
    if (dmax <= 0.0) {
      sol.status = HumSolution::Status::not_controllable_at_this_T;
      sol.solver = {"cg", 0, std::numeric_limits<double>::infinity()};
      sol.adjoint_terminal = CascadeState(pb.cfg.components(), pb.cfg.N, pb.cfg.L);
      return sol;
    }
    Eigen::VectorXd precond = diag.cwiseMax(1e-14 * dmax).cwiseInverse();

    Eigen::VectorXd r = -b;
    Eigen::VectorXd z = precond.cwiseProduct(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    const double bnorm = std::max(b.norm(), 1e-300);
    int it = 0;
    double best = r.norm() / bnorm;
    int since_best = 0;
    for (; it < max_iter && r.norm() / bnorm > tol; ++it) {
      const Eigen::VectorXd Ap = apply(p);
      const double pAp = p.dot(Ap);
      if (pAp <= 0.0) break;  // lost positivity: unobservable direction
      const double alpha = rz / pAp;
      x += alpha * p;
      r -= alpha * Ap;
      z = precond.cwiseProduct(r);
      const double rz_new = r.dot(z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
      const double rel = r.norm() / bnorm;
      if (rel < best * 0.999) {
        best = rel;
        since_best = 0;
      } else if (++since_best > 50) {
        break;  // residual plateau
      }
    }
    const double res = r.norm() / bnorm;
    sol.solver = {"cg", it, res};
    if (res > tol) {
      sol.status = HumSolution::Status::not_controllable_at_this_T;
    }
  }

  sol.adjoint_terminal = CascadeState::unflatten(x, pb.cfg.components(), pb.cfg.N, pb.cfg.L);
  apply_mode_filter(pb, sol.adjoint_terminal);
  sol.controls = extract_controls(pb, sol.adjoint_terminal);

  // Steering verification is independent: only the emitted signals drive
  // the re-simulation.
  const Trajectory verify = simulate_controlled(pb, sol.controls, pb.Y0);
  sol.terminal_residual = state_energy(pb, verify.final());
  if (sol.terminal_residual > 100.0 * tol * std::max(sol.initial_energy, 1e-300)) {
    sol.status = HumSolution::Status::not_controllable_at_this_T;
  }
  return sol;
}

nlohmann::json ControlProblem::to_json() const {
  nlohmann::json j;
  j["system"] = cfg.to_json();
  j["T"] = T;
  j["dt"] = dt;
  switch (variant) {
    case ControlVariant::bounded: j["variant"] = "bounded"; break;
    case ControlVariant::unbounded: j["variant"] = "unbounded"; break;
    case ControlVariant::mixed: j["variant"] = "mixed"; j["q"] = q; break;
  }
  if (mode_filter > 0) j["mode_filter"] = mode_filter;
  j["controls"] = nlohmann::json::array();
  for (const auto& c : controls) j["controls"].push_back(c.to_json());
  j["initial_data"] = nlohmann::json::array();
  for (int i = 0; i < cfg.components(); ++i) {
    j["initial_data"].push_back(
        {{"position", std::vector<double>(Y0.positions[static_cast<std::size_t>(i)].coeffs.data(),
                                          Y0.positions[static_cast<std::size_t>(i)].coeffs.data() + cfg.N)},
         {"velocity", std::vector<double>(Y0.velocities[static_cast<std::size_t>(i)].coeffs.data(),
                                          Y0.velocities[static_cast<std::size_t>(i)].coeffs.data() + cfg.N)}});
  }
  return j;
}

ControlProblem ControlProblem::from_json(const nlohmann::json& j) {
  ControlProblem pb;
  pb.cfg = CascadeConfig::from_json(j.at("system"));
  pb.T = j.at("T").get<double>();
  pb.dt = j.value("dt", 1e-3);
  const std::string variant = j.value("variant", "bounded");
  if (variant == "bounded") {
    pb.variant = ControlVariant::bounded;
  } else if (variant == "unbounded") {
    pb.variant = ControlVariant::unbounded;
  } else if (variant == "mixed") {
    pb.variant = ControlVariant::mixed;
    pb.q = j.at("q").get<int>();
  } else {
    throw InvalidArgument("variant must be bounded, unbounded or mixed");
  }
  pb.mode_filter = j.value("mode_filter", 0);
  for (const auto& c : j.at("controls")) pb.controls.push_back(ObservationSpec::from_json(c));
  pb.Y0 = CascadeState(pb.cfg.components(), pb.cfg.N, pb.cfg.L);
  if (j.contains("initial_data")) {
    const auto& init = j.at("initial_data");
    if (static_cast<int>(init.size()) != pb.cfg.components()) {
      throw InvalidArgument("initial_data needs one entry per component");
    }
    for (int i = 0; i < pb.cfg.components(); ++i) {
      const auto& e = init[static_cast<std::size_t>(i)];
      auto fill = [&](const char* key, SpectralField& f) {
        if (!e.contains(key)) return;
        const auto v = e.at(key).get<std::vector<double>>();
        if (static_cast<int>(v.size()) != pb.cfg.N) throw InvalidArgument("initial data length mismatch");
        for (int k = 0; k < pb.cfg.N; ++k) f.coeffs[k] = v[static_cast<std::size_t>(k)];
      };
      fill("position", pb.Y0.positions[static_cast<std::size_t>(i)]);
      fill("velocity", pb.Y0.velocities[static_cast<std::size_t>(i)]);
    }
  }
  pb.validate();
  return pb;
}

nlohmann::json HumSolution::to_json() const {
  nlohmann::json j;
  j["status"] = success() ? "success" : "not-controllable-at-this-T";
  j["solver"] = {{"method", solver.method}, {"iterations", solver.iterations}, {"residual", solver.residual}};
  j["terminal_residual"] = terminal_residual;
  j["initial_energy"] = initial_energy;
  if (gramian_conditioning) {
    j["gramian_min_eigenvalue"] = gramian_conditioning->first;
    j["gramian_max_eigenvalue"] = gramian_conditioning->second;
  }
  j["uncontrolled_dimension"] = uncontrolled_dimension;
  return j;
}

}  // namespace casclab
