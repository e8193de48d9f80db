#include "casclab/scenarios.hpp"

#include <cmath>

#include "casclab/rng.hpp"

namespace casclab {

namespace {

SimultaneousTransform make_transform() {
  SimultaneousTransform t;
  t.M << -0.25, 0.25, -0.5,
          0.75, -0.25, -0.5,
         -1.0,  1.0,   1.0;
  t.M_inv = t.M.inverse();
  t.gains << 2.0, 4.0, 1.0;
  t.source_gain = 3.0;
  return t;
}

CascadeState mix_components(const Eigen::Matrix3d& M, const CascadeState& s) {
  CascadeState r(3, s.positions[0].truncation(), s.positions[0].length);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      r.positions[static_cast<std::size_t>(i)].coeffs += M(i, j) * s.positions[static_cast<std::size_t>(j)].coeffs;
      r.velocities[static_cast<std::size_t>(i)].coeffs += M(i, j) * s.velocities[static_cast<std::size_t>(j)].coeffs;
    }
  }
  return r;
}

}  // namespace

CascadeState SimultaneousTransform::to_cascade(const CascadeState& p) const {
  return mix_components(M, p);
}

CascadeState SimultaneousTransform::to_parallel(const CascadeState& y) const {
  return mix_components(M_inv, y);
}

std::pair<CascadeConfig, SimultaneousTransform> simultaneous_to_cascade(
    const SimultaneousSystem& sys, const Interval& O2, const Interval& O3) {
  CascadeConfig cfg;
  cfg.n = 3;
  cfg.p = 0;
  cfg.L = sys.L;
  cfg.N = sys.N;
  cfg.subdiagonal = {sys.alpha.scaled(6.0), sys.beta.scaled(0.5)};
  cfg.coupling_regions = {O2, O3};
  cfg.validate_structure();
  return {cfg, make_transform()};
}

SystemOperator parallel_system_operator(const SimultaneousSystem& sys) {
  const Eigen::MatrixXd Ma = assemble_multiplication(sys.alpha, sys.N, sys.L).matrix;
  const Eigen::MatrixXd Mb = assemble_multiplication(sys.beta, sys.N, sys.L).matrix;
  // Zero-order coupling table of the parallel system, alpha and beta parts;
  // it is exactly the conjugate M^{-1} C M of the cascade couplings, so the
  // change of unknowns closes as an operator identity.
  const double ca[3][3] = {{-3, 1, 2}, {3, -1, -2}, {-6, 2, 4}};
  const double cb[3][3] = {{-1, 1, 1}, {-1, 1, 1}, {0, 0, 0}};
  SystemOperator op;
  op.ncomp = 3;
  op.N = sys.N;
  op.L = sys.L;
  op.lambda = eigenvalues(sys.N, sys.L);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (ca[i][j] == 0.0 && cb[i][j] == 0.0) continue;
      auto m = std::make_shared<Eigen::MatrixXd>(ca[i][j] * Ma + cb[i][j] * Mb);
      op.blocks.push_back(CouplingBlock{i, j, std::move(m)});
    }
  }
  return op;
}

SimultaneousSolution solve_simultaneous(const SimultaneousSystem& sys, const Interval& O2,
                                        const Interval& O3, double T, double dt, double tol) {
  auto [cfg, transform] = simultaneous_to_cascade(sys, O2, O3);

  ControlProblem pb;
  pb.cfg = cfg;
  pb.T = T;
  pb.dt = dt;
  pb.variant = ControlVariant::bounded;
  ObservationSpec ctrl;
  ctrl.kind = ObservationSpec::Kind::interior;
  ctrl.component = 3;
  ctrl.b = Coefficient::constant(1.0);  // the scalar control acts everywhere
  ctrl.region = Interval{0.25 * sys.L, 0.75 * sys.L};
  pb.controls = {ctrl};
  pb.Y0 = transform.to_cascade(sys.p0);

  SimultaneousSolution out;
  out.cascade = solve_hum(pb, tol);
  // Cascade source on the last row is (source_gain) * h; with b = 1 the
  // synthesized signal is that source itself.
  out.h = out.cascade.controls[0] / transform.source_gain;

  // Verify on the original parallel system driven only by (2h, 4h, h).
  const SystemOperator pop = parallel_system_operator(sys);
  const TimeGrid grid = exact_grid(T, dt);
  SourceList sources;
  for (int i = 0; i < 3; ++i) {
    NodalSource s;
    s.component = i;
    s.modal = transform.gains[i] * out.h;
    sources.push_back(std::move(s));
  }
  const Trajectory ptraj = integrate_forward(pop, sys.p0, grid, &sources);
  out.initial_energy = 0.0;
  out.terminal_energy = 0.0;
  for (int i = 1; i <= 3; ++i) {
    out.initial_energy += level_energy(sys.p0, i, 1);
    out.terminal_energy += level_energy(ptraj.final(), i, 1);
  }
  out.success = out.cascade.success() &&
                out.terminal_energy <= 1e-3 * std::max(out.initial_energy, 1e-300);
  return out;
}

namespace {

// Scalar controlled wave y'' + A y = load(t) from given data; returns the
// trapezoid of 1/2 <M_c y, y> and, through the visitor, nothing else.
double measurement_phi(int N, double L, const TimeGrid& grid, const Eigen::MatrixXd& load,
                       const Eigen::MatrixXd& Mc, const SpectralField& y0,
                       const SpectralField& y1) {
  CascadeConfig scalar;
  scalar.n = 1;
  scalar.L = L;
  scalar.N = N;
  const SystemOperator op = build_operator(scalar, Orientation::cascade);
  CascadeState s0(1, N, L);
  s0.positions[0] = y0;
  s0.velocities[0] = y1;
  NodalSource src;
  src.component = 0;
  src.modal = load;
  const SourceList sources{src};
  double phi = 0.0;
  evolve(op, s0, grid, &sources, Direction::forward,
         [&](std::size_t m, const std::vector<Eigen::VectorXd>& pos,
             const std::vector<Eigen::VectorXd>&) {
           phi += trapezoid_weight(grid, m) * 0.5 * pos[0].dot(Mc * pos[0]);
         });
  return phi;
}

}  // namespace

InsensitizingResult insensitizing_pipeline(const SpectralField& y0, const SpectralField& y1,
                                           const Coefficient& b, const Interval& omega,
                                           const Coefficient& c, const Interval& O, double T,
                                           double dt, double tol, int directions, double eps,
                                           std::uint64_t seed, bool with_control,
                                           const PerturbationDirections* explicit_dirs) {
  const int N = y0.truncation();
  const double L = y0.length;

  ControlProblem pb;
  pb.cfg.n = 2;
  pb.cfg.p = 0;
  pb.cfg.L = L;
  pb.cfg.N = N;
  pb.cfg.subdiagonal = {c};
  pb.cfg.coupling_regions = {O};
  pb.T = T;
  pb.dt = dt;
  pb.variant = ControlVariant::bounded;
  ObservationSpec ctrl;
  ctrl.kind = ObservationSpec::Kind::interior;
  ctrl.component = 2;
  ctrl.b = b;
  ctrl.region = omega;
  pb.controls = {ctrl};
  pb.Y0 = CascadeState(2, N, L);
  pb.Y0.positions[1] = y0;   // the measured equation carries the given data
  pb.Y0.velocities[1] = y1;  // the auxiliary pair starts (and must end) at 0

  InsensitizingResult out;
  const TimeGrid grid = exact_grid(T, dt);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.nodes()), N);
  if (with_control) {
    out.hum = solve_hum(pb, tol);
    v = out.hum.controls[0];
  }

  // The measurement runs on the scalar equation driven only by the emitted
  // control signal.
  const Eigen::MatrixXd Mb = assemble_multiplication(b, N, L).matrix;
  const Eigen::MatrixXd Mc = assemble_multiplication(c, N, L).matrix;
  Eigen::MatrixXd load(static_cast<Eigen::Index>(grid.nodes()), N);
  for (Eigen::Index m = 0; m < load.rows(); ++m) {
    load.row(m) = (Mb * v.row(m).transpose()).transpose();
  }

  out.phi = measurement_phi(N, L, grid, load, Mc, y0, y1);
  const double phi_scale = std::max(std::abs(out.phi), 1e-300);

  GaussianStream g(seed);
  const int ndir = explicit_dirs ? static_cast<int>(explicit_dirs->size()) : directions;
  for (int r = 0; r < ndir; ++r) {
    // Unit perturbations in the energy norms: z0 in H_1, z1 in H_0.
    SpectralField z0(N, L), z1(N, L);
    if (explicit_dirs) {
      z0 = (*explicit_dirs)[static_cast<std::size_t>(r)].first;
      z1 = (*explicit_dirs)[static_cast<std::size_t>(r)].second;
    } else {
      for (int k = 0; k < N; ++k) {
        z0.coeffs[k] = g.next();
        z1.coeffs[k] = g.next();
      }
      z0.coeffs /= std::max(sobolev_norm(z0, 1), 1e-300);
      z1.coeffs /= std::max(sobolev_norm(z1, 0), 1e-300);
    }

    auto perturbed = [&](double tau0, double tau1) {
      SpectralField p0 = y0, p1 = y1;
      p0.coeffs += tau0 * z0.coeffs;
      p1.coeffs += tau1 * z1.coeffs;
      return measurement_phi(N, L, grid, load, Mc, p0, p1);
    };
    out.dphi_dtau0.push_back((perturbed(eps, 0.0) - perturbed(-eps, 0.0)) / (2.0 * eps));
    out.dphi_dtau1.push_back((perturbed(0.0, eps) - perturbed(0.0, -eps)) / (2.0 * eps));
    out.max_relative_sensitivity =
        std::max({out.max_relative_sensitivity, std::abs(out.dphi_dtau0.back()) / phi_scale,
                  std::abs(out.dphi_dtau1.back()) / phi_scale});
  }
  out.success = (!with_control || out.hum.success()) &&
                (!with_control || out.max_relative_sensitivity <= 1e-4);
  return out;
}

nlohmann::json SimultaneousSystem::to_json() const {
  nlohmann::json j;
  j["alpha"] = alpha.to_json();
  j["beta"] = beta.to_json();
  j["interval_length"] = L;
  j["modes"] = N;
  nlohmann::json init = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) {
    init.push_back(
        {{"position", std::vector<double>(p0.positions[static_cast<std::size_t>(i)].coeffs.data(),
                                          p0.positions[static_cast<std::size_t>(i)].coeffs.data() + N)},
         {"velocity", std::vector<double>(p0.velocities[static_cast<std::size_t>(i)].coeffs.data(),
                                          p0.velocities[static_cast<std::size_t>(i)].coeffs.data() + N)}});
  }
  j["initial_data"] = init;
  return j;
}

SimultaneousSystem SimultaneousSystem::from_json(const nlohmann::json& j) {
  SimultaneousSystem sys;
  sys.alpha = Coefficient::from_json(j.at("alpha"));
  sys.beta = Coefficient::from_json(j.at("beta"));
  sys.L = j.at("interval_length").get<double>();
  sys.N = j.at("modes").get<int>();
  sys.p0 = CascadeState(3, sys.N, sys.L);
  if (j.contains("initial_data")) {
    const auto& init = j.at("initial_data");
    for (int i = 0; i < 3; ++i) {
      const auto& e = init.at(static_cast<std::size_t>(i));
      auto fill = [&](const char* key, SpectralField& f) {
        if (!e.contains(key)) return;
        const auto vv = e.at(key).get<std::vector<double>>();
        if (static_cast<int>(vv.size()) != sys.N) throw InvalidArgument("initial data length mismatch");
        for (int k = 0; k < sys.N; ++k) f.coeffs[k] = vv[static_cast<std::size_t>(k)];
      };
      fill("position", sys.p0.positions[static_cast<std::size_t>(i)]);
      fill("velocity", sys.p0.velocities[static_cast<std::size_t>(i)]);
    }
  }
  return sys;
}

nlohmann::json SimultaneousSolution::to_json() const {
  nlohmann::json j;
  j["cascade"] = cascade.to_json();
  j["initial_energy"] = initial_energy;
  j["terminal_energy"] = terminal_energy;
  j["success"] = success;
  return j;
}

nlohmann::json InsensitizingResult::to_json() const {
  nlohmann::json j;
  j["hum"] = hum.to_json();
  j["phi"] = phi;
  j["dphi_dtau0"] = dphi_dtau0;
  j["dphi_dtau1"] = dphi_dtau1;
  j["max_relative_sensitivity"] = max_relative_sensitivity;
  j["success"] = success;
  return j;
}

}  // namespace casclab
