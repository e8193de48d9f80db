#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "casclab/compat.hpp"
#include "casclab/hum.hpp"
#include "casclab/rng.hpp"

using namespace casclab;

namespace {
constexpr double kPi = 3.14159265358979323846;

ControlProblem disjoint_two(int N, double T) {
  ControlProblem pb;
  pb.cfg.n = 2;
  pb.cfg.N = N;
  pb.cfg.subdiagonal = {build_bump(Interval{2.2, 2.6}, kPi, 1.0)};
  pb.cfg.coupling_regions = {Interval{2.2, 2.6}};
  pb.T = T;
  pb.dt = 1e-3;
  pb.variant = ControlVariant::bounded;
  ObservationSpec ctrl;
  ctrl.kind = ObservationSpec::Kind::interior;
  ctrl.component = 2;
  ctrl.b = build_bump(Interval{0.3, 0.9}, kPi, 1.0);
  ctrl.region = Interval{0.3, 0.9};
  pb.controls = {ctrl};
  pb.Y0 = CascadeState(2, N, kPi);
  return pb;
}

CascadeState random_terminal(const ControlProblem& pb, std::uint64_t seed) {
  GaussianStream g(seed);
  CascadeState s(pb.cfg.components(), pb.cfg.N, pb.cfg.L);
  for (auto& f : s.positions) {
    for (int k = 0; k < pb.cfg.N; ++k) f.coeffs[k] = g.next() / (1.0 + k);
  }
  for (auto& f : s.velocities) {
    for (int k = 0; k < pb.cfg.N; ++k) f.coeffs[k] = g.next() / (1.0 + k);
  }
  return s;
}

// Independent bilinear-form route: two backward adjoint solves and the
// trapezoid of the observation product, never touching the controlled
// system.
double gramian_quadrature(const ControlProblem& pb, const CascadeState& X, const CascadeState& Y) {
  const TimeGrid grid = exact_grid(pb.T, pb.dt);
  const Trajectory wx = evolve_adjoint_observability(pb.cfg, X, pb.T, pb.dt);
  const Trajectory wy = evolve_adjoint_observability(pb.cfg, Y, pb.T, pb.dt);
  double acc = 0.0;
  for (std::size_t l = 0; l < pb.controls.size(); ++l) {
    const ObservationOperator op = make_observation_operator(pb.controls[l], pb.cfg.N, pb.cfg.L);
    const std::size_t c = static_cast<std::size_t>(pb.controls[l].component - 1);
    for (std::size_t m = 0; m < grid.nodes(); ++m) {
      acc += trapezoid_weight(grid, m) *
             op.apply_bstar(wx.states[m].positions[c].coeffs)
                 .dot(op.apply_bstar(wy.states[m].positions[c].coeffs));
    }
  }
  return acc;
}
}  // namespace

TEST_CASE("gramian application") {
  ControlProblem pb = disjoint_two(6, 4.0);
  pb.dt = 2e-3;

  SUBCASE("zero terminal datum maps to zero") {
    const CascadeState g = gramian_apply(pb, CascadeState(2, 6, kPi));
    CHECK(g.flatten().norm() == 0.0);
  }

  SUBCASE("matches the independent quadrature route and is symmetric") {
    for (std::uint64_t s = 0; s < 3; ++s) {
      const CascadeState X = random_terminal(pb, 10 + s);
      const CascadeState Y = random_terminal(pb, 20 + s);
      const double gx_y = gramian_apply(pb, X).flatten().dot(Y.flatten());
      const double gy_x = gramian_apply(pb, Y).flatten().dot(X.flatten());
      const double quad = gramian_quadrature(pb, X, Y);
      const double scale = std::sqrt(gramian_quadrature(pb, X, X) * gramian_quadrature(pb, Y, Y));
      CHECK(std::abs(gx_y - quad) <= 1e-10 * scale);
      CHECK(std::abs(gx_y - gy_x) <= 1e-9 * scale);
    }
  }

  SUBCASE("decoupled component-1 data is invisible to the control") {
    ControlProblem dec = pb;
    dec.cfg.subdiagonal[0] = Coefficient::constant(0.0);
    CascadeState WT(2, 6, kPi);
    WT.positions[0].coeffs[1] = 1.0;
    WT.velocities[0].coeffs[2] = -0.5;
    const CascadeState g = gramian_apply(dec, WT);
    CHECK(g.flatten().norm() <= 1e-14);
  }
}

TEST_CASE("linear form assembly") {
  ControlProblem pb = disjoint_two(6, 4.0);
  pb.dt = 2e-3;
  GaussianStream g(3);
  for (int k = 0; k < 6; ++k) {
    pb.Y0.positions[0].coeffs[k] = g.next();
    pb.Y0.positions[1].coeffs[k] = g.next();
    pb.Y0.velocities[0].coeffs[k] = g.next();
    pb.Y0.velocities[1].coeffs[k] = g.next();
  }

  SUBCASE("zero initial data gives the zero form") {
    ControlProblem zero = pb;
    zero.Y0 = CascadeState(2, 6, kPi);
    std::vector<CascadeState> basis = {random_terminal(pb, 4), random_terminal(pb, 5)};
    const Eigen::VectorXd v = assemble_linear_form(zero, basis);
    CHECK(v.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("per-basis pairings match the transposition route exactly") {
    const int dim = 2 * 2 * 6;
    std::vector<CascadeState> basis;
    for (int j = 0; j < dim; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
      e[j] = 1.0;
      basis.push_back(CascadeState::unflatten(e, 2, 6, kPi));
    }
    const Eigen::VectorXd via_basis = assemble_linear_form(pb, basis);
    const Eigen::VectorXd via_forward = linear_form_vector(pb);
    CHECK((via_basis - via_forward).norm() <= 1e-11 * via_forward.norm());
  }

  SUBCASE("hand-computed single-mode pairing") {
    ControlProblem simple = pb;
    simple.Y0 = CascadeState(2, 6, kPi);
    simple.Y0.velocities[1].coeffs[0] = 2.0;  // y_2^1 = 2 phi_1
    CascadeState WT(2, 6, kPi);
    WT.positions[1].coeffs[0] = 1.0;
    const Trajectory w = evolve_adjoint_observability(simple.cfg, WT, simple.T, simple.dt);
    const double expected = 2.0 * w.initial().positions[1].coeffs[0];
    const Eigen::VectorXd v = assemble_linear_form(simple, {WT});
    CHECK(v[0] == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("linearity in the initial data") {
    std::vector<CascadeState> basis = {random_terminal(pb, 6)};
    ControlProblem doubled = pb;
    for (auto& f : doubled.Y0.positions) f.coeffs *= 2.0;
    for (auto& f : doubled.Y0.velocities) f.coeffs *= 2.0;
    CHECK(assemble_linear_form(doubled, basis)[0] ==
          doctest::Approx(2.0 * assemble_linear_form(pb, basis)[0]).epsilon(1e-12));
  }
}

TEST_CASE("dense gramian spectra") {
  SUBCASE("vanishing coupling zeroes the component-1 block") {
    ControlProblem pb = disjoint_two(6, 4.0);
    pb.dt = 2e-3;
    pb.cfg.subdiagonal[0] = Coefficient::constant(0.0);
    const DenseGramian G = dense_gramian(pb);
    const int N = pb.cfg.N;
    // Component-1 terminal coordinates: positions 0..N-1, velocities 2N..3N-1.
    Eigen::MatrixXd block(2 * N, 2 * N);
    std::vector<int> idx;
    for (int k = 0; k < N; ++k) idx.push_back(k);
    for (int k = 0; k < N; ++k) idx.push_back(2 * N + k);
    for (int a = 0; a < 2 * N; ++a) {
      for (int b = 0; b < 2 * N; ++b) block(a, b) = G.matrix(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
    CHECK(std::abs(es.eigenvalues()[0]) <= 1e-12);
    CHECK(G.min_eigenvalue() <= 1e-12);
  }

  SUBCASE("conformant config is positive definite and monotone in T") {
    ControlProblem pb = disjoint_two(8, 8.0);
    pb.dt = 2e-3;
    const DenseGramian G8 = dense_gramian(pb);
    CHECK(G8.min_eigenvalue() > 0.0);
    const double sym =
        (G8.matrix - G8.matrix.transpose()).cwiseAbs().maxCoeff() / G8.matrix.cwiseAbs().maxCoeff();
    CHECK(sym <= 1e-10);

    ControlProblem pb16 = pb;
    pb16.T = 16.0;
    const DenseGramian G16 = dense_gramian(pb16);
    CHECK(G16.min_eigenvalue() >= G8.min_eigenvalue() * (1.0 - 1e-12));
    // Quadratic-form monotonicity on random terminal data.
    for (std::uint64_t s = 0; s < 4; ++s) {
      const Eigen::VectorXd x = random_terminal(pb, 60 + s).flatten();
      CHECK(x.dot(G16.matrix * x) >= x.dot(G8.matrix * x) * (1.0 - 1e-12));
    }
  }

  SUBCASE("dimension cap") {
    ControlProblem pb = disjoint_two(8, 4.0);
    CHECK_THROWS_AS(dense_gramian(pb, 10), TooLarge);
  }
}

TEST_CASE("scalar control against an independent per-mode synthesis") {
  // Full interior control (b = 1) decouples the modes: an independent
  // implementation assembles each mode's 2x2 Gramian with its own
  // rotation/trapezoid loop and solves it directly.
  const int N = 6;
  const double T = 2.0 * kPi;
  const double dt = T / 6283.0;  // ~1e-3, snapped to the horizon

  ControlProblem pb;
  pb.cfg.n = 1;
  pb.cfg.N = N;
  pb.T = T;
  pb.dt = dt;
  pb.variant = ControlVariant::bounded;
  ObservationSpec ctrl;
  ctrl.kind = ObservationSpec::Kind::interior;
  ctrl.component = 1;
  ctrl.b = Coefficient::constant(1.0);
  ctrl.region = Interval{1.0, 2.0};
  pb.controls = {ctrl};
  pb.Y0 = CascadeState(1, N, kPi);
  GaussianStream g(8);
  for (int k = 0; k < N; ++k) {
    pb.Y0.positions[0].coeffs[k] = g.next() / (1 + k);
    pb.Y0.velocities[0].coeffs[k] = g.next() / (1 + k);
  }

  const HumSolution sol = solve_hum(pb, 1e-10);
  CHECK(sol.success());

  // Independent synthesis, one mode at a time: backward adjoint from
  // terminal (wT, qT) is itself a rotation; scan the 2x2 terminal basis.
  const TimeGrid grid = exact_grid(T, dt);
  const std::size_t M = grid.steps;
  double oracle_energy = 0.0;
  double lib_energy = 0.0;
  for (int k = 0; k < N; ++k) {
    const double w = std::sqrt(eigenvalue(k + 1, kPi));
    // adjoint value at node m for terminal basis (1,0) and (0,1):
    auto adj = [&](int basis, std::size_t m) {
      const double s = grid.time(M - m);  // time to go
      // backward rotation by s from (wT, qT): position component
      return basis == 0 ? std::cos(w * s) : -std::sin(w * s) / w;
    };
    Eigen::Matrix2d G2 = Eigen::Matrix2d::Zero();
    Eigen::Vector2d b2 = Eigen::Vector2d::Zero();
    for (std::size_t m = 0; m <= M; ++m) {
      const double wgt = trapezoid_weight(grid, m);
      const double a0 = adj(0, m), a1 = adj(1, m);
      G2(0, 0) += wgt * a0 * a0;
      G2(0, 1) += wgt * a0 * a1;
      G2(1, 1) += wgt * a1 * a1;
    }
    G2(1, 0) = G2(0, 1);
    // duality data: free run of the controlled (= free) equation:
    const double y0 = pb.Y0.positions[0].coeffs[k];
    const double y1 = pb.Y0.velocities[0].coeffs[k];
    const double yT = std::cos(w * T) * y0 + std::sin(w * T) / w * y1;
    const double yTp = -w * std::sin(w * T) * y0 + std::cos(w * T) * y1;
    b2 << yTp, -yT;
    const Eigen::Vector2d x2 = G2.ldlt().solve(-b2);
    for (std::size_t m = 0; m <= M; ++m) {
      const double v = x2[0] * adj(0, m) + x2[1] * adj(1, m);
      oracle_energy += trapezoid_weight(grid, m) * v * v;
      const double vl = sol.controls[0](static_cast<Eigen::Index>(m), k);
      lib_energy += trapezoid_weight(grid, m) * vl * vl;
    }
  }
  CHECK(lib_energy == doctest::Approx(oracle_energy).epsilon(1e-4));
  CHECK(sol.terminal_residual <= 1e-8 * sol.initial_energy);
}

TEST_CASE("steering with disjoint control and coupling regions") {
  ControlProblem pb = disjoint_two(12, 12.0);
  pb.dt = 2e-3;
  GaussianStream g(9);
  for (int k = 0; k < pb.cfg.N; ++k) {
    pb.Y0.positions[0].coeffs[k] = g.next() / sqr(1.0 + k);
    pb.Y0.positions[1].coeffs[k] = g.next() / sqr(1.0 + k);
    pb.Y0.velocities[0].coeffs[k] = g.next() / sqr(1.0 + k);
    pb.Y0.velocities[1].coeffs[k] = g.next() / sqr(1.0 + k);
  }
  const HumSolution sol = solve_hum(pb, 1e-8);
  CHECK(sol.success());
  CHECK(sol.terminal_residual <= 1e-4 * sol.initial_energy);
  REQUIRE(sol.gramian_conditioning.has_value());
  CHECK(sol.gramian_conditioning->first > 0.0);

  SUBCASE("matrix-free CG agrees with the dense route") {
    const HumSolution cg = solve_hum(pb, 1e-8, 4000, SolveMethod::cg);
    CHECK(cg.success());
    CHECK(cg.terminal_residual <= 1e-4 * cg.initial_energy);
  }
}

TEST_CASE("zero initial data yields the zero control") {
  ControlProblem pb = disjoint_two(8, 8.0);
  pb.dt = 2e-3;
  const HumSolution sol = solve_hum(pb, 1e-8);
  CHECK(sol.success());
  CHECK(sol.controls[0].cwiseAbs().maxCoeff() == 0.0);
  CHECK(sol.terminal_residual == 0.0);
}

TEST_CASE("boundary-control variant") {
  ControlProblem pb;
  pb.cfg.n = 2;
  pb.cfg.N = 10;
  pb.cfg.subdiagonal = {build_bump(Interval{2.2, 2.6}, kPi, 1.0)};
  pb.cfg.coupling_regions = {Interval{2.2, 2.6}};
  pb.T = 10.0;
  pb.dt = 1e-3;
  pb.variant = ControlVariant::unbounded;
  ObservationSpec ctrl;
  ctrl.kind = ObservationSpec::Kind::boundary;
  ctrl.component = 2;
  ctrl.at_x0 = true;
  pb.controls = {ctrl};
  pb.Y0 = CascadeState(2, 10, kPi);
  GaussianStream g(10);
  for (int k = 0; k < 10; ++k) {
    pb.Y0.positions[0].coeffs[k] = g.next() / sqr(1.0 + k);
    pb.Y0.positions[1].coeffs[k] = g.next() / sqr(1.0 + k);
    pb.Y0.velocities[1].coeffs[k] = g.next() / sqr(1.0 + k);
  }
  const HumSolution sol = solve_hum(pb, 1e-8);
  CHECK(sol.success());
  CHECK(sol.terminal_residual <= 1e-3 * sol.initial_energy);
}

TEST_CASE("mixed variant ordering is enforced") {
  ControlProblem pb;
  pb.cfg.n = 2;
  pb.cfg.p = 1;
  pb.cfg.N = 6;
  pb.cfg.subdiagonal = {build_bump(Interval{2.2, 2.6}, kPi, 1.0)};
  pb.cfg.coupling_regions = {Interval{2.2, 2.6}};
  pb.cfg.offdiagonal.push_back({3, 2, Coefficient::constant(0.3)});
  pb.T = 8.0;
  pb.dt = 2e-3;
  pb.variant = ControlVariant::mixed;
  pb.q = 0;
  pb.Y0 = CascadeState(3, 6, kPi);

  ObservationSpec boundary;
  boundary.kind = ObservationSpec::Kind::boundary;
  boundary.component = 2;
  boundary.at_x0 = true;
  ObservationSpec interior;
  interior.kind = ObservationSpec::Kind::interior;
  interior.component = 3;
  interior.b = build_bump(Interval{0.3, 0.9}, kPi, 1.0);
  interior.region = Interval{0.3, 0.9};

  SUBCASE("admissible order validates") {
    pb.controls = {boundary, interior};
    CHECK_NOTHROW(pb.validate());
  }

  SUBCASE("bounded operator ahead of an unbounded one is rejected") {
    ObservationSpec interior2 = interior;
    interior2.component = 2;
    ObservationSpec boundary3 = boundary;
    boundary3.component = 3;
    pb.controls = {interior2, boundary3};
    CHECK_THROWS_AS(pb.validate(), InvalidArgument);
  }
}

TEST_CASE("CG reports not-controllable when the data has blind directions") {
  ControlProblem pb = disjoint_two(6, 8.0);
  pb.dt = 2e-3;
  pb.cfg.subdiagonal[0] = Coefficient::constant(0.0);
  pb.Y0.positions[0].coeffs[0] = 1.0;  // invisible to the control
  const HumSolution sol = solve_hum(pb, 1e-8, 500, SolveMethod::cg);
  CHECK_FALSE(sol.success());
  CHECK(sol.status == HumSolution::Status::not_controllable_at_this_T);
}

TEST_CASE("mode filter is honored") {
  ControlProblem pb = disjoint_two(8, 8.0);
  pb.dt = 2e-3;
  pb.mode_filter = 4;
  const CascadeState g = gramian_apply(pb, random_terminal(pb, 70));
  for (int i = 0; i < 2; ++i) {
    CHECK(g.positions[static_cast<std::size_t>(i)].coeffs.tail(4).cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.velocities[static_cast<std::size_t>(i)].coeffs.tail(4).cwiseAbs().maxCoeff() == 0.0);
  }
}
