// Compares the serial reference paths against the OpenMP kernels on the
// three data-parallel hot spots: Gramian column assembly, Monte Carlo
// observability sweeps, and multiplication-operator assembly.

#include <chrono>
#include <cstdio>

#include "casclab/compat.hpp"
#include "casclab/energy.hpp"
#include "casclab/hum.hpp"
#include "casclab/parallel.hpp"

using namespace casclab;

namespace {

double seconds(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

ControlProblem make_problem() {
  ControlProblem pb;
  pb.cfg.n = 2;
  pb.cfg.N = 16;
  pb.cfg.subdiagonal = {build_bump(Interval{2.2, 2.6}, pb.cfg.L, 1.0)};
  pb.cfg.coupling_regions = {Interval{2.2, 2.6}};
  pb.T = 8.0;
  pb.dt = 1e-3;
  pb.variant = ControlVariant::bounded;
  ObservationSpec ctrl;
  ctrl.kind = ObservationSpec::Kind::interior;
  ctrl.component = 2;
  ctrl.b = build_bump(Interval{0.3, 0.9}, pb.cfg.L, 1.0);
  ctrl.region = Interval{0.3, 0.9};
  pb.controls = {ctrl};
  pb.Y0 = CascadeState(2, pb.cfg.N, pb.cfg.L);
  pb.Y0.positions[0].coeffs[0] = 1.0;
  return pb;
}

}  // namespace

int main(int argc, char** argv) {
  const int workers = argc > 1 ? std::atoi(argv[1]) : 2;
  const ControlProblem pb = make_problem();

  std::printf("%-28s %10s %10s %8s\n", "kernel", "serial[s]", "omp[s]", "speedup");

  {
    set_threads(1);
    double g_min_serial = 0.0, g_min_par = 0.0;
    const double ts = seconds([&] { g_min_serial = dense_gramian(pb).min_eigenvalue(); });
    set_threads(workers);
    const double tp = seconds([&] { g_min_par = dense_gramian(pb).min_eigenvalue(); });
    std::printf("%-28s %10.3f %10.3f %8.2f   (min eig match: %d)\n", "gramian assembly", ts, tp,
                ts / tp, g_min_serial == g_min_par);
  }

  {
    ObservationSpec obs = pb.controls[0];
    const std::vector<double> grid = {8.0, 12.0};
    set_threads(1);
    ObservabilityReport rs, rp;
    const double ts = seconds([&] { rs = estimate_constants(pb.cfg, obs, grid, 64, 7, 1e-3); });
    set_threads(workers);
    const double tp = seconds([&] { rp = estimate_constants(pb.cfg, obs, grid, 64, 7, 1e-3); });
    std::printf("%-28s %10.3f %10.3f %8.2f   (d_hat match: %d)\n", "monte carlo sweep", ts, tp,
                ts / tp, rs.d_hat == rp.d_hat);
  }

  {
    const Coefficient c = build_bump(Interval{1.0, 2.0}, pb.cfg.L, 1.0);
    set_threads(1);
    Eigen::MatrixXd ms, mp;
    const double ts = seconds([&] { ms = assemble_multiplication(c, 96, pb.cfg.L).matrix; });
    set_threads(workers);
    const double tp = seconds([&] { mp = assemble_multiplication(c, 96, pb.cfg.L).matrix; });
    std::printf("%-28s %10.3f %10.3f %8.2f   (matrix match: %d)\n", "operator assembly N=96", ts,
                tp, ts / tp, ms == mp);
  }
  return 0;
}
