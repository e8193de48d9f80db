// Batch front-end: runs simulations, observability sweeps, control
// synthesis and the application pipelines from JSON configs and writes
// CSV/JSON artifacts. Exit codes: 0 ok, 2 config/schema problem, 3
// numerical failure (report still written).

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "casclab/io.hpp"
#include "casclab/compat.hpp"
#include "casclab/energy.hpp"
#include "casclab/hum.hpp"
#include "casclab/parallel.hpp"
#include "casclab/rng.hpp"
#include "casclab/scenarios.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 1;
  int threads = 1;
  double dt_override = 0.0;
  int modes_override = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "JSON config path")->required();
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--seed", args.seed, "random seed");
  cmd->add_option("--threads", args.threads, "worker count (1 = determinism reference)");
  cmd->add_option("--dt", args.dt_override, "time step override");
  cmd->add_option("--modes", args.modes_override, "truncation override");
}

json load_config(const CommonArgs& args) {
  json j = json::parse(casclab::read_text(args.config));
  if (args.dt_override > 0.0) j["dt"] = args.dt_override;
  if (args.modes_override > 0) {
    if (j.contains("system")) j["system"]["modes"] = args.modes_override;
    if (j.contains("modes")) j["modes"] = args.modes_override;
  }
  // The batch front-end snaps the step to the horizon so that horizons like
  // 2*pi work with round step hints; library calls keep the strict grid.
  if (j.contains("T") && j.contains("dt")) {
    j["dt"] = casclab::snapped_grid(j["T"].get<double>(), j["dt"].get<double>()).dt;
  }
  return j;
}

void write_manifest(const CommonArgs& args, const json& cfg) {
  casclab::write_text((fs::path(args.out) / "manifest.json").string(),
                      casclab::make_manifest(cfg, args.seed, args.threads).dump(2) + "\n");
}

casclab::CascadeState parse_initial_data(const json& j, const casclab::CascadeConfig& cfg,
                                         std::uint64_t seed) {
  casclab::CascadeState s(cfg.components(), cfg.N, cfg.L);
  if (!j.contains("initial_data")) return s;
  const json& init = j.at("initial_data");
  if (init.is_object() && init.value("kind", "") == "random") {
    return casclab::random_state(cfg, casclab::canonical_levels(cfg.n, cfg.p),
                                 init.value("seed", seed));
  }
  if (init.is_object() && init.value("kind", "") == "mode") {
    const int comp = init.at("component").get<int>();
    const int k = init.at("mode").get<int>();
    if (comp < 1 || comp > cfg.components() || k < 1 || k > cfg.N) {
      throw casclab::InvalidArgument("mode initial data out of range");
    }
    s.positions[static_cast<std::size_t>(comp - 1)].coeffs[k - 1] = init.value("amplitude", 1.0);
    s.velocities[static_cast<std::size_t>(comp - 1)].coeffs[k - 1] = init.value("velocity", 0.0);
    return s;
  }
  if (init.is_array()) {
    for (int i = 0; i < cfg.components() && i < static_cast<int>(init.size()); ++i) {
      const json& e = init[static_cast<std::size_t>(i)];
      auto fill = [&](const char* key, casclab::SpectralField& f) {
        if (!e.contains(key)) return;
        const auto v = e.at(key).get<std::vector<double>>();
        for (int k = 0; k < cfg.N && k < static_cast<int>(v.size()); ++k) {
          f.coeffs[k] = v[static_cast<std::size_t>(k)];
        }
      };
      fill("position", s.positions[static_cast<std::size_t>(i)]);
      fill("velocity", s.velocities[static_cast<std::size_t>(i)]);
    }
    return s;
  }
  throw casclab::InvalidArgument("unrecognized initial_data");
}

std::vector<std::vector<int>> ledger_levels(const casclab::CascadeConfig& cfg) {
  const std::vector<int> canon = casclab::canonical_levels(cfg.n, cfg.p);
  std::vector<std::vector<int>> levels;
  for (int i = 0; i < cfg.components(); ++i) {
    levels.push_back({canon[static_cast<std::size_t>(i)], 1});
  }
  return levels;
}

int run_simulate(const CommonArgs& args) {
  const json j = load_config(args);
  const casclab::CascadeConfig cfg = casclab::CascadeConfig::from_json(j.at("system"));
  const double T = j.at("T").get<double>();
  const double dt = j.value("dt", 1e-3);
  const casclab::CascadeState U0 = parse_initial_data(j, cfg, args.seed);
  const casclab::Trajectory traj = casclab::integrate_forward(cfg, U0, T, dt);
  const casclab::EnergyLedger led = casclab::ledger(cfg, traj, ledger_levels(cfg));
  casclab::write_text((fs::path(args.out) / "ledger.csv").string(), casclab::ledger_csv(led));
  casclab::write_snapshot((fs::path(args.out) / "trajectory.snp").string(), cfg, traj);
  write_manifest(args, j);
  return 0;
}

int run_observe(const CommonArgs& args) {
  const json j = load_config(args);
  const casclab::CascadeConfig cfg = casclab::CascadeConfig::from_json(j.at("system"));
  const casclab::ObservationSpec obs = casclab::ObservationSpec::from_json(j.at("observation"));
  const double T = j.at("T").get<double>();
  const double dt = j.value("dt", 1e-3);
  const casclab::CascadeState U0 = parse_initial_data(j, cfg, args.seed);
  const casclab::Trajectory traj = casclab::integrate_forward(cfg, U0, T, dt);
  const casclab::ObservationSeries series = casclab::observe(traj, obs);
  casclab::write_text((fs::path(args.out) / "observation.csv").string(),
                      casclab::observation_csv(series));
  json rep;
  rep["admissibility_integral"] = casclab::admissibility_integral(series);
  casclab::write_text((fs::path(args.out) / "observe.json").string(), rep.dump(2) + "\n");
  write_manifest(args, j);
  return 0;
}

int run_sweep(const CommonArgs& args) {
  const json j = load_config(args);
  const casclab::CascadeConfig cfg = casclab::CascadeConfig::from_json(j.at("system"));
  const casclab::ObservationSpec obs = casclab::ObservationSpec::from_json(j.at("observation"));
  const auto T_grid = j.at("T_grid").get<std::vector<double>>();
  const int samples = j.value("samples", 100);
  const double dt = j.value("dt", 1e-3);
  const std::uint64_t seed = j.value("seed", args.seed);
  const casclab::ObservabilityReport rep =
      casclab::estimate_constants(cfg, obs, T_grid, samples, seed, dt);
  casclab::write_text((fs::path(args.out) / "sweep.json").string(), rep.to_json().dump(2) + "\n");
  casclab::write_text((fs::path(args.out) / "sweep.csv").string(), rep.to_csv());
  write_manifest(args, j);
  return 0;
}

int run_hum(const CommonArgs& args, bool gramian_only) {
  const json j = load_config(args);
  const casclab::ControlProblem pb = casclab::ControlProblem::from_json(j);
  write_manifest(args, j);
  if (gramian_only) {
    const casclab::DenseGramian G = casclab::dense_gramian(pb);
    json rep;
    rep["dimension"] = G.matrix.rows();
    rep["min_eigenvalue"] = G.min_eigenvalue();
    rep["max_eigenvalue"] = G.max_eigenvalue();
    rep["symmetry_defect"] =
        (G.matrix - G.matrix.transpose()).cwiseAbs().maxCoeff() /
        std::max(G.matrix.cwiseAbs().maxCoeff(), 1e-300);
    casclab::write_text((fs::path(args.out) / "gramian.json").string(), rep.dump(2) + "\n");
    return 0;
  }
  const double tol = j.value("tol", 1e-8);
  const int max_iter = j.value("max_iter", 2000);
  const std::string method = j.value("method", "auto");
  const casclab::SolveMethod sm = method == "dense"  ? casclab::SolveMethod::dense
                                  : method == "cg"   ? casclab::SolveMethod::cg
                                                     : casclab::SolveMethod::automatic;
  const casclab::HumSolution sol = casclab::solve_hum(pb, tol, max_iter, sm);
  casclab::write_text((fs::path(args.out) / "hum.json").string(), sol.to_json().dump(2) + "\n");
  const casclab::TimeGrid grid = casclab::exact_grid(pb.T, pb.dt);
  for (std::size_t l = 0; l < sol.controls.size(); ++l) {
    casclab::write_text((fs::path(args.out) / ("control_" + std::to_string(pb.cfg.n + static_cast<int>(l)) + ".csv")).string(),
                        casclab::control_csv(grid, sol.controls[l]));
  }
  const casclab::Trajectory verify = casclab::simulate_controlled(pb, sol.controls, pb.Y0);
  const casclab::EnergyLedger led = casclab::ledger(pb.cfg, verify, ledger_levels(pb.cfg));
  casclab::write_text((fs::path(args.out) / "controlled_ledger.csv").string(),
                      casclab::ledger_csv(led));
  return sol.success() ? 0 : 3;
}

int run_check_coeff(const CommonArgs& args) {
  const json j = load_config(args);
  const casclab::Coefficient c = casclab::Coefficient::from_json(j.at("coefficient"));
  const double L = j.value("interval_length", 3.14159265358979323846);
  json rep;
  rep["compat"] = json::array();
  for (int k : j.value("levels", std::vector<int>{3})) {
    const casclab::CompatReport cr = casclab::check_compat_1d(c, k, L);
    json e;
    e["level"] = cr.level;
    e["pass"] = cr.pass;
    e["conditions"] = json::array();
    for (const auto& cond : cr.conditions) {
      e["conditions"].push_back({{"derivative", cond.derivative_order},
                                 {"at_left", cond.at_left},
                                 {"at_right", cond.at_right},
                                 {"ok", cond.ok}});
    }
    rep["compat"].push_back(e);
  }
  if (j.contains("stability")) {
    const json& st = j.at("stability");
    const casclab::HkStabilityReport hr = casclab::verify_Hk_stability(
        c, st.at("level").get<int>(), L, st.at("truncations").get<std::vector<int>>());
    json e;
    e["level"] = hr.level;
    e["growth"] = hr.growth;
    e["stable"] = hr.stable;
    e["norms"] = json::array();
    for (const auto& en : hr.entries) {
      e["norms"].push_back({{"N", en.truncation}, {"operator_norm", en.operator_norm}});
    }
    rep["stability"] = e;
  }
  casclab::write_text((fs::path(args.out) / "coeff_report.json").string(), rep.dump(2) + "\n");
  write_manifest(args, j);
  return 0;
}

int run_simultaneous(const CommonArgs& args) {
  const json j = load_config(args);
  const casclab::SimultaneousSystem sys = casclab::SimultaneousSystem::from_json(j);
  const casclab::Interval O2{j.at("O2").at(0).get<double>(), j.at("O2").at(1).get<double>()};
  const casclab::Interval O3{j.at("O3").at(0).get<double>(), j.at("O3").at(1).get<double>()};
  const double T = j.at("T").get<double>();
  const double dt = j.value("dt", 1e-3);
  const double tol = j.value("tol", 1e-8);
  write_manifest(args, j);
  const casclab::SimultaneousSolution sol = casclab::solve_simultaneous(sys, O2, O3, T, dt, tol);
  casclab::write_text((fs::path(args.out) / "simultaneous.json").string(),
                      sol.to_json().dump(2) + "\n");
  casclab::write_text((fs::path(args.out) / "control_h.csv").string(),
                      casclab::control_csv(casclab::exact_grid(T, dt), sol.h));
  return sol.success ? 0 : 3;
}

int run_insensitize(const CommonArgs& args) {
  const json j = load_config(args);
  const double L = j.value("interval_length", 3.14159265358979323846);
  const int N = j.at("modes").get<int>();
  casclab::SpectralField y0(N, L), y1(N, L);
  if (j.contains("y0")) {
    const auto v = j.at("y0").get<std::vector<double>>();
    for (int k = 0; k < N && k < static_cast<int>(v.size()); ++k) y0.coeffs[k] = v[static_cast<std::size_t>(k)];
  }
  if (j.contains("y1")) {
    const auto v = j.at("y1").get<std::vector<double>>();
    for (int k = 0; k < N && k < static_cast<int>(v.size()); ++k) y1.coeffs[k] = v[static_cast<std::size_t>(k)];
  }
  const casclab::Coefficient b = casclab::Coefficient::from_json(j.at("control_coefficient"));
  const casclab::Coefficient c = casclab::Coefficient::from_json(j.at("observation_coefficient"));
  const casclab::Interval omega{j.at("omega").at(0).get<double>(), j.at("omega").at(1).get<double>()};
  const casclab::Interval O{j.at("O").at(0).get<double>(), j.at("O").at(1).get<double>()};
  const double T = j.at("T").get<double>();
  const double dt = j.value("dt", 1e-3);
  const double tol = j.value("tol", 1e-8);
  write_manifest(args, j);
  const casclab::InsensitizingResult res = casclab::insensitizing_pipeline(
      y0, y1, b, omega, c, O, T, dt, tol, j.value("directions", 5), j.value("eps", 1e-4),
      j.value("seed", args.seed), j.value("with_control", true));
  casclab::write_text((fs::path(args.out) / "insensitize.json").string(),
                      res.to_json().dump(2) + "\n");
  return res.success ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cascade wave control laboratory"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string mode;
  for (const char* name : {"simulate", "observe", "sweep-T", "hum", "gramian", "check-coeff",
                           "simultaneous", "insensitize"}) {
    CLI::App* sub = app.add_subcommand(name);
    add_common(sub, args);
    sub->callback([&mode, name]() { mode = name; });
  }

  CLI11_PARSE(app, argc, argv);
  casclab::set_threads(args.threads);

  try {
    fs::create_directories(args.out);
    if (mode == "simulate") return run_simulate(args);
    if (mode == "observe") return run_observe(args);
    if (mode == "sweep-T") return run_sweep(args);
    if (mode == "hum") return run_hum(args, false);
    if (mode == "gramian") return run_hum(args, true);
    if (mode == "check-coeff") return run_check_coeff(args);
    if (mode == "simultaneous") return run_simultaneous(args);
    if (mode == "insensitize") return run_insensitize(args);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const casclab::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const casclab::InvalidCoefficient& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const casclab::HypothesisViolation& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const casclab::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
