#include "casclab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "casclab/parallel.hpp"
#include "casclab/rng.hpp"

namespace casclab {

double level_energy(const SpectralField& u, const SpectralField& v, int k) {
  return 0.5 * (sqr(sobolev_norm(u, k)) + sqr(sobolev_norm(v, k - 1)));
}

double level_energy(const CascadeState& s, int component_1based, int k) {
  const std::size_t c = static_cast<std::size_t>(component_1based - 1);
  return level_energy(s.positions[c], s.velocities[c], k);
}

std::vector<int> canonical_levels(int n, int p) {
  std::vector<int> levels;
  for (int i = 1; i <= n; ++i) levels.push_back(1 + i - n);
  for (int j = 0; j < p; ++j) levels.push_back(1);
  return levels;
}

int EnergyLedger::find(int component_1based, int level) const {
  for (std::size_t s = 0; s < components.size(); ++s) {
    if (components[s] == component_1based && levels[s] == level) return static_cast<int>(s);
  }
  return -1;
}

EnergyLedger ledger(const CascadeConfig& cfg, const Trajectory& traj,
                    const std::vector<std::vector<int>>& levels_per_component) {
  if (static_cast<int>(levels_per_component.size()) < cfg.components()) {
    throw InvalidArgument("level list shorter than component count");
  }
  const std::vector<int> canon = canonical_levels(cfg.n, cfg.p);
  for (int i = 0; i < cfg.components(); ++i) {
    const auto& lv = levels_per_component[static_cast<std::size_t>(i)];
    if (std::find(lv.begin(), lv.end(), canon[static_cast<std::size_t>(i)]) == lv.end()) {
      throw InvalidArgument("levels must cover the canonical ladder");
    }
  }
  EnergyLedger led;
  led.grid = traj.grid;
  led.cfg_hash = std::hash<std::string>{}(cfg.to_json().dump());
  for (int i = 0; i < cfg.components(); ++i) {
    for (int k : levels_per_component[static_cast<std::size_t>(i)]) {
      led.components.push_back(i + 1);
      led.levels.push_back(k);
      std::vector<double> row(traj.states.size());
      for (std::size_t m = 0; m < traj.states.size(); ++m) {
        row[m] = level_energy(traj.states[m], i + 1, k);
      }
      led.series.push_back(std::move(row));
    }
  }
  return led;
}

double observability_ratio(const CascadeConfig& cfg, const CascadeState& U0, double T,
                           double dt, const ObservationSpec& obs) {
  const std::vector<int> levels = canonical_levels(cfg.n, cfg.p);
  double denom = 0.0;
  for (int i = 1; i <= cfg.n; ++i) denom += level_energy(U0, i, levels[static_cast<std::size_t>(i - 1)]);
  if (denom <= 0.0) throw UndefinedRatio("zero initial data has no observability quotient");
  const Trajectory traj = integrate_forward(cfg, U0, T, dt);
  return admissibility_integral(traj, obs) / denom;
}

CascadeState random_state(const CascadeConfig& cfg, const std::vector<int>& levels,
                          std::uint64_t seed) {
  GaussianStream g(seed);
  CascadeState s(cfg.components(), cfg.N, cfg.L);
  const double root_n = std::sqrt(static_cast<double>(cfg.N));
  for (int i = 0; i < cfg.components(); ++i) {
    const int k = levels[static_cast<std::size_t>(i)];
    for (int j = 0; j < cfg.N; ++j) {
      const double lam = eigenvalue(j + 1, cfg.L);
      s.positions[static_cast<std::size_t>(i)].coeffs[j] =
          g.next() / (root_n * std::pow(lam, 0.5 * k));
      s.velocities[static_cast<std::size_t>(i)].coeffs[j] =
          g.next() / (root_n * std::pow(lam, 0.5 * (k - 1)));
    }
  }
  return s;
}

namespace {

constexpr double kTiny = 1e-14;

struct DrawAccumulator {
  // prefix observation integrals at each grid T, plus per-component data.
  std::vector<double> obs_at_T;
  std::vector<double> e0;       // e_{1+i-n}(U_i)(0) per component
  std::vector<std::vector<double>> eint_at_T;  // [T][component]
  std::vector<double> coupling_at_T;           // int <C_nn-1 u_{n-1}, u_{n-1}>
};

}  // namespace

ObservabilityReport estimate_constants(const CascadeConfig& cfg, const ObservationSpec& obs,
                                       const std::vector<double>& T_grid, int samples,
                                       std::uint64_t seed, double dt) {
  if (T_grid.empty() || samples <= 0) throw InvalidArgument("need a T grid and samples > 0");
  const double floor = 2.0 * cfg.L;
  for (double T : T_grid) {
    if (T <= floor) throw InvalidArgument("sweep horizons must exceed the 2L floor");
  }
  std::vector<double> Ts = T_grid;
  std::sort(Ts.begin(), Ts.end());
  const double Tmax = Ts.back();
  const TimeGrid grid = exact_grid(Tmax, dt);
  std::vector<std::size_t> T_nodes;
  for (double T : Ts) T_nodes.push_back(exact_grid(T, dt).steps);

  const SystemOperator op = build_operator(cfg, Orientation::cascade);
  const ObservationOperator obs_op = make_observation_operator(obs, cfg.N, cfg.L);
  const std::vector<int> levels = canonical_levels(cfg.n, cfg.p);
  const int d = cfg.components();
  const std::size_t obs_c = static_cast<std::size_t>(obs.component - 1);

  // The coupling quotient reads <C_{n,n-1} u_{n-1}, u_{n-1}> along the run.
  const Eigen::MatrixXd* cnn = nullptr;
  if (cfg.n >= 2) {
    for (const auto& blk : op.blocks) {
      if (blk.row == cfg.n - 1 && blk.col == cfg.n - 2) cnn = blk.matrix.get();
    }
  }

  std::vector<DrawAccumulator> acc(static_cast<std::size_t>(samples));
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t s) {
    DrawAccumulator& a = acc[s];
    a.e0.assign(static_cast<std::size_t>(d), 0.0);
    a.obs_at_T.assign(Ts.size(), 0.0);
    a.coupling_at_T.assign(Ts.size(), 0.0);
    a.eint_at_T.assign(Ts.size(), std::vector<double>(static_cast<std::size_t>(d), 0.0));

    const CascadeState U0 = random_state(cfg, levels, subseed(seed, s));
    for (int i = 0; i < d; ++i) {
      a.e0[static_cast<std::size_t>(i)] = level_energy(U0, i + 1, levels[static_cast<std::size_t>(i)]);
    }

    // One run to Tmax; prefix trapezoid integrals snapshot at each grid T.
    double obs_acc = 0.0, coup_acc = 0.0;
    std::vector<double> eint(static_cast<std::size_t>(d), 0.0);
    std::size_t next = 0;
    evolve(op, U0, grid, nullptr, Direction::forward,
           [&](std::size_t m, const std::vector<Eigen::VectorXd>& pos,
               const std::vector<Eigen::VectorXd>& vel) {
             // Weight within the currently pending [0, T_k] prefixes: the
             // trapezoid end-correction is applied when a prefix closes.
             const double w = (m == 0 || m == grid.steps) ? 0.5 * dt : dt;
             const Eigen::VectorXd& field =
                 obs.kind == ObservationSpec::Kind::interior ? vel[obs_c] : pos[obs_c];
             const double o = obs_op.apply_bstar(field).squaredNorm();
             obs_acc += w * o;
             double cq = 0.0;
             if (cnn) {
               const Eigen::VectorXd& un1 = pos[static_cast<std::size_t>(cfg.n - 2)];
               cq = un1.dot(*cnn * un1);
             }
             coup_acc += w * cq;
             std::vector<double> e(static_cast<std::size_t>(d));
             for (int i = 0; i < d; ++i) {
               double pe = 0.0, ve = 0.0;
               const int k = levels[static_cast<std::size_t>(i)];
               for (int j = 0; j < cfg.N; ++j) {
                 const double lam = op.lambda[j];
                 pe += std::pow(lam, k) * sqr(pos[static_cast<std::size_t>(i)][j]);
                 ve += std::pow(lam, k - 1) * sqr(vel[static_cast<std::size_t>(i)][j]);
               }
               e[static_cast<std::size_t>(i)] = 0.5 * (pe + ve);
               eint[static_cast<std::size_t>(i)] += w * e[static_cast<std::size_t>(i)];
             }
             while (next < T_nodes.size() && m == T_nodes[next]) {
               // Close the [0, T_next] prefix: remove the half-weight excess
               // of the interior-node weight used above.
               const double corr = (m == grid.steps) ? 0.0 : 0.5 * dt;
               a.obs_at_T[next] = obs_acc - corr * o;
               a.coupling_at_T[next] = coup_acc - corr * cq;
               for (int i = 0; i < d; ++i) {
                 a.eint_at_T[next][static_cast<std::size_t>(i)] =
                     eint[static_cast<std::size_t>(i)] - corr * e[static_cast<std::size_t>(i)];
               }
               ++next;
             }
           });
  });

  // Constructive unobservability probes: data supported in components
  // 1..i only. If the observation vanishes on such a probe, the constants
  // d_hat for those components carry no finite bound at all.
  std::vector<bool> probe_blind(static_cast<std::size_t>(cfg.n), false);
  for (int i = 1; i <= cfg.n - 1; ++i) {
    CascadeState P = random_state(cfg, levels, subseed(seed ^ 0x0b5e7eULL, static_cast<std::uint64_t>(i)));
    for (int j = i; j < d; ++j) {
      P.positions[static_cast<std::size_t>(j)].coeffs.setZero();
      P.velocities[static_cast<std::size_t>(j)].coeffs.setZero();
    }
    double probe_obs = 0.0;
    evolve(op, P, grid, nullptr, Direction::forward,
           [&](std::size_t m, const std::vector<Eigen::VectorXd>& pos,
               const std::vector<Eigen::VectorXd>& vel) {
             const Eigen::VectorXd& field =
                 obs.kind == ObservationSpec::Kind::interior ? vel[obs_c] : pos[obs_c];
             probe_obs += trapezoid_weight(grid, m) * obs_op.apply_bstar(field).squaredNorm();
           });
    if (probe_obs < kTiny) {
      for (int j = 0; j < i; ++j) probe_blind[static_cast<std::size_t>(j)] = true;
    }
  }

  // Deterministic fold in draw order.
  ObservabilityReport rep;
  rep.T_grid = Ts;
  rep.dt = dt;
  rep.samples = samples;
  rep.seed = seed;
  const double inf = std::numeric_limits<double>::infinity();
  rep.d_hat.assign(Ts.size(), std::vector<double>(static_cast<std::size_t>(d), 0.0));
  rep.k_hat.assign(Ts.size(), std::vector<double>(static_cast<std::size_t>(d), 0.0));
  rep.r_hat.assign(Ts.size(), 0.0);
  rep.admiss_hat.assign(Ts.size(), 0.0);
  rep.extremal_draw.assign(Ts.size(), 0);
  for (std::size_t t = 0; t < Ts.size(); ++t) {
    for (int i = 0; i < cfg.n; ++i) {
      if (probe_blind[static_cast<std::size_t>(i)]) {
        rep.unobservable = true;
        rep.d_hat[t][static_cast<std::size_t>(i)] = inf;
      }
    }
    for (int s = 0; s < samples; ++s) {
      const DrawAccumulator& a = acc[static_cast<std::size_t>(s)];
      const double denom = a.obs_at_T[t];
      const double e0sum = std::accumulate(a.e0.begin(), a.e0.end(), 0.0);
      if (denom < kTiny * std::max(1.0, e0sum)) {
        rep.unobservable = true;
        for (int i = 0; i < d; ++i) rep.d_hat[t][static_cast<std::size_t>(i)] = inf;
        continue;
      }
      for (int i = 0; i < d; ++i) {
        const double dq = a.e0[static_cast<std::size_t>(i)] / denom;
        if (dq > rep.d_hat[t][static_cast<std::size_t>(i)]) {
          rep.d_hat[t][static_cast<std::size_t>(i)] = dq;
          if (i == cfg.n - 1) rep.extremal_draw[t] = s;
        }
        rep.k_hat[t][static_cast<std::size_t>(i)] =
            std::max(rep.k_hat[t][static_cast<std::size_t>(i)],
                     a.eint_at_T[t][static_cast<std::size_t>(i)] / denom);
      }
      rep.r_hat[t] = std::max(rep.r_hat[t], a.coupling_at_T[t] / denom);
      rep.admiss_hat[t] = std::max(rep.admiss_hat[t], denom / e0sum);
    }
  }

  // Fitted log-log slope of d_hat for the observed component vs T.
  if (Ts.size() >= 2 && !rep.unobservable) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const std::size_t nn = Ts.size();
    for (std::size_t t = 0; t < nn; ++t) {
      const double x = std::log(Ts[t]);
      const double y = std::log(std::max(rep.d_hat[t][static_cast<std::size_t>(cfg.n - 1)], 1e-300));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    rep.d_nn_slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
  }
  return rep;
}

nlohmann::json ObservabilityReport::to_json() const {
  nlohmann::json j;
  j["T_grid"] = T_grid;
  j["dt"] = dt;
  j["samples"] = samples;
  j["seed"] = seed;
  j["unobservable"] = unobservable;
  auto dump = [](const std::vector<std::vector<double>>& m) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& row : m) {
      nlohmann::json r = nlohmann::json::array();
      for (double v : row) {
        if (std::isinf(v)) {
          r.push_back("unobservable");
        } else {
          r.push_back(v);
        }
      }
      out.push_back(r);
    }
    return out;
  };
  j["d_hat"] = dump(d_hat);
  j["k_hat"] = dump(k_hat);
  j["r_hat"] = r_hat;
  j["admissibility_hat"] = admiss_hat;
  j["d_nn_loglog_slope"] = d_nn_slope;
  j["extremal_draw"] = extremal_draw;
  return j;
}

std::string ObservabilityReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "T,component,d_hat,k_hat,r_hat,admissibility_hat\n";
  for (std::size_t t = 0; t < T_grid.size(); ++t) {
    for (std::size_t i = 0; i < d_hat[t].size(); ++i) {
      os << T_grid[t] << "," << (i + 1) << "," << d_hat[t][i] << "," << k_hat[t][i] << ","
         << r_hat[t] << "," << admiss_hat[t] << "\n";
    }
  }
  return os.str();
}

UniformObservabilityReport uniform_inhomogeneous_check(const ObservationSpec& obs, double L,
                                                       int N, const std::vector<double>& T_grid,
                                                       int samples, std::uint64_t seed, double dt,
                                                       double source_scale, double amplitude) {
  if (T_grid.empty() || samples <= 0) throw InvalidArgument("need a T grid and samples > 0");
  CascadeConfig scalar;
  scalar.n = 1;
  scalar.p = 0;
  scalar.L = L;
  scalar.N = N;
  scalar.subdiagonal.clear();
  scalar.coupling_regions.clear();
  const SystemOperator op = build_operator(scalar, Orientation::cascade);
  const ObservationOperator obs_op = make_observation_operator(obs, N, L);

  UniformObservabilityReport rep;
  rep.T_grid = T_grid;

  for (double T : T_grid) {
    const TimeGrid grid = exact_grid(T, dt);
    std::vector<double> X(static_cast<std::size_t>(samples));  // int ||B* P||^2
    std::vector<double> E(static_cast<std::size_t>(samples));  // int e_1(P)
    std::vector<double> F(static_cast<std::size_t>(samples));  // int |f|^2

    parallel_for(static_cast<std::size_t>(samples), [&](std::size_t s) {
      GaussianStream g(subseed(seed ^ 0x5eedf00dULL, s));
      CascadeState P0(1, N, L);
      const double root_n = std::sqrt(static_cast<double>(N));
      for (int j = 0; j < N; ++j) {
        const double lam = eigenvalue(j + 1, L);
        P0.positions[0].coeffs[j] = amplitude * g.next() / (root_n * std::sqrt(lam));
        P0.velocities[0].coeffs[j] = amplitude * g.next() / root_n;
      }
      // Random source: three random modal profiles with harmonic envelopes.
      NodalSource src;
      src.component = 0;
      src.modal = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.nodes()), N);
      for (int r = 0; r < 3; ++r) {
        Eigen::VectorXd prof(N);
        for (int j = 0; j < N; ++j) prof[j] = amplitude * source_scale * g.next() / root_n;
        const double theta = 0.5 + 2.0 * g.uniform();
        const double phase = 6.283185307179586 * g.uniform();
        for (std::size_t m = 0; m < grid.nodes(); ++m) {
          src.modal.row(static_cast<Eigen::Index>(m)) +=
              std::cos(theta * grid.time(m) + phase) * prof.transpose();
        }
      }
      const SourceList sources{src};
      double x = 0.0, e = 0.0, f = 0.0;
      evolve(op, P0, grid, &sources, Direction::forward,
             [&](std::size_t m, const std::vector<Eigen::VectorXd>& pos,
                 const std::vector<Eigen::VectorXd>& vel) {
               const double w = trapezoid_weight(grid, m);
               const Eigen::VectorXd& field =
                   obs.kind == ObservationSpec::Kind::interior ? vel[0] : pos[0];
               x += w * obs_op.apply_bstar(field).squaredNorm();
               double e1 = 0.0;
               for (int j = 0; j < N; ++j) {
                 e1 += op.lambda[j] * sqr(pos[0][j]) + sqr(vel[0][j]);
               }
               e += w * 0.5 * e1;
               f += w * src.modal.row(static_cast<Eigen::Index>(m)).squaredNorm();
             });
      X[s] = x;
      E[s] = e;
      F[s] = f;
    });

    // Two-parameter sweep: for candidate alpha0 the smallest admissible
    // eta0 is max_s (E - alpha0 F)+ / X. Minimizing eta0 alone degenerates
    // (huge alpha0 drives it to zero), so the selected pair minimizes the
    // claimed budget eta0 * mean(X) + alpha0 * mean(F); the objective is
    // invariant under joint scaling of data and source. Ties go to the
    // smaller alpha0.
    double scale = 0.0, meanX = 0.0, meanF = 0.0;
    for (int s = 0; s < samples; ++s) {
      meanX += X[static_cast<std::size_t>(s)] / samples;
      meanF += F[static_cast<std::size_t>(s)] / samples;
      if (F[static_cast<std::size_t>(s)] > 0.0) {
        scale = std::max(scale, E[static_cast<std::size_t>(s)] / F[static_cast<std::size_t>(s)]);
      }
    }
    double best_cost = std::numeric_limits<double>::infinity();
    double best_eta = 0.0, best_alpha = 0.0;
    std::vector<double> alphas = {0.0};
    for (int gidx = -20; gidx <= 4; ++gidx) {
      alphas.push_back(scale * std::pow(2.0, gidx / 2.0));
    }
    for (double alpha : alphas) {
      double eta = 0.0;
      for (int s = 0; s < samples; ++s) {
        const double need = E[static_cast<std::size_t>(s)] - alpha * F[static_cast<std::size_t>(s)];
        if (need > 0.0) eta = std::max(eta, need / std::max(X[static_cast<std::size_t>(s)], 1e-300));
      }
      const double cost = eta * meanX + alpha * meanF;
      if (cost < best_cost * (1.0 - 1e-12)) {
        best_cost = cost;
        best_eta = eta;
        best_alpha = alpha;
      }
    }
    rep.eta0.push_back(best_eta);
    rep.alpha0.push_back(best_alpha);
  }

  auto spread = [](const std::vector<double>& v) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double x : v) {
      if (x > 0.0) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
    return (hi > 0.0 && std::isfinite(lo)) ? hi / lo : 1.0;
  };
  rep.spread_eta = spread(rep.eta0);
  rep.spread_alpha = spread(rep.alpha0);
  rep.uniform = rep.spread_eta <= 2.0 && rep.spread_alpha <= 2.0;
  return rep;
}

nlohmann::json UniformObservabilityReport::to_json() const {
  return nlohmann::json{{"T_grid", T_grid}, {"eta0", eta0},
                        {"alpha0", alpha0}, {"spread_eta", spread_eta},
                        {"spread_alpha", spread_alpha}, {"uniform", uniform}};
}

}  // namespace casclab
