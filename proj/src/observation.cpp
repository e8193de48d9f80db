#include "casclab/observation.hpp"

namespace casclab {

nlohmann::json ObservationSpec::to_json() const {
  nlohmann::json j;
  j["component"] = component;
  if (kind == Kind::interior) {
    j["kind"] = "interior";
    j["coefficient"] = b.to_json();
    j["region"] = {region.a, region.b};
  } else {
    j["kind"] = "boundary";
    nlohmann::json eps = nlohmann::json::array();
    if (at_x0) eps.push_back({{"endpoint", "x0"}, {"weight", weight_x0}});
    if (at_xL) eps.push_back({{"endpoint", "xL"}, {"weight", weight_xL}});
    j["endpoints"] = eps;
  }
  return j;
}

ObservationSpec ObservationSpec::from_json(const nlohmann::json& j) {
  ObservationSpec s;
  s.component = j.at("component").get<int>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "interior") {
    s.kind = Kind::interior;
    s.b = Coefficient::from_json(j.at("coefficient"));
    if (j.contains("region")) {
      s.region = Interval{j["region"].at(0).get<double>(), j["region"].at(1).get<double>()};
    }
  } else if (kind == "boundary") {
    s.kind = Kind::boundary;
    for (const auto& e : j.at("endpoints")) {
      const std::string ep = e.at("endpoint").get<std::string>();
      if (ep == "x0") {
        s.at_x0 = true;
        s.weight_x0 = e.value("weight", 1.0);
      } else if (ep == "xL") {
        s.at_xL = true;
        s.weight_xL = e.value("weight", 1.0);
      } else {
        throw InvalidArgument("endpoint must be x0 or xL");
      }
    }
    if (!s.at_x0 && !s.at_xL) throw InvalidArgument("boundary observation needs an endpoint");
  } else {
    throw InvalidArgument("observation kind must be interior or boundary");
  }
  return s;
}

ObservationOperator make_observation_operator(const ObservationSpec& spec, int N, double L) {
  ObservationOperator op;
  op.spec = spec;
  op.N = N;
  op.L = L;
  if (spec.kind == ObservationSpec::Kind::interior) {
    op.b_matrix = assemble_multiplication(spec.b, N, L).matrix;
  } else {
    const int rows = spec.gdim(N);
    if (rows == 0) throw InvalidArgument("boundary observation needs an endpoint");
    op.slope_rows.resize(rows, N);
    int r = 0;
    if (spec.at_x0) op.slope_rows.row(r++) = spec.weight_x0 * boundary_slope_functional(N, L, true).transpose();
    if (spec.at_xL) op.slope_rows.row(r++) = spec.weight_xL * boundary_slope_functional(N, L, false).transpose();
  }
  return op;
}

Eigen::VectorXd ObservationOperator::apply_bstar(const Eigen::VectorXd& field) const {
  if (spec.kind == ObservationSpec::Kind::interior) return b_matrix * field;
  return slope_rows * field;
}

Eigen::VectorXd ObservationOperator::apply_b(const Eigen::VectorXd& g_value) const {
  if (spec.kind == ObservationSpec::Kind::interior) return b_matrix * g_value;
  return slope_rows.transpose() * g_value;
}

ObservationSeries observe(const Trajectory& traj, const ObservationSpec& spec) {
  if (traj.states.empty()) throw InvalidArgument("empty trajectory");
  const int d = traj.states.front().components();
  if (spec.component < 1 || spec.component > d) throw InvalidArgument("observation target out of range");
  const int N = traj.states.front().positions[0].truncation();
  const double L = traj.states.front().positions[0].length;
  const ObservationOperator op = make_observation_operator(spec, N, L);

  ObservationSeries series;
  series.grid = traj.grid;
  series.values.resize(static_cast<Eigen::Index>(traj.states.size()), spec.gdim(N));
  const std::size_t c = static_cast<std::size_t>(spec.component - 1);
  for (std::size_t m = 0; m < traj.states.size(); ++m) {
    const Eigen::VectorXd& field = spec.kind == ObservationSpec::Kind::interior
                                       ? traj.states[m].velocities[c].coeffs
                                       : traj.states[m].positions[c].coeffs;
    series.values.row(static_cast<Eigen::Index>(m)) = op.apply_bstar(field).transpose();
  }
  return series;
}

double admissibility_integral(const ObservationSeries& series) {
  double acc = 0.0;
  for (std::size_t m = 0; m < series.grid.nodes(); ++m) {
    acc += trapezoid_weight(series.grid, m) *
           series.values.row(static_cast<Eigen::Index>(m)).squaredNorm();
  }
  return acc;
}

double admissibility_integral(const Trajectory& traj, const ObservationSpec& spec) {
  return admissibility_integral(observe(traj, spec));
}

NodalSource control_load(const ObservationSpec& spec, int N, double L,
                         const Eigen::MatrixXd& signal, const TimeGrid& grid) {
  if (signal.rows() != static_cast<Eigen::Index>(grid.nodes())) {
    throw InvalidArgument("control signal does not match the time grid");
  }
  const ObservationOperator op = make_observation_operator(spec, N, L);
  if (signal.cols() != spec.gdim(N)) throw InvalidArgument("control signal has wrong G dimension");
  NodalSource src;
  src.component = spec.component - 1;
  src.modal.resize(signal.rows(), N);
  for (Eigen::Index m = 0; m < signal.rows(); ++m) {
    src.modal.row(m) = op.apply_b(signal.row(m).transpose()).transpose();
  }
  return src;
}

}  // namespace casclab
