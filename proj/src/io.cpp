#include "casclab/io.hpp"

#include <charconv>
#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>

namespace casclab {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string ledger_csv(const EnergyLedger& led) {
  std::ostringstream os;
  os << "t";
  for (std::size_t s = 0; s < led.series.size(); ++s) {
    os << ",e" << led.levels[s] << "(U" << led.components[s] << ")";
  }
  os << "\n";
  for (std::size_t m = 0; m < led.grid.nodes(); ++m) {
    os << format_double(led.grid.time(m));
    for (const auto& row : led.series) os << "," << format_double(row[m]);
    os << "\n";
  }
  return os.str();
}

std::string observation_csv(const ObservationSeries& series) {
  std::ostringstream os;
  os << "t";
  for (Eigen::Index c = 0; c < series.values.cols(); ++c) os << ",g" << (c + 1);
  os << "\n";
  for (std::size_t m = 0; m < series.grid.nodes(); ++m) {
    os << format_double(series.grid.time(m));
    for (Eigen::Index c = 0; c < series.values.cols(); ++c) {
      os << "," << format_double(series.values(static_cast<Eigen::Index>(m), c));
    }
    os << "\n";
  }
  return os.str();
}

std::string control_csv(const TimeGrid& grid, const Eigen::MatrixXd& signal) {
  std::ostringstream os;
  os << "t";
  for (Eigen::Index c = 0; c < signal.cols(); ++c) os << ",v" << (c + 1);
  os << "\n";
  for (std::size_t m = 0; m < grid.nodes(); ++m) {
    os << format_double(grid.time(m));
    for (Eigen::Index c = 0; c < signal.cols(); ++c) {
      os << "," << format_double(signal(static_cast<Eigen::Index>(m), c));
    }
    os << "\n";
  }
  return os.str();
}

Eigen::MatrixXd control_from_csv(const std::string& text, const TimeGrid& grid) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("empty control CSV");
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t comma = line.find(',', start);
      const std::string tok = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      row.push_back(std::stod(tok));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() != grid.nodes()) throw GridMismatch("control CSV does not match the time grid");
  const std::size_t cols = rows.front().size() - 1;
  Eigen::MatrixXd signal(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t m = 0; m < rows.size(); ++m) {
    if (rows[m].size() != cols + 1) throw InvalidArgument("ragged control CSV");
    for (std::size_t c = 0; c < cols; ++c) {
      signal(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(c)) = rows[m][c + 1];
    }
  }
  return signal;
}

namespace {
constexpr char kMagic[8] = {'C', 'A', 'S', 'C', 'S', 'N', 'P', '1'};
}

void write_snapshot(const std::string& path, const CascadeConfig& cfg, const Trajectory& traj) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot open snapshot for writing: " + path);
  os.write(kMagic, 8);
  const std::uint32_t N = static_cast<std::uint32_t>(cfg.N);
  const std::uint32_t n = static_cast<std::uint32_t>(cfg.n);
  const std::uint32_t p = static_cast<std::uint32_t>(cfg.p);
  const std::uint64_t M = traj.grid.steps;
  os.write(reinterpret_cast<const char*>(&N), 4);
  os.write(reinterpret_cast<const char*>(&n), 4);
  os.write(reinterpret_cast<const char*>(&p), 4);
  os.write(reinterpret_cast<const char*>(&M), 8);
  os.write(reinterpret_cast<const char*>(&traj.grid.dt), 8);
  os.write(reinterpret_cast<const char*>(&cfg.L), 8);
  for (const auto& s : traj.states) {
    const Eigen::VectorXd x = s.flatten();
    os.write(reinterpret_cast<const char*>(x.data()), static_cast<std::streamsize>(x.size() * 8));
  }
}

Trajectory read_snapshot(const std::string& path, CascadeConfig& cfg_out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open snapshot: " + path);
  char magic[8];
  is.read(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) throw InvalidArgument("bad snapshot magic");
  std::uint32_t N = 0, n = 0, p = 0;
  std::uint64_t M = 0;
  double dt = 0.0, L = 0.0;
  is.read(reinterpret_cast<char*>(&N), 4);
  is.read(reinterpret_cast<char*>(&n), 4);
  is.read(reinterpret_cast<char*>(&p), 4);
  is.read(reinterpret_cast<char*>(&M), 8);
  is.read(reinterpret_cast<char*>(&dt), 8);
  is.read(reinterpret_cast<char*>(&L), 8);
  cfg_out.N = static_cast<int>(N);
  cfg_out.n = static_cast<int>(n);
  cfg_out.p = static_cast<int>(p);
  cfg_out.L = L;
  Trajectory traj;
  traj.grid = TimeGrid{dt, M};
  const int d = static_cast<int>(n + p);
  Eigen::VectorXd x(2 * d * static_cast<int>(N));
  for (std::uint64_t m = 0; m <= M; ++m) {
    is.read(reinterpret_cast<char*>(x.data()), static_cast<std::streamsize>(x.size() * 8));
    if (!is) throw InvalidArgument("truncated snapshot");
    traj.states.push_back(CascadeState::unflatten(x, d, static_cast<int>(N), L));
  }
  return traj;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

nlohmann::json make_manifest(const nlohmann::json& config, std::uint64_t seed, int threads) {
  nlohmann::json m;
  m["config_hash"] = fnv1a(config.dump());
  m["seed"] = seed;
  m["threads"] = threads;
  m["version"] = "casclab 1.0.0";
  m["timestamp_unix"] =
      std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
          .count();
  return m;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot open for writing: " + path);
  os << text;
}

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open: " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace casclab
