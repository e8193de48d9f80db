#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "casclab/energy.hpp"
#include "casclab/evolution.hpp"

namespace casclab {

// CSV dialect: comma separator, '.' decimal point, header row, shortest
// round-trip doubles. Identical inputs reproduce identical bytes.
std::string format_double(double v);

// Ledger CSV: t, then one column e{k}(U{i}) per tracked series.
std::string ledger_csv(const EnergyLedger& led);

// Observation series CSV: t, then the G coordinates.
std::string observation_csv(const ObservationSeries& series);

// Control signal CSV: t, then the signal coordinates (scalar per endpoint
// for boundary controls, modal coefficients for interior ones).
std::string control_csv(const TimeGrid& grid, const Eigen::MatrixXd& signal);
Eigen::MatrixXd control_from_csv(const std::string& text, const TimeGrid& grid);

// Binary trajectory snapshot. Little-endian layout:
//   magic "CASCSNP1" (8 bytes), u32 N, u32 n, u32 p, u64 M, f64 dt, f64 L,
//   then per node m = 0..M: all position coefficients then all velocity
//   coefficients, component-major, row-major doubles.
void write_snapshot(const std::string& path, const CascadeConfig& cfg, const Trajectory& traj);
Trajectory read_snapshot(const std::string& path, CascadeConfig& cfg_out);

// Run manifest: input hash, seed, version, thread count and a timestamp
// (the timestamp is the only field allowed to differ between reruns).
nlohmann::json make_manifest(const nlohmann::json& config, std::uint64_t seed, int threads);

std::uint64_t fnv1a(const std::string& bytes);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace casclab
