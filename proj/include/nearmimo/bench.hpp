// SPDX-License-Identifier: Apache-2.0
// nearmimo: near-field distributed MIMO channel simulation and estimation

#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nearmimo/channel_db.hpp"
#include "nearmimo/estimation.hpp"

namespace nearmimo {

/// Invalid configuration (file contents, field values, or CLI overrides).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AntennaPlacement { perimeter, linear };

/// One benchmark configuration; each antenna spacing in
/// antenna_spacings_lambda becomes its own scenario.
struct ScenarioConfig {
  double room_width_m = 6.4;
  double room_depth_m = 6.4;
  double wavelength_m = 0.2;
  std::vector<double> antenna_spacings_lambda = {0.5, 2.0, 8.0};
  AntennaPlacement antenna_placement = AntennaPlacement::perimeter;
  int max_order = 1;
  double wall_reflection_coefficient = 1.0;
  int num_sources = 5;
  std::vector<double> input_evm_sweep_db = {-30.0, -25.0, -20.0, -15.0,
                                            -10.0, -5.0,  0.0,   5.0,  10.0};
  int trials = 200;
  std::uint64_t master_seed = 1;
  std::vector<std::string> estimators = {"antenna", "multisource", "multisink"};
  AmplitudeMode amplitude_mode = AmplitudeMode::least_squares;
  SteeringMode steering_mode = SteeringMode::squared_path_loss;
  SteeringMode template_steering_mode = SteeringMode::phase_only;
  double ue_margin_m = -1.0;  // < 0: use wavelength/2
  std::complex<double> tx_amplitude{1.0, 0.0};

  double effective_ue_margin() const {
    return ue_margin_m < 0.0 ? wavelength_m / 2.0 : ue_margin_m;
  }

  /// Throws ConfigError naming every invalid field.
  void validate() const;
};

ScenarioConfig load_config(const std::filesystem::path& file);
void save_config(const ScenarioConfig& cfg, const std::filesystem::path& file);

/// Antennas equally spaced along the room boundary, starting at the (0,0)
/// corner and proceeding counterclockwise; M = round(perimeter / spacing).
AntennaArray make_perimeter_array(double room_width, double room_depth,
                                  double spacing_m);

/// Ablation mode: antennas along the bottom edge from (0,0), step spacing_m.
AntennaArray make_linear_array(double room_width, double spacing_m);

/// The four room walls (bottom, right, top, left) with a common reflection
/// coefficient.
Environment make_room(double width, double depth, double reflection_coefficient);

/// Per-trial, per-noise-point outcome of every enabled estimator.
struct TrialRecord {
  std::string scenario;
  int trial_index = 0;
  Location ue_location;
  double input_evm_db = 0.0;
  std::map<std::string, double> output_evm_db;
  std::map<std::string, double> location_error_m;  // estimators with a location
  double wall_clock_ms = 0.0;
};

struct AggregateRow {
  std::string scenario;
  int antennas = 0;
  double spacing_lambda = 0.0;
  double input_evm_db = 0.0;
  std::string estimator;
  double mean_output_evm_db = 0.0;
  double median_output_evm_db = 0.0;
  double std_db = 0.0;
  double mean_loc_err_m = 0.0;  // NaN for estimators without a location
  int trials = 0;
};

struct ResultsTable {
  std::vector<AggregateRow> rows;
};

struct RunOutput {
  ResultsTable table;
  std::vector<TrialRecord> trials;
};

/// Runs every scenario in the config: per trial draws the user uniformly in
/// the margin-inset room, synthesizes the ground-truth channel, and for each
/// input-EVM point runs the enabled estimators. Deterministic for a fixed
/// config; trials run in parallel with per-trial seeds derived from
/// (master_seed, trial index). Per-trial output EVM is clamped at -100 dB
/// before aggregation.
RunOutput run_scenario(const ScenarioConfig& cfg);

/// Deterministic CSV with the fixed header scenario,M,spacing_lambda,
/// input_evm_db,estimator,mean_output_evm_db,median_output_evm_db,std_db,
/// mean_loc_err_m,trials. Rows ordered by scenario (config order), input EVM
/// ascending, estimator name ascending. Non-finite values are written as
/// "-inf"/"inf"/"nan".
void emit_csv(const ResultsTable& results, const std::filesystem::path& file);

/// Self-contained SVG: one chart per scenario, output EVM vs input EVM, one
/// polyline per estimator plus the identity reference line.
void emit_plot(const ResultsTable& results, const std::filesystem::path& file);

/// Shortest representation that round-trips IEEE double precision; non-finite
/// values become "inf"/"-inf"/"nan".
std::string format_double(double v);

/// Runs fn(0..n-1) across worker threads (0 = hardware concurrency).
/// Exceptions from workers are rethrown on the caller.
void parallel_for_index(int n, unsigned threads, const std::function<void(int)>& fn);

}  // namespace nearmimo
