// SPDX-License-Identifier: Apache-2.0
// nearmimo: near-field distributed MIMO channel simulation and estimation

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "nearmimo/propagation.hpp"

namespace nearmimo {

struct ChannelDatabase;  // channel_db.hpp

/// Sentinel for "no noise": add_noise returns the channel unchanged and
/// evm_db reports it for a perfect estimate.
inline constexpr double kNoNoiseDb = -std::numeric_limits<double>::infinity();

/// Antenna-domain snapshot: ground truth plus noise scaled to an exact
/// target input EVM.
struct NoisyChannel {
  std::vector<std::complex<double>> coefficients;
  double wavelength = 0.0;
  double target_input_evm_db = kNoNoiseDb;
};

/// Adds circularly-symmetric white gaussian noise, renormalized so that
/// ||noise||/||h|| equals 10^(target/20) exactly. Deterministic given seed;
/// target = kNoNoiseDb returns the channel unchanged.
NoisyChannel add_noise(const ChannelVector& h, double target_input_evm_db,
                       std::uint64_t seed);

/// Error vector magnitude in dB: 20*log10(||estimate - truth|| / ||truth||).
/// Returns kNoNoiseDb for a bit-perfect estimate.
double evm_db(const ChannelVector& estimate, const ChannelVector& truth);

/// Axis-aligned rectangular search window in the z = 0 plane.
struct SearchRegion {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
};

/// Coarse-to-fine schedule for the grid peak search. The defaults follow the
/// quarter-wavelength coarse pass refined down to lambda/64.
struct SearchParams {
  double coarse_step = 0.0;
  double final_step = 0.0;
  int zoom_window_radius = 2;  // in units of the previous step
  double step_shrink = 2.0;

  static SearchParams defaults_for(double wavelength) {
    return {wavelength / 4.0, wavelength / 64.0, 2, 2.0};
  }
};

namespace detail {

struct PeakState {
  double value = -std::numeric_limits<double>::infinity();
  double x = 0.0;
  double y = 0.0;
  bool any = false;

  // Deterministic argmax: strictly larger wins; exact ties go to the
  // lexicographically smallest (x, y). Non-finite scores are ignored, which
  // lets callers exclude candidates by returning -infinity.
  void offer(double v, double px, double py) {
    if (std::isnan(v) || v == -std::numeric_limits<double>::infinity()) return;
    if (!any || v > value ||
        (v == value && (px < x || (px == x && py < y)))) {
      value = v;
      x = px;
      y = py;
      any = true;
    }
  }
};

}  // namespace detail

/// Exhaustive coarse grid anchored at the region's minimum corner, then
/// repeated re-gridding of a +-zoom_window_radius cell window around the
/// incumbent with the step divided by step_shrink, until the evaluated step
/// reaches final_step. Candidates outside the region are never evaluated and
/// the incumbent is kept across rounds.
template <typename Objective>
Location grid_peak_search(Objective&& objective, const SearchRegion& region,
                          const SearchParams& params) {
  if (!(region.x_min < region.x_max) || !(region.y_min < region.y_max))
    throw std::invalid_argument("grid_peak_search: empty search region");
  if (!(params.final_step > 0.0) || !(params.coarse_step >= params.final_step))
    throw std::invalid_argument("grid_peak_search: need 0 < final_step <= coarse_step");
  if (params.zoom_window_radius < 1 || !(params.step_shrink > 1.0))
    throw std::invalid_argument("grid_peak_search: invalid zoom schedule");

  detail::PeakState best;
  const auto sweep = [&](double anchor_x, double anchor_y, double step,
                         int nx, int ny) {
    for (int ix = 0; ix < nx; ++ix) {
      const double x = anchor_x + ix * step;
      if (x < region.x_min || x > region.x_max) continue;
      for (int iy = 0; iy < ny; ++iy) {
        const double y = anchor_y + iy * step;
        if (y < region.y_min || y > region.y_max) continue;
        best.offer(objective(Location{x, y, 0.0}), x, y);
      }
    }
  };

  const int coarse_nx =
      static_cast<int>(std::floor((region.x_max - region.x_min) / params.coarse_step + 1e-9)) + 1;
  const int coarse_ny =
      static_cast<int>(std::floor((region.y_max - region.y_min) / params.coarse_step + 1e-9)) + 1;
  sweep(region.x_min, region.y_min, params.coarse_step, coarse_nx, coarse_ny);

  double step = params.coarse_step;
  while (step > params.final_step * (1.0 + 1e-12)) {
    const double next = step / params.step_shrink;
    if (!best.any) break;
    const double half = params.zoom_window_radius * step;
    const int n = static_cast<int>(std::floor(2.0 * half / next + 1e-9)) + 1;
    sweep(best.x - half, best.y - half, next, n, n);
    step = next;
  }
  if (!best.any)
    throw std::runtime_error("grid_peak_search: objective nowhere finite on the grid");
  return {best.x, best.y, 0.0};
}

/// Magnitude of the antenna-domain correlation between the snapshot and the
/// steering template at candidate location l. Throws TooCloseError within
/// wavelength/100 of an antenna.
double multisource_objective(const Location& l, const NoisyChannel& snapshot,
                             const AntennaArray& array,
                             SteeringMode template_mode = SteeringMode::squared_path_loss);

/// How per-image amplitudes are fitted once a location is found:
/// least_squares divides the correlation by the template energy;
/// mean_correlation divides by the antenna count.
enum class AmplitudeMode { least_squares, mean_correlation };

struct SourceEstimate {
  Location location;
  std::complex<double> amplitude{0.0, 0.0};
  double peak_metric = 0.0;
};

struct MultisourceResult {
  std::vector<SourceEstimate> sources;
  ChannelVector reconstructed;
  std::vector<std::string> warnings;
};

/// Greedy extraction of num_sources virtual transmitters by successive
/// cancellation: peak-search the correlation of the current residual, fit the
/// amplitude, subtract, repeat. The search maximizes the correlation
/// normalized by the template norm, which bounds the score near antennas and
/// peaks exactly at the source for noiseless single-path data; the template
/// steering follows data_mode unless template_mode overrides it (phase-only
/// templates make the normalization a constant). Amplitudes and the
/// reconstruction always use data_mode. With joint_amplitude_refit all
/// amplitudes are refitted by least squares against the original snapshot
/// once every location is found.
MultisourceResult estimate_multisource(
    const NoisyChannel& snapshot, const AntennaArray& array, int num_sources,
    const SearchRegion& region, const SearchParams& params,
    AmplitudeMode amplitude_mode = AmplitudeMode::least_squares,
    SteeringMode data_mode = SteeringMode::squared_path_loss,
    std::optional<SteeringMode> template_mode = std::nullopt,
    bool joint_amplitude_refit = false);

/// Correlation of the snapshot against the database's composite per-antenna
/// sink response at candidate transmitter location l_tx. Throws TooCloseError
/// within wavelength/100 of any sink.
double multisink_objective(const Location& l_tx, const NoisyChannel& snapshot,
                           const ChannelDatabase& db, const Environment& env,
                           SteeringMode template_mode = SteeringMode::squared_path_loss);

struct MultisinkResult {
  Location user_location;
  std::complex<double> user_amplitude{0.0, 0.0};
  ChannelVector reconstructed;
  double peak_metric = 0.0;
};

/// Single-user estimation against a channel database: one location and one
/// complex amplitude describe the whole channel. The search region must lie
/// within the room.
MultisinkResult estimate_multisink(
    const NoisyChannel& snapshot, const ChannelDatabase& db,
    const Environment& env, const SearchRegion& region, const SearchParams& params,
    AmplitudeMode amplitude_mode = AmplitudeMode::least_squares,
    SteeringMode data_mode = SteeringMode::squared_path_loss,
    SteeringMode template_mode = SteeringMode::phase_only);

}  // namespace nearmimo
