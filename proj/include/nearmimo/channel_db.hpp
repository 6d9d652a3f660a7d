// SPDX-License-Identifier: Apache-2.0
// nearmimo: near-field distributed MIMO channel simulation and estimation

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nearmimo/estimation.hpp"
#include "nearmimo/propagation.hpp"

namespace nearmimo {

/// The serialized database format version this build reads and writes.
inline constexpr int kDatabaseFormatVersion = 1;

/// Precomputed per-antenna virtual-sink lists describing the static
/// environment around an array: everything channel reconstruction needs,
/// independent of the user location. Walls are kept as provenance.
struct ChannelDatabase {
  int format_version = kDatabaseFormatVersion;
  double wavelength = 0.0;
  std::vector<Location> array_locations;
  std::vector<std::vector<VirtualSink>> sinks;  // one list per antenna
  std::vector<Wall> walls_used;
};

/// A reflecting line inferred from a (main, mirror) source pair.
struct WallEstimate {
  WallLine line;
  double reflection_coefficient = 1.0;
  double confidence = 1.0;  // reporting only, never used for filtering
};

class VersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Serialization-format violation; the message names the offending field path.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Database for a known environment: enumerates antenna images up to
/// max_order. channel_from_sinks over the result reproduces the ray-traced
/// channel for any in-room transmitter.
ChannelDatabase build_db_from_environment(const AntennaArray& array,
                                          const Environment& env, int max_order,
                                          double wavelength);

struct WallInferenceOptions {
  /// Multiply the amplitude ratio by the path-loss ratio between the two
  /// source locations and `reference`. Only needed when the amplitudes were
  /// estimated against a loss-free (phase-only) template; with path loss
  /// inside the steering function the raw ratio is the coefficient already.
  bool compensate_path_loss = false;
  Location reference;
  SteeringMode loss_law = SteeringMode::squared_path_loss;
  /// Linear-scale EVM of the estimates feeding the inference; 0 means exact.
  double generating_evm_linear = 0.0;
};

/// Reflecting-surface inference from a main/mirror estimate pair: the wall
/// line is their perpendicular bisector and the reflection coefficient the
/// amplitude ratio. Ratios above 1 lower the confidence and are clamped at
/// 1.5. Throws std::invalid_argument for coincident locations or a zero
/// amplitude on either side.
WallEstimate infer_wall(const SourceEstimate& main, const SourceEstimate& mirror,
                        const WallInferenceOptions& options = {});

/// Database from inferred wall lines: each line is clipped to the room
/// rectangle [0,width] x [0,depth] to obtain a finite segment (lines missing
/// the room are dropped), coefficients are clamped into (0, 1], and the
/// result is built as from a known environment. An empty wall list yields a
/// direct-only database.
ChannelDatabase build_db_from_walls(const AntennaArray& array,
                                    const std::vector<WallEstimate>& walls,
                                    double room_width, double room_depth,
                                    int max_order, double wavelength);

/// Room environment carried by a database (walls plus their bounding box,
/// falling back to the array extent for wall-less databases).
Environment environment_of(const ChannelDatabase& db);

/// Human-readable structured text; round trips every numeric field
/// bit-exactly. Throws SchemaError for non-finite values.
std::string serialize_db(const ChannelDatabase& db);

/// Parses and validates a serialized database. Throws VersionError for an
/// unknown formatVersion and SchemaError (naming the field path) for
/// malformed, missing, or unknown fields and invariant violations.
ChannelDatabase deserialize_db(const std::string& text);

}  // namespace nearmimo
