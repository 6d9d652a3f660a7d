// SPDX-License-Identifier: Apache-2.0
// nearmimo: near-field distributed MIMO channel simulation and estimation

#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "nearmimo/geometry.hpp"

namespace nearmimo {

/// Point-to-point steering law.
///
/// squared_path_loss is the default synthesis law: the free-space loss enters
/// squared, exp(j*2*pi*d/lambda) / (4*pi*d/lambda)^2. amplitude_path_loss is
/// the conventional amplitude law with a single power of the loss,
/// exp(j*2*pi*d/lambda) * lambda/(4*pi*d). phase_only drops the loss entirely
/// and is what the estimators correlate against by default.
enum class SteeringMode { squared_path_loss, amplitude_path_loss, phase_only };

/// Thrown when a steering evaluation is requested below the minimum distance
/// guard of lambda/100; callers are expected to keep placements clear of it.
class TooCloseError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Near-field steering response between two points.
std::complex<double> steering(const Location& src, const Location& dst,
                              double wavelength,
                              SteeringMode mode = SteeringMode::squared_path_loss);

/// Same as steering() with the distance already computed. The caller must
/// have enforced d >= wavelength/100.
std::complex<double> steering_from_distance(double d, double wavelength,
                                            SteeringMode mode);

/// Receive antenna positions, indexed by antenna number m.
struct AntennaArray {
  std::vector<Location> locations;

  std::size_t size() const { return locations.size(); }
};

/// Throws std::invalid_argument unless the array has at least one antenna and
/// all elements are pairwise at least 1e-6 m apart.
void validate_antenna_array(const AntennaArray& array);

/// A transmitter image: the physical source (order 0) or one of its mirror
/// images. The amplitude is the product of the reflection coefficients along
/// the generating wall path and excludes the transmitter amplitude.
struct VirtualSource {
  Location location;
  std::complex<double> amplitude{1.0, 0.0};
  int order = 0;
  WallPath path;
};

/// A receive-antenna image; the reciprocal dual of a mirror source. The gain
/// is the product of the reflection coefficients along the path.
struct VirtualSink {
  int antenna_index = 0;
  Location location;
  std::complex<double> gain{1.0, 0.0};
  int order = 0;
  WallPath path;
};

struct Transmitter {
  Location location;
  std::complex<double> amplitude{1.0, 0.0};
};

/// Antenna-domain channel: one complex coefficient per antenna.
struct ChannelVector {
  std::vector<std::complex<double>> coefficients;
  double wavelength = 0.0;
};

/// All images of the transmitter up to the requested reflection order,
/// direct source first, then ascending order with wall paths in lexicographic
/// order. Chains never reflect off the same wall twice in a row.
std::vector<VirtualSource> enumerate_virtual_sources(const Location& tx,
                                                     const Environment& env,
                                                     int max_order);

/// Per-antenna image lists for every antenna of the array, in the same
/// deterministic order as enumerate_virtual_sources. The order-0 entry is the
/// antenna itself with gain 1.
std::vector<std::vector<VirtualSink>> enumerate_virtual_sinks(
    const AntennaArray& array, const Environment& env, int max_order);

/// Ground-truth channel as a superposition of transmitter images, with each
/// image contributing only to antennas inside its visibility sector.
ChannelVector channel_from_sources(const Transmitter& tx,
                                   const std::vector<VirtualSource>& sources,
                                   const AntennaArray& array,
                                   const Environment& env, double wavelength,
                                   SteeringMode mode = SteeringMode::squared_path_loss);

/// Ground-truth channel as a superposition of receive-antenna images. Dual to
/// channel_from_sources: identical coefficients for the same scene.
ChannelVector channel_from_sinks(const Transmitter& tx,
                                 const std::vector<std::vector<VirtualSink>>& sinks,
                                 const Environment& env, double wavelength,
                                 SteeringMode mode = SteeringMode::squared_path_loss);

}  // namespace nearmimo
